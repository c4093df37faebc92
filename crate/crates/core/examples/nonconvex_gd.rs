//! GD on the nonconvex double well `(x² − 1)²`: the gradient never exceeds
//! the solved bound `G`, and the averaged squared gradient obeys its bound.

use gensmooth::diagnostics::{check_gradient_bound, check_theorem_bound};
use gensmooth::objectives::make_quartic_well;
use gensmooth::solvers::run_gd;
use gensmooth::tuner::{predict_bound, tune, Method};

fn main() -> gensmooth::Result<()> {
    let obj = make_quartic_well()?;
    let x0 = [1.5];
    let p = tune(Method::GdNonconvex, &obj, &x0, None, None, None)?;
    println!(
        "tuned: G = {:.4}, L = {:.4}, rG = {:.4e}, eta = {:.4e}",
        p.g, p.l, p.r_g, p.eta
    );

    let traj = run_gd(&obj, &x0, p.eta, 10_000, None)?;
    let gb = check_gradient_bound(&traj, p.g);
    println!("first exceedance of G: {:?}", gb.tau);
    for t in [10usize, 100, 1000, 10_000] {
        let r = traj.record_at(t).unwrap();
        println!(
            "t = {t:>6}  mean |f'|² = {:.4e}  bound = {:.4e}  x = {:.6}",
            r.grad_sq_sum / t as f64,
            predict_bound(&p, t as u64)?,
            r.x[0]
        );
    }
    println!(
        "bound violations: {}",
        check_theorem_bound(&traj, &p)?.violations
    );

    // an oversized step leaves the bound: the stopping-time quantities appear
    let wild = run_gd(&obj, &[1.5], 0.5, 50, None)?;
    let gb = check_gradient_bound(&wild, p.g);
    println!(
        "eta = 0.5: stop = {:?}, tau = {:?}, tau_half = {:?}, S_uc = {:?}, S_rect = {:?}",
        wild.stop, gb.tau, gb.tau_half, gb.s_uc, gb.s_rect
    );
    Ok(())
}
