//! Gradient descent on `x⁴` with the tuned constant stepsize: the convex
//! rate bound, the Lyapunov potential and the sublinear fitted rate.

use gensmooth::diagnostics::{
    check_theorem_bound, fit_rate, potential_series, PotentialKind, RateMode,
};
use gensmooth::objectives::make_polynomial;
use gensmooth::solvers::run_gd;
use gensmooth::tuner::{predict_bound, tune, Method};

fn main() -> gensmooth::Result<()> {
    let obj = make_polynomial(&[0.0, 0.0, 0.0, 0.0, 1.0])?;
    let x0 = [1.0];
    let p = tune(Method::GdConvex, &obj, &x0, None, None, None)?;
    println!("tuned: G = {:.4}, L = {:.4}, eta = {:.6e}", p.g, p.l, p.eta);

    let traj = run_gd(&obj, &x0, p.eta, 10_000, None)?;
    for t in [1u64, 10, 100, 1000, 10_000] {
        let r = traj.record_at(t as usize).unwrap();
        println!(
            "t = {t:>6}  gap = {:.4e}  bound = {:.4e}",
            r.gap.unwrap(),
            predict_bound(&p, t)?
        );
    }
    let bound = check_theorem_bound(&traj, &p)?;
    let pot = potential_series(&traj, &obj, PotentialKind::GdConvex)?;
    let fit = fit_rate(&traj, RateMode::Power, (100, 10_000))?;
    println!("bound violations: {}", bound.violations);
    println!("potential non-increasing: {}", pot.monotone());
    // on x⁴ GD is sublinear: gap ~ t^(-1)
    println!("fitted slope of log gap vs log t: {:.3}", fit.rate());
    Ok(())
}
