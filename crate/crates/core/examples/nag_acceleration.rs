//! Accelerated gradient method against plain GD on the same objective, and
//! the weight sequence behind the acceleration.

use gensmooth::diagnostics::{fit_rate, potential_series, PotentialKind, RateMode};
use gensmooth::objectives::make_quadratic;
use gensmooth::solvers::{nag_weights, run_gd, run_nag};
use gensmooth::tuner::{predict_bound, tune, Method};

fn main() -> gensmooth::Result<()> {
    let obj = make_quadratic(1.0, 2)?;
    let x0 = [1.0, -0.5];
    let p = tune(Method::NagConvex, &obj, &x0, None, None, None)?;
    println!(
        "tuned NAG: G = {:.4}, L = {:.4}, eta = {:.4e}",
        p.g, p.l, p.eta
    );

    let nag = run_nag(&obj, &x0, p.eta, 2000)?;
    let gd = run_gd(&obj, &x0, p.eta, 2000, None)?;
    println!(
        "{:>6} {:>12} {:>12} {:>12}",
        "t", "NAG gap", "GD gap", "NAG bound"
    );
    for t in [10usize, 50, 100, 200, 400] {
        println!(
            "{t:>6} {:>12.4e} {:>12.4e} {:>12.4e}",
            nag.record_at(t).unwrap().gap.unwrap(),
            gd.record_at(t).unwrap().gap.unwrap(),
            predict_bound(&p, t as u64)?
        );
    }
    let pot = potential_series(&nag, &obj, PotentialKind::Nag)?;
    println!("NAG potential non-increasing: {}", pot.monotone());
    let fit = fit_rate(&nag, RateMode::Power, (10, 100))?;
    println!("NAG log-log slope over [10, 100]: {:.3}", fit.rate());

    let w = nag_weights(p.eta, 10_000)?;
    let t = 10_000usize;
    println!(
        "B_t at t = {t}: {:.1} (t²/4 = {:.1}, t² = {:.1}); weights expression max {:.4}",
        w.b[t],
        0.25 * (t * t) as f64,
        (t * t) as f64,
        w.lemma_series().iter().cloned().fold(0.0, f64::max)
    );
    Ok(())
}
