//! Strongly convex accelerated method on `2cosh(x)` with a hand-picked
//! stepsize, next to the tuned one, and its coefficient invariants.

use gensmooth::diagnostics::{fit_rate, potential_series, PotentialKind, RateMode};
use gensmooth::objectives::make_cosh;
use gensmooth::solvers::{nag_sc_weights, run_nag_sc};
use gensmooth::tuner::{tune, Method};

fn main() -> gensmooth::Result<()> {
    let obj = make_cosh()?;
    let mu = obj.mu.unwrap();
    let x0 = [2.0];
    let p = tune(Method::NagStronglyConvex, &obj, &x0, None, None, Some(mu))?;
    println!(
        "tuned: G = {:.4}, L = {:.4}, eta = {:.3e} (the theorem's constants are very conservative)",
        p.g, p.l, p.eta
    );

    let eta = 0.01;
    let traj = run_nag_sc(&obj, &x0, eta, mu, 400)?;
    let pot = potential_series(&traj, &obj, PotentialKind::NagSc { mu })?;
    let fit = fit_rate(&traj, RateMode::Linear, (20, 150))?;
    println!("eta = {eta}: potential non-increasing: {}", pot.monotone());
    println!(
        "fitted log-rate {:.4} vs log(1 - sqrt(eta mu)) = {:.4}",
        fit.rate(),
        (1.0 - (eta * mu).sqrt()).ln()
    );

    let w = nag_sc_weights(eta, mu, 200)?;
    let worst = (0..200)
        .flat_map(|t| (0..=t).map(move |s| (t, s)))
        .map(|(t, s)| w.tau[t] * w.delta[s])
        .fold(0.0, f64::max);
    println!("max tau_t delta_s over s <= t < 200: {worst:.6}");
    Ok(())
}
