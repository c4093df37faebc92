//! The piecewise-logarithmic hard instance: a stepsize in the stuck range
//! leaves GD on a period-2 orbit, a smaller one needs exponentially many
//! steps, and a larger one diverges on the quadratic piece.

use gensmooth::lowerbound::{run_lower_bound, LowerBoundSetup, Regime};
use gensmooth::objectives::HardInstance;

fn main() -> gensmooth::Result<()> {
    let (l0, l2, g0, delta0) = (64.0, 1.0, 4.0, 24.0);
    let h = HardInstance::new(l0, l2, g0, delta0)?;
    let (lo, hi) = h.stuck_range();
    println!(
        "stuck range [{lo:.4e}, {hi:.4e}], floor exp(L2 Δ0/8)/6 = {:.3}",
        h.step_floor
    );

    for eta in [0.5 * lo, (lo * hi).sqrt(), 0.1] {
        let mut s = LowerBoundSetup::new(l0, l2, g0, delta0, eta);
        s.budget = Some(200_000);
        let r = run_lower_bound(&s)?;
        print!("eta = {eta:.4e}: {:?}; ", r.regime);
        match (r.regime, &r.orbit, r.gd.steps_to_stationary) {
            (Regime::Quadratic, _, _) => println!(
                "|1 - eta L0| = {}, |x| after {} steps on the quadratic piece: {:.3e}",
                r.quadratic.factor, r.quadratic.steps, r.quadratic.final_abs
            ),
            (_, Some(o), _) => println!("|x_t| = {:.9} for {} exact steps", o.z, o.steps),
            (_, None, Some(t)) => println!("1-stationary after {t} steps"),
            (_, None, None) => println!("not stationary within {} steps", r.gd.steps_run),
        }
    }
    Ok(())
}
