//! The largest gradient norm on a sublevel set, against the bound implied by
//! `M² ≤ 2ℓ(2M)(f(x₀) − f*)`.

use gensmooth::diagnostics::{level_set_m, LevelSetSearch};
use gensmooth::objectives::{make_cosh, make_exponential, make_quartic_well};

fn main() -> gensmooth::Result<()> {
    let search = LevelSetSearch::default();
    for (obj, x0) in [
        (make_quartic_well()?, 1.5),
        (make_cosh()?, 2.0),
        (make_exponential(2.0)?, 3.0),
    ] {
        let m = level_set_m(&obj, x0, &search)?;
        println!(
            "{:<20} x0 = {x0:<4} level set [{:.4e}, {:.4e}]  M = {:.5} at {:.4}  bound {:.5}",
            obj.name(),
            m.interval.0,
            m.interval.1,
            m.m,
            m.argmax,
            m.analytic_root.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
