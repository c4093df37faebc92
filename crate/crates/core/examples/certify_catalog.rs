//! Checks `‖∇²f‖ ≤ ℓ(‖∇f‖)` for every catalog objective on seeded samples,
//! then shows that a deliberately weakened profile is caught.

use gensmooth::diagnostics::{certify_profile, SamplePlan};
use gensmooth::objectives::{catalog, make_exponential};
use gensmooth::EllFunction;

fn main() -> gensmooth::Result<()> {
    let plan = SamplePlan::new(10_000, 0);
    println!("{:<44} {:<56} {:>10}", "objective", "profile", "violations");
    for obj in catalog()? {
        let c = certify_profile(&obj, &plan, None)?;
        println!(
            "{:<44} {:<56} {:>10}",
            obj.name(),
            format!("{:?}", obj.profile),
            c.violations.len()
        );
    }

    // e^x has ℓ(u) = u exactly; half of it must fail
    let e = make_exponential(std::f64::consts::E)?;
    let halved = EllFunction::power_law(0.0, 0.5, 1.0)?;
    let c = certify_profile(&e, &plan, Some(&halved))?;
    let worst = c
        .violations
        .iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .expect("violations");
    println!(
        "\nhalved profile on e^x: {} of {} samples violate; worst at x = {:.3} (|f''| = {:.3e}, bound {:.3e})",
        c.violations.len(),
        c.checked,
        worst.x[0],
        worst.hessian_norm,
        worst.bound
    );
    Ok(())
}
