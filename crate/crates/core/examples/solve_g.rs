//! Solving the implicit gradient-bound constraint `G ≥ Φ(G)` for several
//! profiles, including one that grows too fast to admit a finite `G`.

use gensmooth::smoothness::{effective_constants, solve_g, GConstraint, GVariant};
use gensmooth::{EllFunction, Error};

fn main() -> gensmooth::Result<()> {
    let profiles = [
        ("constant L=2", EllFunction::constant(2.0)?),
        ("(L0,L1) = (1,1)", EllFunction::power_law(1.0, 1.0, 1.0)?),
        ("rho = 1.5", EllFunction::power_law(1.0, 1.0, 1.5)?),
        ("rho = 1.9", EllFunction::power_law(1.0, 0.01, 1.9)?),
        ("rho = 2", EllFunction::power_law(0.0, 1.0, 2.0)?),
    ];
    let variants = [
        GVariant::NonconvexGd,
        GVariant::NagConvex { alpha: 2.0 },
        GVariant::Sgd {
            delta: 0.1,
            epsilon: 0.1,
            sigma: 1.0,
        },
    ];
    for (name, ell) in &profiles {
        for v in variants {
            let c = GConstraint::new(v, 1.0, 1.0, 1.0, ell.clone());
            match solve_g(&c) {
                Ok(g) => {
                    let k = effective_constants(ell, g)?;
                    println!(
                        "{name:<16} {:<12} G = {g:<12.6e} Φ(G) = {:<12.6e} L = ℓ(2G) = {:.4e}",
                        v.name(),
                        c.phi(g),
                        k.l
                    );
                }
                Err(Error::NoFiniteG { cap, .. }) => {
                    println!("{name:<16} {:<12} no finite G below {cap:e}", v.name())
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}
