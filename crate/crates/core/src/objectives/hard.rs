//! The piecewise-logarithmic function on which constant-stepsize GD either
//! locks into a period-2 orbit or needs exponentially many steps.
//!
//! The unscaled function `f` is
//!
//! ```text
//! f(x) = log(|x| - c)                        |x| ≥ y
//!        2 log(y - c) - log(2y - |x| - c)    c/2 ≤ |x| < y
//!        k x² + b                            |x| < c/2
//! ```
//!
//! with `y = (c + √(c² + 2η₁))/2`, the fixed point of
//! `x ↦ |x − η₁/(x − c)|`. The objective exposed to solvers is
//! `g = f / L₂`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardInstance {
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "G0")]
    pub g0: f64,
    #[serde(rename = "Delta0")]
    pub delta0: f64,
    pub c: f64,
    pub eta1: f64,
    pub y_fixed: f64,
    pub x0: f64,
    pub k: f64,
    pub b: f64,
    /// `1/L₂`
    pub scale: f64,
    /// `exp(L₂Δ₀/8)/6`
    pub step_floor: f64,
}

impl HardInstance {
    /// Builds the instance for the requested constants. Needs `L₂Δ₀ ≥ 10`.
    pub fn new(l0: f64, l2: f64, g0: f64, delta0: f64) -> Result<Self> {
        for (name, v) in [("L0", l0), ("L2", l2), ("G0", g0), ("Delta0", delta0)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if l2 * delta0 < 10.0 {
            return Err(Error::param(format!(
                "hard instance needs L2*Delta0 >= 10, got {}",
                l2 * delta0
            )));
        }
        let c = (2.0 / (l0 * l2).sqrt())
            .max(2.0 / (l2 * g0))
            .max((8.0 / l0).sqrt());
        let log_inv_eta1 = (l2 * delta0 - 3.5 * 2f64.ln() - 0.5) / 2.0 - 2.0 * c.ln();
        let eta1 = (-log_inv_eta1).exp();
        let mut h = Self::with_shape(c, eta1, l2)?;
        h.l0 = l0;
        h.g0 = g0;
        h.delta0 = delta0;
        h.step_floor = (l2 * delta0 / 8.0).exp() / 6.0;
        Ok(h)
    }

    /// Builds the function directly from `c` and `η₁`. `L0`, `G0` and
    /// `Delta0` are filled with the values the construction actually attains.
    pub fn with_shape(c: f64, eta1: f64, l2: f64) -> Result<Self> {
        if !(c > 0.0 && eta1 > 0.0 && l2 > 0.0) {
            return Err(Error::param("c, eta1 and L2 must be > 0"));
        }
        if eta1 > c * c / 2.0 {
            return Err(Error::param(format!(
                "eta1 = {eta1} exceeds c^2/2 = {}",
                c * c / 2.0
            )));
        }
        let y = (c + (c * c + 2.0 * eta1).sqrt()) / 2.0;
        let fp_half = 1.0 / (2.0 * y - 1.5 * c);
        let f_half = 2.0 * (y - c).ln() - (2.0 * y - 1.5 * c).ln();
        let k = fp_half / c;
        let b = f_half - c * fp_half / 4.0;
        let x0 = 1.5 * c + eta1.sqrt() / 2.0;
        let mut h = HardInstance {
            l0: 2.0 * k / l2,
            l2,
            g0: 0.0,
            delta0: 0.0,
            c,
            eta1,
            y_fixed: y,
            x0,
            k,
            b,
            scale: 1.0 / l2,
            step_floor: 0.0,
        };
        h.g0 = h.g_d1(x0).abs();
        h.delta0 = h.g_value(x0) - h.g_value(0.0);
        h.step_floor = (l2 * h.delta0 / 8.0).exp() / 6.0;
        Ok(h)
    }

    pub fn f_value(&self, x: f64) -> f64 {
        let (c, y, a) = (self.c, self.y_fixed, x.abs());
        if a >= y {
            (a - c).ln()
        } else if a >= c / 2.0 {
            2.0 * (y - c).ln() - (2.0 * y - a - c).ln()
        } else {
            self.k * x * x + self.b
        }
    }

    pub fn f_d1(&self, x: f64) -> f64 {
        let (c, y, a) = (self.c, self.y_fixed, x.abs());
        let s = x.signum();
        if a >= y {
            s / (a - c)
        } else if a >= c / 2.0 {
            s / (2.0 * y - a - c)
        } else {
            2.0 * self.k * x
        }
    }

    pub fn f_d2(&self, x: f64) -> f64 {
        let (c, y, a) = (self.c, self.y_fixed, x.abs());
        if a >= y {
            -1.0 / ((a - c) * (a - c))
        } else if a >= c / 2.0 {
            1.0 / ((2.0 * y - a - c) * (2.0 * y - a - c))
        } else {
            2.0 * self.k
        }
    }

    pub fn g_value(&self, x: f64) -> f64 {
        self.f_value(x) * self.scale
    }

    pub fn g_d1(&self, x: f64) -> f64 {
        self.f_d1(x) * self.scale
    }

    pub fn g_d2(&self, x: f64) -> f64 {
        self.f_d2(x) * self.scale
    }

    /// Minimum of `g`, attained at 0.
    pub fn g_star(&self) -> f64 {
        self.b * self.scale
    }

    /// Stepsizes on `g` for which the period-2 orbit `±z` exists:
    /// `[L₂·η₁, L₂·c²/4]`.
    pub fn stuck_range(&self) -> (f64, f64) {
        (self.l2 * self.eta1, self.l2 * self.c * self.c / 4.0)
    }

    /// The orbit point `z = (c + √(c² + 2η_f))/2` for a stepsize `eta` on
    /// `g` (`η_f = eta/L₂`). Solves `−z = z − η_f/(z − c)`.
    pub fn orbit_point(&self, eta: f64) -> f64 {
        let eta_f = eta / self.l2;
        (self.c + (self.c * self.c + 2.0 * eta_f).sqrt()) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_example() {
        let h = HardInstance::with_shape(2.0, 0.5, 1.0).unwrap();
        assert!((h.y_fixed - (2.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        // y is a fixed point of x -> |x - eta1/(x - c)|
        let y = h.y_fixed;
        assert!(((y - 0.5 / (y - 2.0)).abs() - y).abs() < 1e-12);
    }

    #[test]
    fn continuity_at_joins() {
        let h = HardInstance::new(64.0, 1.0, 4.0, 24.0).unwrap();
        let e = 1e-13;
        for x in [h.c / 2.0, h.y_fixed] {
            let curv = h.f_d2(x - e).abs().max(h.f_d2(x + e).abs());
            let slope = h.f_d1(x - e).abs().max(h.f_d1(x + e).abs());
            assert!((h.f_value(x - e) - h.f_value(x + e)).abs() < 4.0 * e * slope + 1e-10);
            assert!((h.f_d1(x - e) - h.f_d1(x + e)).abs() < 4.0 * e * curv + 1e-10);
        }
    }

    #[test]
    fn construction_constants() {
        let h = HardInstance::new(64.0, 1.0, 4.0, 24.0).unwrap();
        assert_eq!(h.c, 0.5);
        assert!((h.step_floor - 3f64.exp() / 6.0).abs() < 1e-12);
        assert!(h.x0 >= 1.5 * h.c && h.x0 < 1.5 * h.c + h.eta1.sqrt());
        let log_inv = (24.0 - 3.5 * 2f64.ln() - 0.5) / 2.0 - 2.0 * h.c.ln();
        assert!(((1.0 / h.eta1).ln() - log_inv).abs() < 1e-12);
        assert!(HardInstance::new(1.0, 1.0, 1.0, 9.0).is_err());
    }
}
