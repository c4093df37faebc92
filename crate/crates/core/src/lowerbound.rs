//! Reproduction of the constant-stepsize GD lower bound for `ρ = 2`.
//!
//! Three regimes, by the stepsize `η` used on `g = f/L₂`:
//!
//! * `η` in the stuck range `[L₂η₁, L₂c²/4]`: a period-2 orbit `±z` exists.
//!   The orbit is strongly repelling, so it is verified in exact rational
//!   arithmetic at the nearest stepsize for which an `f64` orbit point `z` is
//!   exact.
//! * `η` below the stuck range: GD from `x₀` needs at least
//!   `exp(L₂Δ₀/8)/6` steps to reach `|g′| ≤ 1`.
//! * `η > 2/L₀`: GD on `L₀x²/2` diverges. This branch is run for every
//!   report, at `max(η, 4/L₀)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{make_quadratic, HardInstance};
use crate::solvers::{run_gd, StopReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Above both the stuck range and `2/L₀`.
    Quadratic,
    /// Inside the stuck range.
    Stuck,
    /// Below the stuck range.
    Slow,
    /// Above the stuck range but at most `2/L₀` (empty when `L₂ ≥ 1`).
    Above,
}

/// Outcome of plain `f64` GD on the hard instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdOutcome {
    pub x0: f64,
    pub eta: f64,
    pub budget: u64,
    /// First `t` with `|g′(x_t)| ≤ 1`.
    pub steps_to_stationary: Option<u64>,
    /// First `t` from which `x_{t+1} = −x_t` held (to `1e-9` relative) for
    /// 16 consecutive steps.
    pub period2_from: Option<u64>,
    pub steps_run: u64,
    pub last_x: f64,
}

/// Exact verification of the period-2 orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitCheck {
    pub eta_requested: f64,
    /// Stepsize on `g` actually verified, `L₂ · 2z(z − c)`, rounded to f64
    /// for display (the iteration itself uses the exact rational).
    pub eta_snapped: f64,
    pub z: f64,
    pub steps: usize,
    /// `max_t ||x_t| − z|`, computed exactly.
    pub max_deviation: f64,
    pub period2: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticBranch {
    #[serde(rename = "L0")]
    pub l0: f64,
    pub eta: f64,
    pub factor: f64,
    pub steps: usize,
    /// `|x_{t+1}| > |x_t|` at every recorded step.
    pub strictly_increasing: bool,
    pub final_abs: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub instance: HardInstance,
    pub eta: f64,
    pub regime: Regime,
    pub stuck_range: (f64, f64),
    /// `exp(L₂Δ₀/8)/6`
    pub floor: f64,
    pub gd: GdOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitCheck>,
    pub quadratic: QuadraticBranch,
    /// The run lands on the expected side of the dichotomy: stuck, slow or
    /// divergent.
    pub consistent: bool,
}

/// Default step budget: `max(⌈10·floor⌉, 1000)`.
pub fn default_budget(h: &HardInstance) -> u64 {
    ((10.0 * h.step_floor).ceil() as u64).max(1000)
}

pub fn classify(h: &HardInstance, eta: f64) -> Regime {
    let (lo, hi) = h.stuck_range();
    if eta < lo {
        Regime::Slow
    } else if eta <= hi {
        Regime::Stuck
    } else if eta > 2.0 / h.l0 {
        Regime::Quadratic
    } else {
        Regime::Above
    }
}

/// GD on `g` from `x0`, stopping at the first `|g′| ≤ 1`, a detected
/// period-2 orbit, a non-finite iterate or the budget.
pub fn gd_on_hard(h: &HardInstance, x0: f64, eta: f64, budget: u64) -> GdOutcome {
    let mut x = x0;
    let mut out = GdOutcome {
        x0,
        eta,
        budget,
        steps_to_stationary: None,
        period2_from: None,
        steps_run: 0,
        last_x: x0,
    };
    let mut streak = 0u64;
    for t in 0..=budget {
        let d = h.g_d1(x);
        if d.abs() <= 1.0 {
            out.steps_to_stationary = Some(t);
            break;
        }
        if t == budget {
            break;
        }
        let next = x - eta * d;
        if !next.is_finite() {
            break;
        }
        if (next + x).abs() <= 1e-9 * x.abs() {
            streak += 1;
            if streak >= 16 {
                out.period2_from = Some(t + 1 - streak);
                x = next;
                out.steps_run = t + 1;
                break;
            }
        } else {
            streak = 0;
        }
        x = next;
        out.steps_run = t + 1;
    }
    out.last_x = x;
    out
}

fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact `f′` of the unscaled piecewise function.
fn f_d1_exact(x: &BigRational, c: &BigRational, y: &BigRational, k: &BigRational) -> BigRational {
    let a = x.abs();
    let s = if x.is_negative() {
        -BigRational::from_integer(BigInt::from(1))
    } else {
        BigRational::from_integer(BigInt::from(1))
    };
    let half_c = c / BigRational::from_integer(BigInt::from(2));
    if &a >= y {
        s / (&a - c)
    } else if a >= half_c {
        let two = BigRational::from_integer(BigInt::from(2));
        s / (two * y - &a - c)
    } else {
        BigRational::from_integer(BigInt::from(2)) * k * x
    }
}

/// Iterates GD exactly from the orbit point `z(η)` for `steps` steps at the
/// snapped stepsize `η_f* = 2z(z − c)`, for which `z − η_f*/(z − c) = −z`
/// holds exactly.
pub fn verify_stuck_orbit(h: &HardInstance, eta: f64, steps: usize) -> Result<OrbitCheck> {
    let (lo, hi) = h.stuck_range();
    if !(eta >= lo && eta <= hi) {
        return Err(Error::param(format!(
            "eta = {eta:e} is outside the stuck range [{lo:e}, {hi:e}]"
        )));
    }
    // z ≥ y keeps both orbit points on the logarithmic piece
    let z = h.orbit_point(eta).max(h.y_fixed);
    let (c, y, k) = (rat(h.c), rat(h.y_fixed), rat(h.k));
    let zr = rat(z);
    let two = BigRational::from_integer(BigInt::from(2));
    let eta_f = &two * &zr * (&zr - &c);
    let eta_g = &eta_f * rat(h.l2);
    let mut x = zr.clone();
    let mut max_dev = BigRational::zero();
    for _ in 0..steps {
        let d = f_d1_exact(&x, &c, &y, &k);
        x = &x - &eta_f * d;
        let dev = (x.abs() - &zr).abs();
        if dev > max_dev {
            max_dev = dev;
        }
    }
    let dev = rat_to_f64(&max_dev);
    Ok(OrbitCheck {
        eta_requested: eta,
        eta_snapped: rat_to_f64(&eta_g),
        z,
        steps,
        max_deviation: dev,
        period2: dev <= 1e-9 * z,
    })
}

/// GD on `L₀x²/2` from `x0` for `steps` steps.
pub fn quadratic_branch(l0: f64, eta: f64, x0: f64, steps: usize) -> Result<QuadraticBranch> {
    let q = make_quadratic(l0, 1)?;
    let tr = run_gd(&q, &[x0], eta, steps, None)?;
    let abs: Vec<f64> = tr.records.iter().map(|r| r.x[0].abs()).collect();
    let strictly_increasing = abs.windows(2).all(|w| w[1] > w[0]);
    let factor = (1.0 - eta * l0).abs();
    Ok(QuadraticBranch {
        l0,
        eta,
        factor,
        steps: tr.last().t,
        strictly_increasing,
        final_abs: *abs.last().unwrap(),
        diverged: factor > 1.0
            && strictly_increasing
            && matches!(
                tr.stop,
                StopReason::Completed { .. } | StopReason::Nonfinite { .. }
            ),
    })
}

/// Parameters of one lower-bound reproduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundSetup {
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "G0")]
    pub g0: f64,
    #[serde(rename = "Delta0")]
    pub delta0: f64,
    pub eta: f64,
    /// GD budget; [`default_budget`] when absent.
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default = "default_orbit_steps")]
    pub orbit_steps: usize,
}

fn default_orbit_steps() -> usize {
    1000
}

impl LowerBoundSetup {
    pub fn new(l0: f64, l2: f64, g0: f64, delta0: f64, eta: f64) -> Self {
        LowerBoundSetup {
            l0,
            l2,
            g0,
            delta0,
            eta,
            budget: None,
            orbit_steps: default_orbit_steps(),
        }
    }
}

/// Builds the instance, runs GD from its `x₀` with the given stepsize,
/// verifies the orbit when `η` is in the stuck range, and runs the quadratic
/// branch at `max(η, 4/L₀)`.
pub fn run_lower_bound(s: &LowerBoundSetup) -> Result<LowerBoundReport> {
    if !(s.eta > 0.0) || !s.eta.is_finite() {
        return Err(Error::param(format!(
            "eta must be finite and > 0, got {}",
            s.eta
        )));
    }
    let h = HardInstance::new(s.l0, s.l2, s.g0, s.delta0)?;
    let regime = classify(&h, s.eta);
    let budget = s.budget.unwrap_or_else(|| default_budget(&h));
    let gd = gd_on_hard(&h, h.x0, s.eta, budget);
    let orbit = match regime {
        Regime::Stuck => Some(verify_stuck_orbit(&h, s.eta, s.orbit_steps)?),
        _ => None,
    };
    let q_eta = if s.eta > 2.0 / s.l0 {
        s.eta
    } else {
        4.0 / s.l0
    };
    let quadratic = quadratic_branch(s.l0, q_eta, 1.0, 100)?;
    let floor = h.step_floor;
    let consistent = match regime {
        Regime::Quadratic => quadratic.diverged,
        Regime::Stuck => orbit.as_ref().is_some_and(|o| o.period2),
        Regime::Slow => gd.steps_to_stationary.is_none_or(|t| t as f64 >= floor),
        Regime::Above => true,
    };
    Ok(LowerBoundReport {
        stuck_range: h.stuck_range(),
        instance: h,
        eta: s.eta,
        regime,
        floor,
        gd,
        orbit,
        quadratic,
        consistent,
    })
}
