//! Certified test functions.
//!
//! Every objective carries its domain, optimum data and a smoothness profile.
//! Profiles are exact where an identity is available (`aˣ`, `−log x`, `xᵖ`,
//! `cosh`) and fitted by [`fit_envelope`] otherwise.

mod domain;
mod hard;
pub mod poly;

pub use domain::DomainSpec;
pub use hard::HardInstance;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{linspace, logspace, norm};
use crate::smoothness::EllFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convexity {
    Nonconvex,
    Convex,
    StronglyConvex,
}

impl Convexity {
    pub fn is_convex(self) -> bool {
        !matches!(self, Convexity::Nonconvex)
    }
}

/// One-dimensional building block.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    Quadratic {
        l: f64,
    },
    Polynomial {
        coeffs: Vec<f64>,
        d1: Vec<f64>,
        d2: Vec<f64>,
        f_star: Option<f64>,
    },
    Exponential {
        a: f64,
    },
    DoubleExponential {
        a: f64,
        b: f64,
    },
    RationalInverse,
    Logarithmic,
    Power {
        p: f64,
        integer: bool,
    },
    Cosh,
    Hard(Box<HardInstance>),
}

impl Piece {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Piece::Quadratic { l } => 0.5 * l * x * x,
            Piece::Polynomial { coeffs, .. } => poly::eval(coeffs, x),
            Piece::Exponential { a } => a.powf(x),
            Piece::DoubleExponential { a, b } => a.powf(b.powf(x)),
            Piece::RationalInverse => 1.0 / x,
            Piece::Logarithmic => -x.ln(),
            Piece::Power { p, integer } => pow(x, *p, *integer),
            Piece::Cosh => 2.0 * x.cosh(),
            Piece::Hard(h) => h.g_value(x),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match self {
            Piece::Quadratic { l } => l * x,
            Piece::Polynomial { d1, .. } => poly::eval(d1, x),
            Piece::Exponential { a } => a.ln() * a.powf(x),
            Piece::DoubleExponential { a, b } => {
                let bx = b.powf(x);
                a.ln() * b.ln() * bx * a.powf(bx)
            }
            Piece::RationalInverse => -1.0 / (x * x),
            Piece::Logarithmic => -1.0 / x,
            Piece::Power { p, integer } => p * pow(x, p - 1.0, *integer),
            Piece::Cosh => 2.0 * x.sinh(),
            Piece::Hard(h) => h.g_d1(x),
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match self {
            Piece::Quadratic { l } => *l,
            Piece::Polynomial { d2, .. } => poly::eval(d2, x),
            Piece::Exponential { a } => a.ln() * a.ln() * a.powf(x),
            Piece::DoubleExponential { a, b } => {
                let bx = b.powf(x);
                b.ln() * (a.ln() * bx + 1.0) * self.d1(x)
            }
            Piece::RationalInverse => 2.0 / (x * x * x),
            Piece::Logarithmic => 1.0 / (x * x),
            Piece::Power { p, integer } => p * (p - 1.0) * pow(x, p - 2.0, *integer),
            Piece::Cosh => 2.0 * x.cosh(),
            Piece::Hard(h) => h.g_d2(x),
        }
    }

    /// `f(x) − f*`, evaluated without cancellation where a closed form
    /// allows it.
    pub fn gap(&self, x: f64, f_star: f64) -> f64 {
        match self {
            Piece::Quadratic { l } => 0.5 * l * x * x,
            Piece::Cosh => {
                let s = (0.5 * x).sinh();
                4.0 * s * s
            }
            Piece::DoubleExponential { a, b } => (a.ln() * b.powf(x)).exp_m1(),
            _ => self.value(x) - f_star,
        }
    }
}

fn pow(x: f64, p: f64, integer: bool) -> f64 {
    if integer {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Quadratic { l: f64 },
    Separable(Piece),
}

/// How sample points are drawn for certification and envelope fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    Linear { lo: f64, hi: f64 },
    Log { lo: f64, hi: f64 },
}

impl Sampling {
    pub fn grid(&self, n: usize) -> Vec<f64> {
        match *self {
            Sampling::Linear { lo, hi } => linspace(lo, hi, n),
            Sampling::Log { lo, hi } => logspace(lo, hi, n),
        }
    }

    /// Maps `u ∈ [0, 1]` into the region (uniform or log-uniform).
    pub fn map_unit(&self, u: f64) -> f64 {
        match *self {
            Sampling::Linear { lo, hi } => lo + (hi - lo) * u,
            Sampling::Log { lo, hi } => (lo.ln() + (hi.ln() - lo.ln()) * u).exp(),
        }
    }
}

/// Outcome of an envelope fit: the profile constants and where they hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "Lrho")]
    pub lrho: f64,
    pub rho: f64,
    pub samples: usize,
    pub region: Sampling,
}

/// A differentiable test function together with everything the theorems
/// need to know about it.
#[derive(Debug, Clone)]
pub struct Objective {
    pub id: String,
    pub params: Value,
    pub dim: usize,
    kind: Kind,
    pub domain: DomainSpec,
    pub f_star: Option<f64>,
    pub x_star: Option<Vec<f64>>,
    /// All global minimizers when more than one exists.
    pub minimizers: Vec<Vec<f64>>,
    pub mu: Option<f64>,
    pub profile: EllFunction,
    pub convexity: Convexity,
    pub bounded_below: bool,
    /// `f → +∞` at the domain boundary.
    pub closed: bool,
    pub sampling: Sampling,
    pub envelope: Option<EnvelopeFit>,
    analytic_hessian: bool,
}

impl Objective {
    fn univariate(
        id: &str,
        params: Value,
        piece: Piece,
        domain: DomainSpec,
        profile: EllFunction,
    ) -> Self {
        Objective {
            id: id.into(),
            params,
            dim: 1,
            kind: Kind::Separable(piece),
            domain,
            f_star: None,
            x_star: None,
            minimizers: vec![],
            mu: None,
            profile,
            convexity: Convexity::Convex,
            bounded_below: true,
            closed: true,
            sampling: Sampling::Linear {
                lo: -10.0,
                hi: 10.0,
            },
            envelope: None,
            analytic_hessian: true,
        }
    }

    pub fn name(&self) -> String {
        match &self.params {
            Value::Object(m) if !m.is_empty() => {
                let parts: Vec<String> = m.iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!("{}({})", self.id, parts.join(", "))
            }
            _ => self.id.clone(),
        }
    }

    /// The univariate building block, if this objective is separable.
    pub fn piece(&self) -> Option<&Piece> {
        match &self.kind {
            Kind::Separable(p) => Some(p),
            Kind::Quadratic { .. } => None,
        }
    }

    pub fn hard_instance(&self) -> Option<&HardInstance> {
        match self.piece() {
            Some(Piece::Hard(h)) => Some(h),
            _ => None,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.domain.contains_point(x)
    }

    pub fn check_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::param(format!(
                "point has dimension {}, objective {} has {}",
                x.len(),
                self.id,
                self.dim
            )));
        }
        for &v in x {
            let d = self.domain.signed_distance(v);
            if !(d > 0.0) {
                return Err(Error::Domain {
                    point: v,
                    domain: self.domain.describe(),
                    distance: if d.is_finite() { -d } else { f64::INFINITY },
                });
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.value_unchecked(x))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        Ok(self.gradient_unchecked(x))
    }

    pub fn hessian_norm(&self, x: &[f64]) -> Result<f64> {
        self.check_domain(x)?;
        if !self.analytic_hessian {
            return Ok(self.fd_hessian_norm(x));
        }
        Ok(match &self.kind {
            Kind::Quadratic { l } => *l,
            Kind::Separable(p) => x.iter().map(|&v| p.d2(v).abs()).fold(0.0, f64::max),
        })
    }

    /// `f(x) − f*`. Needs `f*`.
    pub fn gap(&self, x: &[f64]) -> Result<f64> {
        self.check_domain(x)?;
        let f_star = self
            .f_star
            .ok_or_else(|| Error::MissingData(format!("{} has no known f*", self.id)))?;
        Ok(match &self.kind {
            Kind::Quadratic { l } => 0.5 * l * x.iter().map(|v| v * v).sum::<f64>(),
            Kind::Separable(p) => {
                let per = f_star / self.dim as f64;
                x.iter().map(|&v| p.gap(v, per)).sum()
            }
        })
    }

    pub(crate) fn value_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Quadratic { l } => 0.5 * l * x.iter().map(|v| v * v).sum::<f64>(),
            Kind::Separable(p) => x.iter().map(|&v| p.value(v)).sum(),
        }
    }

    pub(crate) fn gradient_unchecked(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Quadratic { l } => x.iter().map(|v| l * v).collect(),
            Kind::Separable(p) => x.iter().map(|&v| p.d1(v)).collect(),
        }
    }

    /// Spectral norm of the Hessian from central differences of the
    /// gradient, step `h = max(1e-5, 1e-5·|xᵢ|)`.
    pub fn fd_hessian_norm(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let mut hess = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let h = (1e-5 * x[j].abs()).max(1e-5);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let gp = self.gradient_unchecked(&xp);
            let gm = self.gradient_unchecked(&xm);
            for i in 0..n {
                hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        if n == 1 {
            return hess[(0, 0)].abs();
        }
        let sym = (&hess + hess.transpose()) * 0.5;
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Drops the closed-form Hessian so that [`Objective::hessian_norm`]
    /// falls back to finite differences.
    pub fn without_analytic_hessian(mut self) -> Self {
        self.analytic_hessian = false;
        self
    }

    pub fn has_analytic_hessian(&self) -> bool {
        self.analytic_hessian
    }

    /// Replaces the stored smoothness profile (used for negative controls and
    /// config overrides).
    pub fn with_profile(mut self, profile: EllFunction) -> Self {
        self.profile = profile;
        self.envelope = None;
        self
    }

    /// Distance squared from `x` to the nearest known minimizer.
    pub fn dist_sq_to_opt(&self, x: &[f64]) -> Option<f64> {
        let mut cands: Vec<&Vec<f64>> = self.minimizers.iter().collect();
        if cands.is_empty() {
            cands.extend(self.x_star.iter());
        }
        cands
            .into_iter()
            .map(|s| crate::linalg::dist_sq(x, s))
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    pub fn grad_norm(&self, x: &[f64]) -> Result<f64> {
        Ok(norm(&self.gradient(x)?))
    }
}

pub fn eval_value(obj: &Objective, x: &[f64]) -> Result<f64> {
    obj.value(x)
}

pub fn eval_gradient(obj: &Objective, x: &[f64]) -> Result<Vec<f64>> {
    obj.gradient(x)
}

pub fn eval_hessian_norm(obj: &Objective, x: &[f64]) -> Result<f64> {
    obj.hessian_norm(x)
}

/// Number of grid points used by [`fit_envelope`].
pub const ENVELOPE_SAMPLES: usize = 10_000;

/// Fits `ℓ(u) = L₀ + L_ρ u^ρ` to a univariate piece on a grid:
/// `L₀ = max |f″|` over points with `|f′| ≤ 1`, then
/// `L_ρ = 1.05 · max (|f″| − L₀)/|f′|^ρ`, clamped at zero.
pub fn fit_envelope(piece: &Piece, rho: f64, region: Sampling) -> Result<EnvelopeFit> {
    let pts = region.grid(ENVELOPE_SAMPLES);
    let mut l0: f64 = 0.0;
    for &x in &pts {
        if piece.d1(x).abs() <= 1.0 {
            l0 = l0.max(piece.d2(x).abs());
        }
    }
    let mut lrho: f64 = 0.0;
    for &x in &pts {
        let g = piece.d1(x).abs();
        if g > 0.0 && g.is_finite() {
            let excess = (piece.d2(x).abs() - l0) / g.powf(rho);
            if excess.is_finite() {
                lrho = lrho.max(excess);
            }
        }
    }
    let fit = EnvelopeFit {
        l0,
        lrho: 1.05 * lrho.max(0.0),
        rho,
        samples: pts.len(),
        region,
    };
    if fit.l0 == 0.0 && fit.lrho == 0.0 {
        return Err(Error::Profile(
            "envelope fit produced an identically zero profile".into(),
        ));
    }
    Ok(fit)
}

fn fitted(obj: &mut Objective, rho: f64) -> Result<()> {
    let fit = fit_envelope(obj.piece().expect("univariate"), rho, obj.sampling)?;
    obj.profile = EllFunction::power_law(fit.l0, fit.lrho, fit.rho)?;
    obj.envelope = Some(fit);
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::param(format!(
            "{name} must be finite and > 0, got {v}"
        )));
    }
    Ok(())
}

/// `f(x) = L‖x‖²/2`.
pub fn make_quadratic(l: f64, dim: usize) -> Result<Objective> {
    positive("L", l)?;
    if dim == 0 {
        return Err(Error::param("dim must be >= 1"));
    }
    Ok(Objective {
        id: "quadratic".into(),
        params: json!({"L": l, "dim": dim}),
        dim,
        kind: Kind::Quadratic { l },
        domain: DomainSpec::AllSpace,
        f_star: Some(0.0),
        x_star: Some(vec![0.0; dim]),
        minimizers: vec![],
        mu: Some(l),
        profile: EllFunction::constant(l)?,
        convexity: Convexity::StronglyConvex,
        bounded_below: true,
        closed: true,
        sampling: Sampling::Linear {
            lo: -10.0,
            hi: 10.0,
        },
        envelope: None,
        analytic_hessian: true,
    })
}

/// Univariate polynomial, coefficients in ascending order
/// (`[c₀, c₁, …, cₙ]` is `c₀ + c₁x + … + cₙxⁿ`).
///
/// The profile is `PowerLaw(L₀, L₁, 1)` fitted on `[−R, R]` with
/// `R = max(10, 2·(Cauchy root bound of f′))`.
pub fn make_polynomial(coeffs: &[f64]) -> Result<Objective> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::param("polynomial coefficients must be finite"));
    }
    let c = poly::trim(coeffs);
    let n = c.len() - 1;
    if n < 2 {
        return Err(Error::param(format!(
            "polynomial degree must be >= 2, got {n}"
        )));
    }
    if n % 2 == 1 || c[n] < 0.0 {
        return Err(Error::param(
            "polynomial must have even degree and positive leading coefficient to be bounded below",
        ));
    }
    let d1 = poly::derivative(&c);
    let d2 = poly::derivative(&d1);
    let d3 = poly::derivative(&d2);

    let crit = poly::real_roots(&d1);
    let f_star = crit
        .iter()
        .map(|&x| poly::eval(&c, x))
        .fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * (1.0 + f_star.abs());
    let minimizers: Vec<Vec<f64>> = crit
        .iter()
        .filter(|&&x| poly::eval(&c, x) - f_star <= tol)
        .map(|&x| vec![x])
        .collect();

    // convexity from the minimum of f''
    let min_d2 = if n == 2 {
        d2[0]
    } else {
        poly::real_roots(&d3)
            .iter()
            .map(|&x| poly::eval(&d2, x))
            .fold(f64::INFINITY, f64::min)
    };
    let (convexity, mu) = if min_d2 > 0.0 {
        (Convexity::StronglyConvex, Some(min_d2))
    } else if min_d2 >= -1e-12 {
        (Convexity::Convex, None)
    } else {
        (Convexity::Nonconvex, None)
    };

    let r = (2.0 * poly::root_bound(&d1)).max(10.0);
    let mut obj = Objective::univariate(
        "polynomial",
        json!({"coeffs": c}),
        Piece::Polynomial {
            coeffs: c.clone(),
            d1,
            d2,
            f_star: Some(f_star),
        },
        DomainSpec::AllSpace,
        EllFunction::constant(1.0)?,
    );
    obj.f_star = Some(f_star);
    obj.x_star = minimizers.first().cloned();
    obj.minimizers = minimizers;
    obj.convexity = convexity;
    obj.mu = mu;
    obj.sampling = Sampling::Linear { lo: -r, hi: r };
    fitted(&mut obj, 1.0)?;
    Ok(obj)
}

/// `(x² − 1)²`, a nonconvex double well with minimizers `±1`.
pub fn make_quartic_well() -> Result<Objective> {
    let mut obj = make_polynomial(&[1.0, 0.0, -2.0, 0.0, 1.0])?;
    obj.id = "quartic_well".into();
    obj.params = json!({});
    Ok(obj)
}

/// `f(x) = aˣ`, profile `PowerLaw(0, log a, 1)` (exact: `f″ = log(a)·f′`).
pub fn make_exponential(a: f64) -> Result<Objective> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::param(format!(
            "exponential base must be > 1, got {a}"
        )));
    }
    let mut obj = Objective::univariate(
        "exponential",
        json!({"a": a}),
        Piece::Exponential { a },
        DomainSpec::AllSpace,
        EllFunction::power_law(0.0, a.ln(), 1.0)?,
    );
    obj.f_star = Some(0.0);
    let s = 20.0 / a.ln();
    obj.sampling = Sampling::Linear { lo: -s, hi: s };
    Ok(obj)
}

/// `f(x) = a^(bˣ)`, profile `PowerLaw(L₀, L_α, α)` fitted on
/// `[−10, log_b(30/log a)]` (the upper end keeps `log(a)·bˣ ≤ 30`).
pub fn make_double_exponential(a: f64, b: f64, alpha: f64) -> Result<Objective> {
    if !(a > 1.0 && b > 1.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::param(format!(
            "a and b must be > 1, got a={a}, b={b}"
        )));
    }
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::param(format!(
            "double exponential needs alpha > 1 (rho = 1 does not bound its Hessian), got {alpha}"
        )));
    }
    let mut obj = Objective::univariate(
        "double_exponential",
        json!({"a": a, "b": b, "alpha": alpha}),
        Piece::DoubleExponential { a, b },
        DomainSpec::AllSpace,
        EllFunction::constant(1.0)?,
    );
    obj.f_star = Some(1.0);
    let hi = (30.0 / a.ln()).ln() / b.ln();
    obj.sampling = Sampling::Linear { lo: -10.0, hi };
    fitted(&mut obj, alpha)?;
    Ok(obj)
}

/// `f(x) = 1/x` on `(0, ∞)`, profile `PowerLaw(L₀, L₁.₅, 1.5)` fitted on
/// `[1e-2, 1e3]` (log-spaced).
pub fn make_rational_inverse() -> Result<Objective> {
    let mut obj = Objective::univariate(
        "rational_inverse",
        json!({}),
        Piece::RationalInverse,
        DomainSpec::OpenHalfline { lower: 0.0 },
        EllFunction::constant(1.0)?,
    );
    obj.f_star = Some(0.0);
    obj.sampling = Sampling::Log { lo: 1e-2, hi: 1e3 };
    fitted(&mut obj, 1.5)?;
    Ok(obj)
}

/// `f(x) = −log x` on `(0, ∞)`, profile `PowerLaw(0, 1, 2)` (exact). Not
/// bounded below.
pub fn make_logarithmic() -> Result<Objective> {
    let mut obj = Objective::univariate(
        "logarithmic",
        json!({}),
        Piece::Logarithmic,
        DomainSpec::OpenHalfline { lower: 0.0 },
        EllFunction::power_law(0.0, 1.0, 2.0)?,
    );
    obj.bounded_below = false;
    obj.sampling = Sampling::Log { lo: 1e-3, hi: 1e3 };
    Ok(obj)
}

/// `f(x) = xᵖ` with the exact profile `PowerLaw(0, |p(p−1)|/|p|^ρ, ρ)`,
/// `ρ = (p−2)/(p−1)`.
///
/// Integer `p ≥ 2` lives on all of space; everything else on `(0, ∞)`.
/// `p ∈ (1, 2)` gives `ρ < 0`, which no non-decreasing profile matches, and
/// is rejected along with `p = 0` and `p = 1`.
pub fn make_power(p: f64) -> Result<Objective> {
    if !p.is_finite() || p == 1.0 || p == 0.0 {
        return Err(Error::param(format!(
            "power p must be finite and not 0 or 1, got {p}"
        )));
    }
    if p > 1.0 && p < 2.0 {
        return Err(Error::param(format!(
            "power p = {p} gives rho = (p-2)/(p-1) < 0; no non-decreasing profile applies"
        )));
    }
    let rho = (p - 2.0) / (p - 1.0);
    let lrho = (p * (p - 1.0)).abs() / p.abs().powf(rho);
    let integer = p >= 2.0 && p.fract() == 0.0 && p <= i32::MAX as f64;
    let domain = if integer {
        DomainSpec::AllSpace
    } else {
        DomainSpec::OpenHalfline { lower: 0.0 }
    };
    let profile = if rho == 0.0 {
        EllFunction::constant(lrho)?
    } else {
        EllFunction::power_law(0.0, lrho, rho)?
    };
    let mut obj = Objective::univariate(
        "power",
        json!({"p": p}),
        Piece::Power { p, integer },
        domain,
        profile,
    );
    let even = integer && (p as i64) % 2 == 0;
    let odd = integer && !even;
    obj.bounded_below = !odd;
    obj.f_star = if odd { None } else { Some(0.0) };
    if even {
        obj.x_star = Some(vec![0.0]);
    }
    obj.convexity = if odd || (p > 0.0 && p < 1.0) {
        Convexity::Nonconvex
    } else if p == 2.0 {
        obj.mu = Some(2.0);
        Convexity::StronglyConvex
    } else {
        Convexity::Convex
    };
    obj.closed = integer || p < 0.0;
    obj.sampling = if integer {
        Sampling::Linear {
            lo: -10.0,
            hi: 10.0,
        }
    } else {
        Sampling::Log { lo: 1e-2, hi: 1e2 }
    };
    Ok(obj)
}

/// `f(x) = eˣ + e⁻ˣ`: `f″ = √(f′² + 4) ≤ |f′| + 2`, so `PowerLaw(2, 1, 1)`;
/// `μ = 2`, `f* = 2` at `x* = 0`.
pub fn make_cosh() -> Result<Objective> {
    let mut obj = Objective::univariate(
        "cosh",
        json!({}),
        Piece::Cosh,
        DomainSpec::AllSpace,
        EllFunction::power_law(2.0, 1.0, 1.0)?,
    );
    obj.f_star = Some(2.0);
    obj.x_star = Some(vec![0.0]);
    obj.mu = Some(2.0);
    obj.convexity = Convexity::StronglyConvex;
    obj.sampling = Sampling::Linear {
        lo: -20.0,
        hi: 20.0,
    };
    Ok(obj)
}

/// The scaled hard instance `g = f/L₂` with profile `PowerLaw(L₀, L₂, 2)`.
pub fn make_hard_instance(
    l0: f64,
    l2: f64,
    g0: f64,
    delta0: f64,
) -> Result<(HardInstance, Objective)> {
    let h = HardInstance::new(l0, l2, g0, delta0)?;
    let obj = hard_objective(&h)?;
    Ok((h, obj))
}

pub fn hard_objective(h: &HardInstance) -> Result<Objective> {
    let mut obj = Objective::univariate(
        "hard_instance",
        json!({"L0": h.l0, "L2": h.l2, "G0": h.g0, "Delta0": h.delta0}),
        Piece::Hard(Box::new(h.clone())),
        DomainSpec::AllSpace,
        EllFunction::power_law(h.l0, h.l2, 2.0)?,
    );
    obj.f_star = Some(h.g_star());
    obj.x_star = Some(vec![0.0]);
    obj.convexity = Convexity::Nonconvex;
    let r = 4.0 * h.y_fixed;
    obj.sampling = Sampling::Linear { lo: -r, hi: r };
    Ok(obj)
}

/// `Σᵢ h(xᵢ)` for a univariate objective `h`, in `dim` coordinates. The
/// profile carries over: the Hessian is diagonal and each `|h′(xᵢ)|` is at
/// most `‖∇f(x)‖`.
pub fn make_separable(base: &Objective, dim: usize) -> Result<Objective> {
    if dim == 0 {
        return Err(Error::param("dim must be >= 1"));
    }
    if base.dim != 1 {
        return Err(Error::param(
            "make_separable needs a univariate base objective",
        ));
    }
    let mut obj = base.clone();
    obj.dim = dim;
    obj.id = format!("{}_sum", base.id);
    obj.params = json!({"base": base.id, "base_params": base.params, "dim": dim});
    if let Kind::Quadratic { .. } = obj.kind {
        return make_quadratic(
            match base.kind {
                Kind::Quadratic { l } => l,
                _ => unreachable!(),
            },
            dim,
        );
    }
    obj.f_star = base.f_star.map(|f| f * dim as f64);
    obj.x_star = base.x_star.as_ref().map(|x| vec![x[0]; dim]);
    obj.minimizers = vec![];
    Ok(obj)
}

/// One objective per smoothness class, each with its stored profile.
pub fn catalog() -> Result<Vec<Objective>> {
    Ok(vec![
        make_quadratic(2.0, 1)?,
        make_polynomial(&[0.0, 0.0, 0.0, 0.0, 1.0])?,
        make_quartic_well()?,
        make_exponential(std::f64::consts::E)?,
        make_exponential(2.0)?,
        make_double_exponential(std::f64::consts::E, std::f64::consts::E, 1.5)?,
        make_rational_inverse()?,
        make_logarithmic()?,
        make_power(4.0)?,
        make_power(3.0)?,
        make_power(-1.0)?,
        make_power(2.5)?,
        make_cosh()?,
    ])
}

fn get_f64(params: &Value, key: &str) -> Result<Option<f64>> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| Error::Config(format!("parameter '{key}' must be a number"))),
    }
}

fn need_f64(params: &Value, key: &str, id: &str) -> Result<f64> {
    get_f64(params, key)?
        .ok_or_else(|| Error::Config(format!("objective '{id}' needs parameter '{key}'")))
}

fn check_keys(params: &Value, allowed: &[&str], id: &str) -> Result<()> {
    match params {
        Value::Null => Ok(()),
        Value::Object(m) => {
            for k in m.keys() {
                if !allowed.contains(&k.as_str()) {
                    return Err(Error::Config(format!(
                        "objective '{id}' has no parameter '{k}'"
                    )));
                }
            }
            Ok(())
        }
        _ => Err(Error::Config(format!(
            "parameters of '{id}' must be an object"
        ))),
    }
}

/// Looks up an objective by catalog id and parameter record, e.g.
/// `("power", {"p": 4})`. A `dim` parameter on a univariate objective builds
/// the separable sum.
pub fn from_spec(id: &str, params: &Value) -> Result<Objective> {
    let dim = get_f64(params, "dim")?.map(|d| d as usize);
    let base = match id {
        "quadratic" => {
            check_keys(params, &["L", "dim"], id)?;
            return make_quadratic(get_f64(params, "L")?.unwrap_or(1.0), dim.unwrap_or(1));
        }
        "polynomial" => {
            check_keys(params, &["coeffs", "dim"], id)?;
            let coeffs: Vec<f64> = params
                .get("coeffs")
                .and_then(|v| serde_json::from_value(v.clone()).ok())
                .ok_or_else(|| Error::Config("polynomial needs numeric 'coeffs'".into()))?;
            make_polynomial(&coeffs)?
        }
        "quartic_well" => {
            check_keys(params, &["dim"], id)?;
            make_quartic_well()?
        }
        "exponential" => {
            check_keys(params, &["a", "dim"], id)?;
            make_exponential(get_f64(params, "a")?.unwrap_or(std::f64::consts::E))?
        }
        "double_exponential" => {
            check_keys(params, &["a", "b", "alpha", "dim"], id)?;
            make_double_exponential(
                get_f64(params, "a")?.unwrap_or(std::f64::consts::E),
                get_f64(params, "b")?.unwrap_or(std::f64::consts::E),
                get_f64(params, "alpha")?.unwrap_or(1.5),
            )?
        }
        "rational_inverse" => {
            check_keys(params, &["dim"], id)?;
            make_rational_inverse()?
        }
        "logarithmic" => {
            check_keys(params, &["dim"], id)?;
            make_logarithmic()?
        }
        "power" => {
            check_keys(params, &["p", "dim"], id)?;
            make_power(need_f64(params, "p", id)?)?
        }
        "cosh" => {
            check_keys(params, &["dim"], id)?;
            make_cosh()?
        }
        "hard_instance" => {
            check_keys(params, &["L0", "L2", "G0", "Delta0"], id)?;
            make_hard_instance(
                need_f64(params, "L0", id)?,
                need_f64(params, "L2", id)?,
                need_f64(params, "G0", id)?,
                need_f64(params, "Delta0", id)?,
            )?
            .1
        }
        other => return Err(Error::Config(format!("unknown objective id '{other}'"))),
    };
    match dim {
        None | Some(1) => Ok(base),
        Some(d) => make_separable(&base, d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn quadratic_examples() {
        let q = make_quadratic(2.0, 1).unwrap();
        assert_eq!(q.value(&[1.0]).unwrap(), 1.0);
        assert_eq!(q.gradient(&[1.0]).unwrap(), vec![2.0]);
        assert_eq!(q.hessian_norm(&[1.0]).unwrap(), 2.0);
        assert_eq!(q.value(&[0.0]).unwrap(), 0.0);
        assert_eq!(q.value(&[3.0]).unwrap(), 9.0);
        assert_eq!(q.gradient(&[3.0]).unwrap(), vec![6.0]);
        assert!(q.profile.at(2.0) >= 2.0);
    }

    #[test]
    fn quartic_examples() {
        let f = make_polynomial(&[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(f.value(&[2.0]).unwrap(), 16.0);
        assert_eq!(f.gradient(&[2.0]).unwrap(), vec![32.0]);
        assert_eq!(f.hessian_norm(&[2.0]).unwrap(), 48.0);
        assert_eq!(f.convexity, Convexity::Convex);
        assert_eq!(f.f_star, Some(0.0));
        assert_eq!(f.x_star, Some(vec![0.0]));

        let w = make_quartic_well().unwrap();
        assert_eq!(w.convexity, Convexity::Nonconvex);
        assert!(w.f_star.unwrap().abs() < 1e-12);
        assert_eq!(w.minimizers.len(), 2);
        assert!(close(w.minimizers[0][0], -1.0, 1e-12) && close(w.minimizers[1][0], 1.0, 1e-12));
    }

    #[test]
    fn polynomial_rejections() {
        assert!(make_polynomial(&[1.0, 1.0]).is_err());
        assert!(make_polynomial(&[0.0, 0.0, 0.0, 1.0]).is_err());
        assert!(make_polynomial(&[0.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn exponential_examples() {
        let e = make_exponential(std::f64::consts::E).unwrap();
        assert!(close(e.value(&[0.0]).unwrap(), 1.0, 1e-15));
        assert!(close(e.gradient(&[0.0]).unwrap()[0], 1.0, 1e-15));
        assert!(close(e.hessian_norm(&[0.0]).unwrap(), 1.0, 1e-15));
        let g = e.gradient(&[2.0]).unwrap()[0];
        assert!(close(
            e.hessian_norm(&[2.0]).unwrap(),
            e.profile.at(g),
            1e-15
        ));
        assert!(e.x_star.is_none());
        let two = make_exponential(2.0).unwrap();
        assert!(close(
            two.gradient(&[1.0]).unwrap()[0],
            2.0 * 2f64.ln(),
            1e-15
        ));
        assert!(make_exponential(1.0).is_err());
    }

    #[test]
    fn double_exponential_examples() {
        let e = std::f64::consts::E;
        let d = make_double_exponential(e, e, 1.5).unwrap();
        assert!(close(d.value(&[0.0]).unwrap(), e, 1e-15));
        assert!(close(d.gradient(&[0.0]).unwrap()[0], e, 1e-15));
        assert!(close(d.hessian_norm(&[0.0]).unwrap(), 2.0 * e, 1e-15));
        let fit = d.envelope.as_ref().unwrap();
        assert!(fit.l0.is_finite() && fit.lrho.is_finite() && fit.lrho > 0.0);
        assert!(make_double_exponential(e, e, 1.0).is_err());
    }

    #[test]
    fn rational_inverse_examples() {
        let r = make_rational_inverse().unwrap();
        assert_eq!(r.value(&[1.0]).unwrap(), 1.0);
        assert_eq!(r.gradient(&[1.0]).unwrap(), vec![-1.0]);
        assert_eq!(r.hessian_norm(&[1.0]).unwrap(), 2.0);
        assert_eq!(r.hessian_norm(&[0.5]).unwrap(), 16.0);
        match r.value(&[-1.0]) {
            Err(Error::Domain { distance, .. }) => assert_eq!(distance, 1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn logarithmic_examples() {
        let l = make_logarithmic().unwrap();
        assert_eq!(l.value(&[1.0]).unwrap(), 0.0);
        assert_eq!(l.gradient(&[1.0]).unwrap(), vec![-1.0]);
        assert_eq!(l.hessian_norm(&[1.0]).unwrap(), 1.0);
        let h = l.hessian_norm(&[0.1]).unwrap();
        let g = l.gradient(&[0.1]).unwrap()[0];
        assert!(close(h, 100.0, 1e-13) && close(h, g * g, 1e-15));
        assert!(!l.bounded_below);
    }

    #[test]
    fn power_examples() {
        let p4 = make_power(4.0).unwrap();
        assert_eq!(p4.profile.rho(), Some(2.0 / 3.0));
        let p3 = make_power(3.0).unwrap();
        assert_eq!(p3.value(&[2.0]).unwrap(), 8.0);
        assert_eq!(p3.gradient(&[2.0]).unwrap(), vec![12.0]);
        assert_eq!(p3.hessian_norm(&[2.0]).unwrap(), 12.0);
        let pm1 = make_power(-1.0).unwrap();
        assert_eq!(pm1.profile.rho(), Some(1.5));
        assert!(make_power(1.0).is_err());
        assert!(make_power(1.5).is_err());
        assert_eq!(
            make_power(2.5).unwrap().domain,
            DomainSpec::OpenHalfline { lower: 0.0 }
        );
    }

    #[test]
    fn x4_profile_identity() {
        // |f''| = 12x^2 = (12/4^(2/3)) |4x^3|^(2/3)
        let p4 = make_power(4.0).unwrap();
        for x in [-3.0, -0.5, 0.1, 1.0, 7.0] {
            let g = p4.gradient(&[x]).unwrap()[0].abs();
            assert!(close(
                p4.hessian_norm(&[x]).unwrap(),
                p4.profile.at(g),
                1e-13
            ));
        }
    }

    #[test]
    fn cosh_examples() {
        let c = make_cosh().unwrap();
        assert_eq!(c.value(&[0.0]).unwrap(), 2.0);
        assert_eq!(c.gradient(&[0.0]).unwrap(), vec![0.0]);
        assert_eq!(c.hessian_norm(&[0.0]).unwrap(), 2.0);
        let e = std::f64::consts::E;
        assert!(close(c.gradient(&[1.0]).unwrap()[0], e - 1.0 / e, 1e-15));
        assert!(close(
            c.gap(&[1.0]).unwrap(),
            c.value(&[1.0]).unwrap() - 2.0,
            1e-14
        ));
    }

    #[test]
    fn fd_fallback_matches_analytic() {
        let e = make_exponential(std::f64::consts::E)
            .unwrap()
            .without_analytic_hessian();
        assert!((e.hessian_norm(&[0.0]).unwrap() - 1.0).abs() <= 1e-6);
        let q = make_separable(&make_cosh().unwrap(), 3).unwrap();
        let x = [0.3, -1.2, 2.0];
        let fd = q
            .clone()
            .without_analytic_hessian()
            .hessian_norm(&x)
            .unwrap();
        assert!(close(fd, q.hessian_norm(&x).unwrap(), 1e-6));
    }

    #[test]
    fn catalog_by_id() {
        let p = from_spec("power", &json!({"p": 4})).unwrap();
        assert_eq!(p.params["p"], json!(4.0));
        assert!(from_spec("power", &json!({"q": 4})).is_err());
        assert!(from_spec("nope", &json!({})).is_err());
        let s = from_spec("cosh", &json!({"dim": 3})).unwrap();
        assert_eq!(s.dim, 3);
        assert_eq!(s.f_star, Some(6.0));
        let q = from_spec("quadratic", &json!({"L": 2.0, "dim": 2})).unwrap();
        assert_eq!(q.value(&[1.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn hard_instance_objective() {
        let (h, g) = make_hard_instance(64.0, 1.0, 4.0, 24.0).unwrap();
        assert!(g.gradient(&[h.x0]).unwrap()[0] <= 4.0 + 1e-12);
        for x in [0.1, 0.3, 0.6, 1.2, 5.0] {
            assert_eq!(g.value(&[x]).unwrap(), g.value(&[-x]).unwrap());
        }
        let delta = g.gap(&[h.x0]).unwrap();
        assert!(delta > 0.0 && delta <= 24.0, "{delta}");
    }
}
