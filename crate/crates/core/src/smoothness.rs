//! Smoothness profiles `ℓ`, the `(r, ℓ)` conversion, effective constants and
//! the implicit `G ≥ Φ(G)` constraints.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{linear_fit, logspace};

/// Largest `G` the constraint solver will try before giving up.
pub const G_CAP: f64 = 1e30;
const G_FLOOR: f64 = 1e-12;
const BISECT_RTOL: f64 = 1e-12;

type EllFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied profile. `id` names the expression so the profile can be
/// written back to a config file.
#[derive(Clone)]
pub struct CustomEll {
    pub id: String,
    pub alpha: Option<f64>,
    f: EllFn,
}

/// The non-decreasing bound `ℓ` on the Hessian norm as a function of the
/// gradient norm.
#[derive(Clone)]
pub enum EllFunction {
    Constant { l: f64 },
    PowerLaw { l0: f64, lrho: f64, rho: f64 },
    Custom(CustomEll),
}

impl fmt::Debug for EllFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EllFunction::Constant { l } => write!(f, "Constant({l})"),
            EllFunction::PowerLaw { l0, lrho, rho } => write!(f, "PowerLaw({l0}, {lrho}, {rho})"),
            EllFunction::Custom(c) => write!(f, "Custom({}, alpha={:?})", c.id, c.alpha),
        }
    }
}

impl PartialEq for EllFunction {
    fn eq(&self, other: &Self) -> bool {
        use EllFunction::*;
        match (self, other) {
            (Constant { l: a }, Constant { l: b }) => a == b,
            (
                PowerLaw { l0, lrho, rho },
                PowerLaw {
                    l0: m0,
                    lrho: mr,
                    rho: r,
                },
            ) => l0 == m0 && lrho == mr && rho == r,
            (Custom(a), Custom(b)) => a.id == b.id && a.alpha == b.alpha,
            _ => false,
        }
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Profile(format!(
            "{name} must be finite and >= 0, got {v}"
        )));
    }
    Ok(())
}

impl EllFunction {
    pub fn constant(l: f64) -> Result<Self> {
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::Profile(format!(
                "constant L must be finite and > 0, got {l}"
            )));
        }
        Ok(EllFunction::Constant { l })
    }

    /// `ℓ(u) = L₀ + L_ρ·u^ρ`. `L₀ = 0` is accepted; such a profile vanishes
    /// only at `u = 0`.
    pub fn power_law(l0: f64, lrho: f64, rho: f64) -> Result<Self> {
        check_nonneg("L0", l0)?;
        check_nonneg("Lrho", lrho)?;
        check_nonneg("rho", rho)?;
        if l0 == 0.0 && lrho == 0.0 {
            return Err(Error::Profile("L0 and Lrho cannot both be zero".into()));
        }
        Ok(EllFunction::PowerLaw { l0, lrho, rho })
    }

    /// Wraps a closure. The closure is spot-checked for monotonicity and
    /// positivity on the standard grid before being accepted.
    pub fn custom<F>(id: impl Into<String>, alpha: Option<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if let Some(a) = alpha {
            check_nonneg("alpha", a)?;
        }
        let ell = EllFunction::Custom(CustomEll {
            id: id.into(),
            alpha,
            f: Arc::new(f),
        });
        check_monotone(&ell)?;
        Ok(ell)
    }

    /// Evaluation without input validation. Callers guarantee `u ≥ 0`.
    #[inline]
    pub fn at(&self, u: f64) -> f64 {
        match self {
            EllFunction::Constant { l } => *l,
            EllFunction::PowerLaw { l0, lrho, rho } => {
                if *rho == 0.0 {
                    l0 + lrho
                } else {
                    l0 + lrho * u.powf(*rho)
                }
            }
            EllFunction::Custom(c) => (c.f)(u),
        }
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        ell_eval(self, u)
    }

    /// `ρ` for power laws, `0` for constants, `None` for custom profiles.
    pub fn rho(&self) -> Option<f64> {
        match self {
            EllFunction::Constant { .. } => Some(0.0),
            EllFunction::PowerLaw { lrho, rho, .. } => Some(if *lrho == 0.0 { 0.0 } else { *rho }),
            EllFunction::Custom(_) => None,
        }
    }
}

pub fn ell_eval(ell: &EllFunction, u: f64) -> Result<f64> {
    if !u.is_finite() || u < 0.0 {
        return Err(Error::Domain {
            point: u,
            domain: "u >= 0, finite".into(),
            distance: if u.is_finite() { -u } else { f64::INFINITY },
        });
    }
    Ok(ell.at(u))
}

/// The monotonicity grid: `0` plus 255 log-spaced points on `[1e-8, 1e8]`.
pub fn monotone_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend(logspace(1e-8, 1e8, 255));
    g
}

/// Spot-checks that `ℓ` is finite, non-negative and non-decreasing on
/// [`monotone_grid`], and strictly positive away from zero.
pub fn check_monotone(ell: &EllFunction) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for u in monotone_grid() {
        let v = ell.at(u);
        if !v.is_finite() && v != f64::INFINITY {
            return Err(Error::Profile(format!("ℓ({u:e}) = {v} is not a number")));
        }
        if v < 0.0 || (u > 0.0 && v <= 0.0) {
            return Err(Error::Profile(format!("ℓ({u:e}) = {v} is not positive")));
        }
        if v < prev {
            return Err(Error::Profile(format!(
                "ℓ decreases at u = {u:e} ({prev} -> {v})"
            )));
        }
        prev = v;
    }
    Ok(())
}

/// The `(r, ℓ)` form of an `ℓ`-smooth function: `m(u) = ℓ(u + a)`,
/// `r(u) = a / m(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusProfile {
    pub source: EllFunction,
    pub shift_a: f64,
}

impl RadiusProfile {
    pub fn m(&self, u: f64) -> f64 {
        self.source.at(u + self.shift_a)
    }

    pub fn r(&self, u: f64) -> f64 {
        self.shift_a / self.m(u)
    }

    /// `m` as a standalone profile.
    pub fn m_profile(&self) -> EllFunction {
        let src = self.source.clone();
        let a = self.shift_a;
        let alpha = growth_degree(&self.source).ok();
        let id = match &self.source {
            EllFunction::Custom(c) => format!("{}+shift({a})", c.id),
            other => format!("{other:?}+shift({a})"),
        };
        EllFunction::Custom(CustomEll {
            id,
            alpha,
            f: Arc::new(move |u| src.at(u + a)),
        })
    }
}

pub fn to_radius_profile(ell: &EllFunction, a: f64) -> Result<RadiusProfile> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::param(format!(
            "shift a must be finite and > 0, got {a}"
        )));
    }
    Ok(RadiusProfile {
        source: ell.clone(),
        shift_a: a,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConstants {
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "rG")]
    pub r_g: f64,
}

/// `(G, ℓ(2G), G/ℓ(2G))`: the conversion with shift `a = G` evaluated at `G`.
pub fn effective_constants(ell: &EllFunction, g: f64) -> Result<EffectiveConstants> {
    if !g.is_finite() || g <= 0.0 {
        return Err(Error::param(format!("G must be finite and > 0, got {g}")));
    }
    let l = ell.at(2.0 * g);
    if !l.is_finite() || l <= 0.0 {
        return Err(Error::Profile(format!("ℓ(2G) = {l} at G = {g}")));
    }
    Ok(EffectiveConstants { g, l, r_g: g / l })
}

/// Growth exponent `α` with `ℓ(u) = O(u^α)`. Custom profiles without a
/// declared exponent get a log-log slope over `[1e3, 1e6]`.
pub fn growth_degree(ell: &EllFunction) -> Result<f64> {
    match ell {
        EllFunction::Constant { .. } => Ok(0.0),
        EllFunction::PowerLaw { lrho, rho, .. } => Ok(if *lrho == 0.0 { 0.0 } else { *rho }),
        EllFunction::Custom(c) => {
            if let Some(a) = c.alpha {
                return Ok(a);
            }
            let us = logspace(1e3, 1e6, 64);
            let vals: Vec<f64> = us.iter().map(|&u| (c.f)(u)).collect();
            if vals.windows(2).any(|w| w[1] < w[0]) || vals.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Profile(format!(
                    "custom profile {} is not positive and non-decreasing on [1e3, 1e6]",
                    c.id
                )));
            }
            let lx: Vec<f64> = us.iter().map(|u| u.ln()).collect();
            let ly: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
            Ok(linear_fit(&lx, &ly).0.max(0.0))
        }
    }
}

/// Which effective constant the nonconvex and stochastic constraints use.
///
/// `Radius` treats `ℓ` as the `m` of an `(r, ℓ)` pair and reads `L = ℓ(G)`.
/// `Hessian` treats `ℓ` as a Hessian bound and applies the conversion with
/// shift `a = G`, so `L = ℓ(2G)` and `r(G) = G/ℓ(2G)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileForm {
    Radius,
    Hessian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum GVariant {
    NonconvexGd,
    NagConvex {
        alpha: f64,
    },
    Sgd {
        delta: f64,
        epsilon: f64,
        sigma: f64,
    },
    NagStronglyConvex {
        mu: f64,
        alpha: f64,
    },
}

impl GVariant {
    pub fn name(&self) -> &'static str {
        match self {
            GVariant::NonconvexGd => "NonconvexGd",
            GVariant::NagConvex { .. } => "NagConvex",
            GVariant::Sgd { .. } => "Sgd",
            GVariant::NagStronglyConvex { .. } => "NagStronglyConvex",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GConstraint {
    pub variant: GVariant,
    pub delta0: f64,
    pub grad0: f64,
    pub dist0sq: f64,
    pub ell: EllFunction,
    pub form: ProfileForm,
}

impl GConstraint {
    pub fn new(variant: GVariant, delta0: f64, grad0: f64, dist0sq: f64, ell: EllFunction) -> Self {
        GConstraint {
            variant,
            delta0,
            grad0,
            dist0sq,
            ell,
            form: ProfileForm::Radius,
        }
    }

    pub fn with_form(mut self, form: ProfileForm) -> Self {
        self.form = form;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("Delta0", self.delta0),
            ("grad0", self.grad0),
            ("dist0sq", self.dist0sq),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        match self.variant {
            GVariant::NonconvexGd => {}
            GVariant::NagConvex { alpha } => check_alpha(alpha)?,
            GVariant::Sgd {
                delta,
                epsilon,
                sigma,
            } => {
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(Error::param(format!(
                        "delta must lie in (0, 1), got {delta}"
                    )));
                }
                if !(epsilon > 0.0) || !epsilon.is_finite() {
                    return Err(Error::param(format!("epsilon must be > 0, got {epsilon}")));
                }
                if !(sigma >= 0.0) || !sigma.is_finite() {
                    return Err(Error::param(format!("sigma must be >= 0, got {sigma}")));
                }
            }
            GVariant::NagStronglyConvex { mu, alpha } => {
                check_alpha(alpha)?;
                if !(mu > 0.0) || !mu.is_finite() {
                    return Err(Error::param(format!("mu must be > 0, got {mu}")));
                }
            }
        }
        Ok(())
    }

    fn ell_form(&self, g: f64) -> f64 {
        match self.form {
            ProfileForm::Radius => self.ell.at(g),
            ProfileForm::Hessian => self.ell.at(2.0 * g),
        }
    }

    /// The term of `Φ` that does not depend on `ℓ`.
    pub fn explicit_lower(&self) -> f64 {
        match self.variant {
            GVariant::NonconvexGd => 2.0 * self.grad0,
            GVariant::NagConvex { .. } | GVariant::NagStronglyConvex { .. } => self.grad0,
            GVariant::Sgd { sigma, .. } => (2.0 * self.grad0).max(sigma),
        }
    }

    /// Right-hand side `Φ(G)` of the constraint `G ≥ Φ(G)`.
    pub fn phi(&self, g: f64) -> f64 {
        let lower = self.explicit_lower();
        let implicit = match self.variant {
            GVariant::NonconvexGd => (32.0 * self.ell_form(g) * self.delta0).sqrt(),
            GVariant::NagConvex { alpha } => {
                let l = self.ell.at(2.0 * g);
                8.0 * alpha_factor(l, alpha) * (l * (self.delta0 + self.dist0sq)).sqrt()
            }
            GVariant::Sgd { delta, sigma, .. } => {
                40.0 * ((self.delta0 + 2.0 * sigma) * self.ell_form(g) / delta).sqrt()
            }
            GVariant::NagStronglyConvex { mu, alpha } => {
                let l = self.ell.at(2.0 * g);
                8.0 * alpha_factor(l, alpha)
                    * (l * (self.delta0 + mu * self.dist0sq) / mu.min(1.0)).sqrt()
            }
        };
        lower.max(implicit)
    }

    pub fn satisfied(&self, g: f64) -> bool {
        g >= self.phi(g)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::param(format!(
            "alpha must lie in (0, 2], got {alpha}"
        )));
    }
    Ok(())
}

/// `max{L^{1/α − 1/2}, 1}`
pub fn alpha_factor(l: f64, alpha: f64) -> f64 {
    l.powf(1.0 / alpha - 0.5).max(1.0)
}

/// Smallest `G` with `G ≥ Φ(G)`: doubling from the explicit lower term, then
/// bisection down to a relative width of `1e-12`.
pub fn solve_g(c: &GConstraint) -> Result<f64> {
    c.validate()?;
    let mut hi = c.explicit_lower().max(G_FLOOR);
    if c.satisfied(hi) {
        return Ok(hi);
    }
    let mut lo = hi;
    while !c.satisfied(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > G_CAP || !c.phi(hi).is_finite() {
            return Err(Error::NoFiniteG {
                variant: c.variant.name().into(),
                cap: G_CAP,
            });
        }
    }
    while hi - lo > BISECT_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if c.satisfied(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Named closed-form profiles usable as `expression` in a config record.
pub fn expression_profile(id: &str, alpha: Option<f64>) -> Result<EllFunction> {
    match id {
        "u_log1p_u" => EllFunction::custom(id, alpha, |u| u * (1.0 + u).ln()),
        "one_plus_u_log1p_u" => EllFunction::custom(id, alpha, |u| 1.0 + u * (1.0 + u).ln()),
        "one_plus_sqrt_u" => EllFunction::custom(id, alpha, |u| 1.0 + u.sqrt()),
        "exp_u" => EllFunction::custom(id, alpha, f64::exp),
        _ => Err(Error::Profile(format!("unknown profile expression '{id}'"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Constant,
    PowerLaw,
    Custom,
}

/// Config-file form of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileRecord {
    pub kind: ProfileKind,
    #[serde(rename = "L0", default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<f64>,
    #[serde(rename = "Lrho", default, skip_serializing_if = "Option::is_none")]
    pub lrho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl From<&EllFunction> for ProfileRecord {
    fn from(ell: &EllFunction) -> Self {
        let mut rec = ProfileRecord {
            kind: ProfileKind::Constant,
            l0: None,
            lrho: None,
            rho: None,
            l: None,
            expression: None,
            alpha: None,
        };
        match ell {
            EllFunction::Constant { l } => rec.l = Some(*l),
            EllFunction::PowerLaw { l0, lrho, rho } => {
                rec.kind = ProfileKind::PowerLaw;
                rec.l0 = Some(*l0);
                rec.lrho = Some(*lrho);
                rec.rho = Some(*rho);
            }
            EllFunction::Custom(c) => {
                rec.kind = ProfileKind::Custom;
                rec.expression = Some(c.id.clone());
                rec.alpha = c.alpha;
            }
        }
        rec
    }
}

impl TryFrom<ProfileRecord> for EllFunction {
    type Error = Error;

    fn try_from(rec: ProfileRecord) -> Result<Self> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("profile of kind {:?} needs '{name}'", rec.kind)))
        };
        match rec.kind {
            ProfileKind::Constant => EllFunction::constant(need(rec.l, "L")?),
            ProfileKind::PowerLaw => EllFunction::power_law(
                need(rec.l0, "L0")?,
                need(rec.lrho, "Lrho")?,
                need(rec.rho, "rho")?,
            ),
            ProfileKind::Custom => {
                let id = rec
                    .expression
                    .as_deref()
                    .ok_or_else(|| Error::Config("custom profile needs 'expression'".into()))?;
                expression_profile(id, rec.alpha)
            }
        }
    }
}

impl Serialize for EllFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProfileRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for EllFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = ProfileRecord::deserialize(d)?;
        EllFunction::try_from(rec).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(
            ell_eval(&EllFunction::constant(5.0).unwrap(), 100.0).unwrap(),
            5.0
        );
        let p = EllFunction::power_law(1.0, 2.0, 1.0).unwrap();
        assert_eq!(ell_eval(&p, 3.0).unwrap(), 7.0);
        let p = EllFunction::power_law(0.0, 1.0, 1.5).unwrap();
        assert_eq!(ell_eval(&p, 4.0).unwrap(), 8.0);
        assert!(matches!(ell_eval(&p, f64::NAN), Err(Error::Domain { .. })));
        assert!(matches!(ell_eval(&p, -1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn radius_profile_examples() {
        let c = EllFunction::constant(4.0).unwrap();
        let rp = to_radius_profile(&c, 1.0).unwrap();
        assert_eq!(rp.m(10.0), 4.0);
        assert_eq!(rp.r(10.0), 0.25);

        let lin = EllFunction::power_law(0.0, 1.0, 1.0).unwrap();
        let rp = to_radius_profile(&lin, 2.0).unwrap();
        assert_eq!(rp.r(2.0), 0.5);

        let p = EllFunction::power_law(1.0, 3.0, 1.7).unwrap();
        let g = 2.5;
        let rp = to_radius_profile(&p, g).unwrap();
        assert_eq!(rp.m(g), p.at(2.0 * g));
        assert!(to_radius_profile(&p, 0.0).is_err());
        assert_eq!(rp.m_profile().at(1.0), p.at(1.0 + g));
    }

    #[test]
    fn effective_constant_examples() {
        let e = effective_constants(&EllFunction::constant(3.0).unwrap(), 6.0).unwrap();
        assert_eq!((e.g, e.l, e.r_g), (6.0, 3.0, 2.0));
        let e = effective_constants(&EllFunction::power_law(0.0, 1.0, 1.0).unwrap(), 4.0).unwrap();
        assert_eq!((e.g, e.l, e.r_g), (4.0, 8.0, 0.5));
        let e = effective_constants(&EllFunction::power_law(1.0, 1.0, 2.0).unwrap(), 1.0).unwrap();
        assert_eq!((e.g, e.l, e.r_g), (1.0, 5.0, 0.2));
    }

    #[test]
    fn growth_degrees() {
        assert_eq!(
            growth_degree(&EllFunction::constant(1.0).unwrap()).unwrap(),
            0.0
        );
        let p = EllFunction::power_law(1.0, 1.0, 1.5).unwrap();
        assert_eq!(growth_degree(&p).unwrap(), 1.5);
        let c = expression_profile("u_log1p_u", None).unwrap();
        let a = growth_degree(&c).unwrap();
        assert!(a > 1.0 && a < 1.2, "{a}");
    }

    #[test]
    fn custom_rejects_decreasing() {
        let r = EllFunction::custom("bad", None, |u| 1.0 / (1.0 + u));
        assert!(matches!(r, Err(Error::Profile(_))));
    }

    #[test]
    fn solve_g_examples() {
        let c = GConstraint::new(
            GVariant::NonconvexGd,
            1.0,
            1.0,
            0.0,
            EllFunction::constant(2.0).unwrap(),
        );
        assert!(rel(solve_g(&c).unwrap(), 8.0) < 1e-9);

        let c = GConstraint::new(
            GVariant::NonconvexGd,
            1.0,
            1.0,
            0.0,
            EllFunction::power_law(0.0, 1.0, 1.0).unwrap(),
        );
        assert!(rel(solve_g(&c).unwrap(), 32.0) < 1e-9);

        let c = GConstraint::new(
            GVariant::NonconvexGd,
            1.0,
            1.0,
            0.0,
            EllFunction::power_law(0.0, 1.0, 2.0).unwrap(),
        );
        assert!(matches!(solve_g(&c), Err(Error::NoFiniteG { .. })));
    }

    #[test]
    fn hessian_form_doubles_argument() {
        // G >= sqrt(32 * 2G) -> G = 64
        let c = GConstraint::new(
            GVariant::NonconvexGd,
            1.0,
            1.0,
            0.0,
            EllFunction::power_law(0.0, 1.0, 1.0).unwrap(),
        )
        .with_form(ProfileForm::Hessian);
        assert!(rel(solve_g(&c).unwrap(), 64.0) < 1e-9);
    }

    #[test]
    fn sgd_and_nag_closed_forms() {
        let c = GConstraint::new(
            GVariant::Sgd {
                delta: 0.5,
                epsilon: 0.1,
                sigma: 1.0,
            },
            1.0,
            1.0,
            0.0,
            EllFunction::constant(1.0).unwrap(),
        );
        assert!(rel(solve_g(&c).unwrap(), 40.0 * 6f64.sqrt()) < 1e-9);

        let c = GConstraint::new(
            GVariant::NagConvex { alpha: 2.0 },
            0.5,
            1.0,
            1.0,
            EllFunction::constant(1.0).unwrap(),
        );
        assert!(rel(solve_g(&c).unwrap(), 8.0 * 1.5f64.sqrt()) < 1e-9);
    }

    #[test]
    fn validation() {
        let ell = EllFunction::constant(1.0).unwrap();
        let bad = GConstraint::new(
            GVariant::Sgd {
                delta: 1.0,
                epsilon: 0.1,
                sigma: 1.0,
            },
            1.0,
            1.0,
            0.0,
            ell.clone(),
        );
        assert!(matches!(solve_g(&bad), Err(Error::Parameter(_))));
        let bad = GConstraint::new(GVariant::NonconvexGd, f64::INFINITY, 1.0, 0.0, ell);
        assert!(solve_g(&bad).is_err());
    }

    #[test]
    fn profile_record_round_trip() {
        for ell in [
            EllFunction::constant(2.0).unwrap(),
            EllFunction::power_law(1.0, 0.5, 1.5).unwrap(),
            expression_profile("u_log1p_u", Some(1.1)).unwrap(),
        ] {
            let s = serde_json::to_string(&ell).unwrap();
            let back: EllFunction = serde_json::from_str(&s).unwrap();
            assert_eq!(back, ell);
        }
        let r: std::result::Result<EllFunction, _> =
            serde_json::from_str(r#"{"kind":"power_law","L0":1,"Lrho":1,"rho":1,"bogus":2}"#);
        assert!(r.is_err());
    }
}
