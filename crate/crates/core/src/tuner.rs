//! Stepsizes and horizons prescribed by the convergence theorems.
//!
//! Every `tune_*` sets `η` equal to its ceiling. Profiles are Hessian
//! bounds; where a theorem is stated for the `(r, ℓ)` form, the conversion
//! with shift `a = G` is applied, so the effective constant is `L = ℓ(2G)`
//! and `r(G) = G/ℓ(2G)`. The unshifted `ℓ(G)` is reported as `l_raw`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::objectives::Objective;
use crate::smoothness::{
    effective_constants, growth_degree, solve_g, GConstraint, GVariant, ProfileForm,
};

const G_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GdConvex,
    GdStronglyConvex,
    GdNonconvex,
    NagConvex,
    NagStronglyConvex,
    Sgd,
}

impl Method {
    pub fn all() -> [Method; 6] {
        [
            Method::GdConvex,
            Method::GdStronglyConvex,
            Method::GdNonconvex,
            Method::NagConvex,
            Method::NagStronglyConvex,
            Method::Sgd,
        ]
    }
}

/// Problem data the constants were derived from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TuneInputs {
    #[serde(rename = "Delta0", default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    pub grad0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist0sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedParams {
    pub method: Method,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "rG")]
    pub r_g: f64,
    pub eta: f64,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// `L/μ` for the strongly convex methods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// `ℓ(G)` without the shift, reported next to `L = ℓ(2G)` for the
    /// methods stated in `(r, ℓ)` form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_raw: Option<f64>,
    pub inputs: TuneInputs,
}

impl TunedParams {
    /// The terms whose minimum defines `η`.
    pub fn ceiling_terms(&self) -> Vec<f64> {
        let (g, l, r) = (self.g, self.l, self.r_g);
        match self.method {
            Method::GdConvex | Method::GdStronglyConvex => vec![1.0 / l, r / (2.0 * g)],
            Method::GdNonconvex => vec![r / g, 1.0 / (4.0 * l)],
            Method::NagConvex => {
                let a = self.inputs.alpha.unwrap_or(2.0);
                vec![1.0 / (16.0 * l.powf(3.0 - 2.0 / a)), 1.0 / (2.0 * l)]
            }
            Method::NagStronglyConvex => {
                let a = self.inputs.alpha.unwrap_or(2.0);
                let mu = self.inputs.mu.unwrap_or(f64::NAN);
                vec![nag_sc_first_term(l, a, mu), 1.0 / (2.0 * l)]
            }
            Method::Sgd => {
                let delta = self.inputs.delta.unwrap_or(f64::NAN);
                let eps = self.inputs.epsilon.unwrap_or(f64::NAN);
                let sigma = self.inputs.sigma.unwrap_or(0.0);
                let d0 = self.inputs.delta0.unwrap_or(f64::NAN);
                let c = self.c.unwrap_or(f64::NAN);
                vec![
                    delta / (160.0 * l),
                    r / (2.0 * g),
                    delta * eps * eps / (8.0 * c * (d0 + 2.0 * sigma)),
                ]
            }
        }
    }

    /// The threshold on `‖ε_t‖` used by the SGD stopping time `τ₂`:
    /// `min{r(G), G/L}/(10η)`.
    pub fn noise_threshold(&self) -> f64 {
        self.r_g.min(self.g / self.l) / (10.0 * self.eta)
    }
}

fn nag_sc_first_term(l: f64, alpha: f64, mu: f64) -> f64 {
    let k = 144.0 * l.powf(3.0 - 2.0 / alpha);
    1.0 / (k * (std::f64::consts::E + k / mu).ln().powi(4))
}

fn start(obj: &Objective, x0: &[f64]) -> Result<(f64, TuneInputs)> {
    let g = obj.gradient(x0)?;
    let grad0 = norm(&g);
    if !grad0.is_finite() {
        return Err(Error::param("gradient at x0 is not finite"));
    }
    let inputs = TuneInputs {
        delta0: if obj.f_star.is_some() {
            Some(obj.gap(x0)?)
        } else {
            None
        },
        grad0,
        dist0sq: obj.dist_sq_to_opt(x0),
        ..Default::default()
    };
    Ok((grad0, inputs))
}

fn need_convex(obj: &Objective, method: &str) -> Result<()> {
    if !obj.convexity.is_convex() {
        return Err(Error::MethodMismatch(format!(
            "{method} needs a convex objective; {} is nonconvex",
            obj.id
        )));
    }
    Ok(())
}

fn need_bounded(obj: &Objective) -> Result<f64> {
    if !obj.bounded_below {
        return Err(Error::MissingData(format!(
            "{} is not bounded below",
            obj.id
        )));
    }
    obj.f_star
        .ok_or_else(|| Error::MissingData(format!("{} has no known f*", obj.id)))
}

/// Convex GD: `G = ‖∇f(x₀)‖`, `η = min{1/L, r(G)/(2G)}`.
pub fn tune_gd_convex(obj: &Objective, x0: &[f64]) -> Result<TunedParams> {
    need_convex(obj, "gd_convex")?;
    let (grad0, inputs) = start(obj, x0)?;
    let ec = effective_constants(&obj.profile, grad0.max(G_FLOOR))?;
    Ok(TunedParams {
        method: Method::GdConvex,
        g: ec.g,
        l: ec.l,
        r_g: ec.r_g,
        eta: (1.0 / ec.l).min(ec.r_g / (2.0 * ec.g)),
        t: None,
        c: None,
        kappa: None,
        l_raw: None,
        inputs,
    })
}

/// Strongly convex GD: same stepsize as the convex case, plus `κ = L/μ`.
pub fn tune_gd_strongly_convex(obj: &Objective, x0: &[f64], mu: f64) -> Result<TunedParams> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::param(format!("mu must be > 0, got {mu}")));
    }
    match obj.mu {
        Some(m) if m >= mu => {}
        _ => {
            return Err(Error::MethodMismatch(format!(
                "{} is not known to be {mu}-strongly convex",
                obj.id
            )))
        }
    }
    let mut p = tune_gd_convex(obj, x0)?;
    p.method = Method::GdStronglyConvex;
    p.kappa = Some(p.l / mu);
    p.inputs.mu = Some(mu);
    Ok(p)
}

/// Nonconvex GD: `G` from `G ≥ max{√(32ℓ(2G)Δ₀), 2‖∇f(x₀)‖}`,
/// `η = min{r(G)/G, 1/(4L)}`.
pub fn tune_gd_nonconvex(obj: &Objective, x0: &[f64]) -> Result<TunedParams> {
    need_bounded(obj)?;
    let (grad0, inputs) = start(obj, x0)?;
    let c = GConstraint::new(
        GVariant::NonconvexGd,
        inputs.delta0.unwrap(),
        grad0,
        0.0,
        obj.profile.clone(),
    )
    .with_form(ProfileForm::Hessian);
    let g = solve_g(&c)?;
    let ec = effective_constants(&obj.profile, g)?;
    Ok(TunedParams {
        method: Method::GdNonconvex,
        g,
        l: ec.l,
        r_g: ec.r_g,
        eta: (ec.r_g / g).min(1.0 / (4.0 * ec.l)),
        t: None,
        c: None,
        kappa: None,
        l_raw: Some(obj.profile.at(g)),
        inputs,
    })
}

/// Default `α` for the accelerated methods: the smallest of `{1, 1.5, 2}`
/// strictly above the profile's growth degree.
pub fn default_alpha(obj: &Objective) -> Result<f64> {
    let d = growth_degree(&obj.profile)?;
    [1.0, 1.5, 2.0]
        .into_iter()
        .find(|&a| a > d)
        .ok_or_else(|| Error::param(format!("profile growth degree {d} is not below 2")))
}

fn resolve_alpha(obj: &Objective, alpha: Option<f64>) -> Result<f64> {
    match alpha {
        None => default_alpha(obj),
        Some(a) => {
            if !(a > 0.0 && a <= 2.0) {
                return Err(Error::param(format!("alpha must lie in (0, 2], got {a}")));
            }
            let d = growth_degree(&obj.profile)?;
            if d > a {
                return Err(Error::param(format!(
                    "profile growth degree {d} exceeds alpha = {a}"
                )));
            }
            Ok(a)
        }
    }
}

fn need_optimum(obj: &Objective, inputs: &TuneInputs) -> Result<(f64, f64)> {
    need_bounded(obj)?;
    let d = inputs
        .dist0sq
        .ok_or_else(|| Error::MissingData(format!("{} has no known minimizer", obj.id)))?;
    Ok((inputs.delta0.unwrap(), d))
}

/// Convex NAG: `G` from
/// `G ≥ max{8·max{L^{1/α−1/2}, 1}·√(L(Δ₀ + ‖x₀−x*‖²)), ‖∇f(x₀)‖}` with
/// `L = ℓ(2G)`, and `η = min{1/(16L^{3−2/α}), 1/(2L)}`.
pub fn tune_nag(obj: &Objective, x0: &[f64], alpha: Option<f64>) -> Result<TunedParams> {
    need_convex(obj, "nag")?;
    let alpha = resolve_alpha(obj, alpha)?;
    let (grad0, mut inputs) = start(obj, x0)?;
    let (d0, dist0sq) = need_optimum(obj, &inputs)?;
    inputs.alpha = Some(alpha);
    let c = GConstraint::new(
        GVariant::NagConvex { alpha },
        d0,
        grad0,
        dist0sq,
        obj.profile.clone(),
    );
    let g = solve_g(&c)?;
    let ec = effective_constants(&obj.profile, g)?;
    let l = ec.l;
    Ok(TunedParams {
        method: Method::NagConvex,
        g,
        l,
        r_g: ec.r_g,
        eta: (1.0 / (16.0 * l.powf(3.0 - 2.0 / alpha))).min(1.0 / (2.0 * l)),
        t: None,
        c: None,
        kappa: None,
        l_raw: None,
        inputs,
    })
}

/// Strongly convex NAG: `G` from the strongly convex constraint and
/// `η = min{1/(144L^{3−2/α}·log⁴(e + 144L^{3−2/α}/μ)), 1/(2L)}`.
pub fn tune_nag_sc(
    obj: &Objective,
    x0: &[f64],
    mu: f64,
    alpha: Option<f64>,
) -> Result<TunedParams> {
    need_convex(obj, "nag_sc")?;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::param(format!("mu must be > 0, got {mu}")));
    }
    if obj.mu.is_some_and(|m| m < mu) {
        return Err(Error::param(format!(
            "mu = {mu} exceeds the objective's modulus {}",
            obj.mu.unwrap()
        )));
    }
    let alpha = resolve_alpha(obj, alpha)?;
    let (grad0, mut inputs) = start(obj, x0)?;
    let (d0, dist0sq) = need_optimum(obj, &inputs)?;
    inputs.alpha = Some(alpha);
    inputs.mu = Some(mu);
    let c = GConstraint::new(
        GVariant::NagStronglyConvex { mu, alpha },
        d0,
        grad0,
        dist0sq,
        obj.profile.clone(),
    );
    let g = solve_g(&c)?;
    let ec = effective_constants(&obj.profile, g)?;
    let l = ec.l;
    let eta = nag_sc_first_term(l, alpha, mu).min(1.0 / (2.0 * l));
    if eta * mu >= 1.0 {
        return Err(Error::param(format!(
            "tuned eta*mu = {} is not below 1",
            eta * mu
        )));
    }
    Ok(TunedParams {
        method: Method::NagStronglyConvex,
        g,
        l,
        r_g: ec.r_g,
        eta,
        t: None,
        c: None,
        kappa: Some(l / mu),
        l_raw: None,
        inputs,
    })
}

/// SGD: `G` from `G ≥ max{40√((Δ₀+2σ)ℓ(2G)/δ), 2‖∇f(x₀)‖, σ}`,
/// `C = max{G², 400σ²/(r(G)²δ)}`,
/// `η = min{δ/(160L), r(G)/(2G), δε²/(8C(Δ₀+2σ))}`, `T = ⌈1/(Cη²)⌉`.
pub fn tune_sgd(
    obj: &Objective,
    x0: &[f64],
    sigma: f64,
    delta: f64,
    epsilon: f64,
) -> Result<TunedParams> {
    need_bounded(obj)?;
    let (grad0, mut inputs) = start(obj, x0)?;
    let d0 = inputs.delta0.unwrap();
    inputs.sigma = Some(sigma);
    inputs.delta = Some(delta);
    inputs.epsilon = Some(epsilon);
    let c = GConstraint::new(
        GVariant::Sgd {
            delta,
            epsilon,
            sigma,
        },
        d0,
        grad0,
        0.0,
        obj.profile.clone(),
    )
    .with_form(ProfileForm::Hessian);
    let g = solve_g(&c)?;
    let ec = effective_constants(&obj.profile, g)?;
    let (l, r) = (ec.l, ec.r_g);
    let cc = (g * g).max(400.0 * sigma * sigma / (r * r * delta));
    let eta = (delta / (160.0 * l))
        .min(r / (2.0 * g))
        .min(delta * epsilon * epsilon / (8.0 * cc * (d0 + 2.0 * sigma)));
    let t = (1.0 / (cc * eta * eta)).ceil();
    Ok(TunedParams {
        method: Method::Sgd,
        g,
        l,
        r_g: r,
        eta,
        t: Some(if t >= u64::MAX as f64 {
            u64::MAX
        } else {
            t as u64
        }),
        c: Some(cc),
        kappa: None,
        l_raw: Some(obj.profile.at(g)),
        inputs,
    })
}

/// Dispatches on `method` with default `α` and the objective's own `μ`.
pub fn tune(
    method: Method,
    obj: &Objective,
    x0: &[f64],
    sgd: Option<(f64, f64, f64)>,
    alpha: Option<f64>,
    mu: Option<f64>,
) -> Result<TunedParams> {
    let mu_or = || {
        mu.or(obj.mu).ok_or_else(|| {
            Error::MissingData(format!("{} has no strong convexity modulus", obj.id))
        })
    };
    match method {
        Method::GdConvex => tune_gd_convex(obj, x0),
        Method::GdStronglyConvex => tune_gd_strongly_convex(obj, x0, mu_or()?),
        Method::GdNonconvex => tune_gd_nonconvex(obj, x0),
        Method::NagConvex => tune_nag(obj, x0, alpha),
        Method::NagStronglyConvex => tune_nag_sc(obj, x0, mu_or()?, alpha),
        Method::Sgd => {
            let (sigma, delta, eps) = sgd.ok_or_else(|| {
                Error::MissingData("sgd tuning needs sigma, delta, epsilon".into())
            })?;
            tune_sgd(obj, x0, sigma, delta, eps)
        }
    }
}

fn need(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::MissingData(format!("bound needs {what}")))
}

/// Right-hand side of the matching theorem at iteration `t`.
///
/// | method | bound |
/// |---|---|
/// | GdConvex | `‖x₀−x*‖²/(2ηt)` |
/// | GdStronglyConvex | `μ(1−ημ)^t‖x₀−x*‖² / (2(1−(1−ημ)^t))` |
/// | GdNonconvex | `2Δ₀/(ηt)` on the running mean of `‖∇f‖²` |
/// | NagConvex | `(4Δ₀ + 4‖x₀−x*‖²)/(ηt² + 4)` |
/// | NagStronglyConvex | `(1−√(ημ))^{t−1}(Δ₀+μ‖x₀−x*‖²)/(ημ + (1−√(ημ))^{t−1})` |
/// | Sgd | `2Δ₀/(ηt) + ηLσ²` on the running mean of `‖∇f‖²` (in expectation, while gradients stay below `G`) |
pub fn predict_bound(p: &TunedParams, t: u64) -> Result<f64> {
    let eta = p.eta;
    let tf = t as f64;
    let zero_t = || Error::param(format!("{:?} bound is undefined at t = 0", p.method));
    match p.method {
        Method::GdConvex => {
            if t == 0 {
                return Err(zero_t());
            }
            Ok(need(p.inputs.dist0sq, "dist0sq")? / (2.0 * eta * tf))
        }
        Method::GdStronglyConvex => {
            if t == 0 {
                return Err(zero_t());
            }
            let mu = need(p.inputs.mu, "mu")?;
            let d = need(p.inputs.dist0sq, "dist0sq")?;
            let q = (1.0 - eta * mu).powf(tf);
            Ok(mu * q * d / (2.0 * (1.0 - q)))
        }
        Method::GdNonconvex => {
            if t == 0 {
                return Err(zero_t());
            }
            Ok(2.0 * need(p.inputs.delta0, "Delta0")? / (eta * tf))
        }
        Method::NagConvex => {
            let d0 = need(p.inputs.delta0, "Delta0")?;
            let d = need(p.inputs.dist0sq, "dist0sq")?;
            Ok((4.0 * d0 + 4.0 * d) / (eta * tf * tf + 4.0))
        }
        Method::NagStronglyConvex => {
            if t == 0 {
                return Err(zero_t());
            }
            let mu = need(p.inputs.mu, "mu")?;
            let d0 = need(p.inputs.delta0, "Delta0")?;
            let d = need(p.inputs.dist0sq, "dist0sq")?;
            let q = (1.0 - (eta * mu).sqrt()).powf(tf - 1.0);
            Ok(q * (d0 + mu * d) / (eta * mu + q))
        }
        Method::Sgd => {
            if t == 0 {
                return Err(zero_t());
            }
            let d0 = need(p.inputs.delta0, "Delta0")?;
            let sigma = p.inputs.sigma.unwrap_or(0.0);
            Ok(2.0 * d0 / (eta * tf) + eta * p.l * sigma * sigma)
        }
    }
}
