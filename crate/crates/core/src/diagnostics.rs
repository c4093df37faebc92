//! Proof-level invariants checked on recorded trajectories, plus numerical
//! certification of smoothness profiles.
//!
//! Every check is a pure function of its inputs; sampling-based checks take
//! an explicit seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, dot, linear_fit, norm};
use crate::objectives::{Objective, Sampling};
use crate::smoothness::EllFunction;
use crate::solvers::Trajectory;
use crate::tuner::{predict_bound, Method, TunedParams};

/// Outcome of one named check. `worst_margin` is the smallest
/// `allowed − observed` seen; a check passes when no item falls below its
/// slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub worst_margin: Option<f64>,
    /// Step of the worst item (trajectory checks).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    /// Point of the worst item (sampling checks).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    pub checked: usize,
    pub violations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

struct Tally {
    check: Check,
}

impl Tally {
    fn new(name: &str) -> Self {
        Tally {
            check: Check {
                name: name.into(),
                pass: true,
                worst_margin: None,
                t: None,
                x: None,
                checked: 0,
                violations: 0,
                note: None,
            },
        }
    }

    /// Records `allowed − observed = margin`; a violation when
    /// `margin < −slack` (NaN counts as a violation).
    fn add(&mut self, margin: f64, slack: f64, t: Option<usize>, x: Option<&[f64]>) -> bool {
        let c = &mut self.check;
        c.checked += 1;
        let bad = !(margin >= -slack);
        if bad {
            c.violations += 1;
            c.pass = false;
        }
        let worse = match c.worst_margin {
            None => true,
            Some(w) => margin.is_nan() || margin < w,
        };
        if worse && !c.worst_margin.is_some_and(f64::is_nan) {
            c.worst_margin = Some(margin);
            c.t = t;
            c.x = x.map(|v| v.to_vec());
        }
        bad
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.check.note = Some(s.into());
        self
    }

    fn done(self) -> Check {
        self.check
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FittedRate {
    Power {
        slope: f64,
        intercept: f64,
        r_squared: f64,
    },
    Linear {
        linear_rate: f64,
        intercept: f64,
        r_squared: f64,
    },
}

impl FittedRate {
    /// The slope in power mode, the per-step log-rate in linear mode.
    pub fn rate(&self) -> f64 {
        match self {
            FittedRate::Power { slope, .. } => *slope,
            FittedRate::Linear { linear_rate, .. } => *linear_rate,
        }
    }

    pub fn r_squared(&self) -> f64 {
        match self {
            FittedRate::Power { r_squared, .. } | FittedRate::Linear { r_squared, .. } => {
                *r_squared
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_half: Option<usize>,
    #[serde(rename = "S_uc", default, skip_serializing_if = "Option::is_none")]
    pub s_uc: Option<f64>,
    #[serde(rename = "S_rect", default, skip_serializing_if = "Option::is_none")]
    pub s_rect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_rate: Option<FittedRate>,
}

impl DiagnosticsReport {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn absorb_gradient_bound(&mut self, g: &GradientBound) {
        self.tau = g.tau;
        self.tau_half = g.tau_half;
        self.s_uc = g.s_uc;
        self.s_rect = g.s_rect;
        self.push(g.check.clone());
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Report(e.to_string()))
    }

    /// Fixed-width table, one line per check.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<28} {:<5} {:>14} {:>8} {:>10}\n",
            "check", "pass", "worst margin", "where", "violations"
        );
        for c in &self.checks {
            let at = match (&c.t, &c.x) {
                (Some(t), _) => format!("t={t}"),
                (None, Some(x)) if x.len() == 1 => format!("x={:.3e}", x[0]),
                (None, Some(_)) => "x".into(),
                _ => "-".into(),
            };
            let m = c
                .worst_margin
                .map(|m| format!("{m:.4e}"))
                .unwrap_or_else(|| "-".into());
            s.push_str(&format!(
                "{:<28} {:<5} {:>14} {:>8} {:>10}\n",
                c.name,
                if c.pass { "ok" } else { "FAIL" },
                m,
                at,
                c.violations
            ));
        }
        s
    }
}

/// The stopping-time skeleton of the nonconvex GD argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBound {
    pub tau: Option<usize>,
    pub tau_half: Option<usize>,
    #[serde(rename = "S_uc")]
    pub s_uc: Option<f64>,
    #[serde(rename = "S_rect")]
    pub s_rect: Option<f64>,
    pub pass: bool,
    pub check: Check,
}

/// `τ` is the first recorded step with `‖∇f(x_t)‖ > G`, `τ½` the last step
/// before it with `‖∇f(x_t)‖ ≤ G/2` (absent when there is none),
/// `S_uc = Σ_{t<τ} ‖∇f(x_t)‖²` (the full sum when `τ` is absent) and
/// `S_rect = (G/2)²(τ − τ½ − 1)`.
pub fn check_gradient_bound(traj: &Trajectory, g: f64) -> GradientBound {
    let mut tally = Tally::new("gradient_bound");
    let mut tau = None;
    for r in &traj.records {
        tally.add(g - r.grad_norm, 0.0, Some(r.t), None);
        if tau.is_none() && r.grad_norm > g {
            tau = Some(r.t);
        }
    }
    let (tau_half, s_uc, s_rect) = match tau {
        Some(tau) => {
            let rec = traj.record_at(tau).expect("tau is a recorded step");
            let half = traj
                .records
                .iter()
                .rev()
                .find(|r| r.t < tau && r.grad_norm <= g / 2.0)
                .map(|r| r.t);
            let rect = half.map(|h| (g / 2.0).powi(2) * (tau - h - 1) as f64);
            (half, rec.grad_sq_sum, rect)
        }
        None => {
            let last = traj.last();
            (
                None,
                last.grad_sq_sum + last.grad_norm * last.grad_norm,
                None,
            )
        }
    };
    GradientBound {
        tau,
        tau_half,
        s_uc: Some(s_uc),
        s_rect,
        pass: tau.is_none(),
        check: tally.done(),
    }
}

/// `f(x_{t+1}) − f(x_t) ≤ −(η/2)‖∇f(x_t)‖²` on every consecutive pair of
/// records, additive slack `1e-10(1 + |f(x_t)|)`.
pub fn check_descent(traj: &Trajectory, eta: f64, l: f64) -> Check {
    let mut tally = Tally::new("descent");
    for w in traj.records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.t != a.t + 1 {
            continue;
        }
        let allowed = -0.5 * eta * a.grad_norm * a.grad_norm;
        let observed = b.f - a.f;
        tally.add(
            allowed - observed,
            1e-10 * (1.0 + a.f.abs()),
            Some(a.t),
            None,
        );
    }
    if eta * l > 1.0 {
        tally = tally.note(format!(
            "eta*L = {} exceeds 1; descent is not guaranteed",
            eta * l
        ));
    }
    if tally.check.checked == 0 {
        tally = tally.note("no consecutive records (stride > 1)");
    }
    tally.done()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    GdConvex,
    GdStronglyConvex { mu: f64 },
    Nag,
    NagSc { mu: f64 },
}

impl PotentialKind {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialKind::GdConvex => "potential_gd_convex",
            PotentialKind::GdStronglyConvex { .. } => "potential_gd_strongly_convex",
            PotentialKind::Nag => "potential_nag",
            PotentialKind::NagSc { .. } => "potential_nag_sc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSeries {
    pub kind: PotentialKind,
    /// `(t, Φ_t)` for every record.
    pub values: Vec<(usize, f64)>,
    pub check: Check,
}

impl PotentialSeries {
    pub fn monotone(&self) -> bool {
        self.check.pass
    }

    pub fn raw(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.1).collect()
    }
}

fn reference_point(obj: &Objective, x0: &[f64]) -> Result<Vec<f64>> {
    if let Some(x) = &obj.x_star {
        if obj.minimizers.is_empty() {
            return Ok(x.clone());
        }
    }
    obj.minimizers
        .iter()
        .min_by(|a, b| dist_sq(x0, a).partial_cmp(&dist_sq(x0, b)).unwrap())
        .cloned()
        .or_else(|| obj.x_star.clone())
        .ok_or_else(|| Error::MissingData(format!("{} has no known minimizer", obj.id)))
}

/// Per-method potential along a trajectory and its non-increase verdict
/// (relative slack `1e-9` per step):
///
/// ```text
/// gd_convex            t·(f(x_t) − f*) + ‖x_t − x*‖²/(2η)
/// gd_strongly_convex   A_t(f(x_t) − f*) + (1 + ημA_t)/(2η)·‖x_t − x*‖²,  A₀ = 0, A_{t+1} = (1 + A_t)/(1 − ημ)
/// nag                  A_t(f(x_t) − f*) + ‖z_t − x*‖²/(2η)
/// nag_sc               A_t(f(x_t) − f*) + (1 + ημA_t)/(2η)·‖z_t − x*‖²
/// ```
pub fn potential_series(
    traj: &Trajectory,
    obj: &Objective,
    kind: PotentialKind,
) -> Result<PotentialSeries> {
    let eta = traj.eta;
    if !(eta > 0.0) {
        return Err(Error::Report(format!("potential needs eta > 0, got {eta}")));
    }
    if obj.f_star.is_none() {
        return Err(Error::MissingData(format!("{} has no known f*", obj.id)));
    }
    let xs = reference_point(obj, &traj.first().x)?;
    let mut values = Vec::with_capacity(traj.len());
    // A_t for gd_strongly_convex, advanced through unrecorded steps
    let mut a_sc = 0.0f64;
    let mut a_sc_t = 0usize;
    for r in &traj.records {
        let gap = r
            .gap
            .ok_or_else(|| Error::Report(format!("record {} has no gap", r.t)))?;
        let phi = match kind {
            PotentialKind::GdConvex => r.t as f64 * gap + dist_sq(&r.x, &xs) / (2.0 * eta),
            PotentialKind::GdStronglyConvex { mu } => {
                while a_sc_t < r.t {
                    a_sc = (1.0 + a_sc) / (1.0 - eta * mu);
                    a_sc_t += 1;
                }
                a_sc * gap + (1.0 + eta * mu * a_sc) / (2.0 * eta) * dist_sq(&r.x, &xs)
            }
            PotentialKind::Nag | PotentialKind::NagSc { .. } => {
                let z =
                    r.z.as_ref()
                        .ok_or_else(|| Error::Report(format!("record {} carries no z_t", r.t)))?;
                let a =
                    r.a.ok_or_else(|| Error::Report(format!("record {} carries no A_t", r.t)))?;
                let w = match kind {
                    PotentialKind::NagSc { mu } => (1.0 + eta * mu * a) / (2.0 * eta),
                    _ => 1.0 / (2.0 * eta),
                };
                a * gap + w * dist_sq(z, &xs)
            }
        };
        values.push((r.t, phi));
    }
    let mut tally = Tally::new(kind.name());
    let mut overflow = false;
    for w in values.windows(2) {
        let ((_, p0), (t1, p1)) = (w[0], w[1]);
        if !p0.is_finite() || !p1.is_finite() {
            overflow = true;
            break;
        }
        tally.add(p0 - p1, 1e-9 * p0.abs().max(p1.abs()), Some(t1), None);
    }
    if overflow {
        tally = tally.note("potential weights overflowed; later steps unchecked");
    }
    Ok(PotentialSeries {
        kind,
        values,
        check: tally.done(),
    })
}

/// The theorem's right-hand side from [`predict_bound`] against every
/// record: the gap for the convex methods, the running mean
/// `(1/t)Σ_{s<t}‖∇f(x_s)‖²` for nonconvex GD and SGD. Relative slack `1e-12`.
pub fn check_theorem_bound(traj: &Trajectory, params: &TunedParams) -> Result<Check> {
    let mut tally = Tally::new("theorem_bound");
    let mean_sq = matches!(params.method, Method::GdNonconvex | Method::Sgd);
    for r in &traj.records {
        if r.t == 0 && params.method != Method::NagConvex {
            continue;
        }
        let observed = if mean_sq {
            r.grad_sq_sum / r.t as f64
        } else {
            r.gap
                .ok_or_else(|| Error::Report(format!("record {} has no gap", r.t)))?
        };
        let bound = predict_bound(params, r.t as u64)?;
        tally.add(
            bound - observed,
            1e-12 * bound.abs().max(observed.abs()),
            Some(r.t),
            None,
        );
    }
    Ok(tally.done())
}

/// `‖∇f(x)‖² ≤ 2ℓ(2‖∇f(x)‖)(f(x) − f*)` at each point, relative slack
/// `1e-9`.
pub fn check_reverse_pl(obj: &Objective, points: &[Vec<f64>]) -> Result<Check> {
    let mut tally = Tally::new("reverse_pl");
    for x in points {
        let g = norm(&obj.gradient(x)?);
        let gap = obj.gap(x)?;
        let rhs = 2.0 * obj.profile.eval(2.0 * g)? * gap;
        let lhs = g * g;
        tally.add(rhs - lhs, 1e-9 * rhs.abs().max(lhs), None, Some(x));
    }
    Ok(tally.done())
}

/// For every `x` and `per_point` random `y` with
/// `‖y − x‖ ≤ radius_mult · a/ℓ(‖∇f(x)‖ + a)` checks that `y` lies in the
/// domain, that `‖∇f(y)‖ ≤ ‖∇f(x)‖ + a`, and the two-sided quadratic upper
/// bound with `L = ℓ(‖∇f(x)‖ + a)`. Relative slack `1e-8`.
///
/// `radius_mult = 1` is the claimed radius; larger values serve as negative
/// controls.
pub fn check_local_lipschitz(
    obj: &Objective,
    points: &[Vec<f64>],
    a: f64,
    radius_mult: f64,
    per_point: usize,
    seed: u64,
) -> Result<Check> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::param(format!("a must be finite and > 0, got {a}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("local_lipschitz");
    let mut out_of_domain = 0usize;
    for x in points {
        let gx = obj.gradient(x)?;
        let fx = obj.value(x)?;
        let gn = norm(&gx);
        let l = obj.profile.eval(gn + a)?;
        let radius = radius_mult * a / l;
        for _ in 0..per_point {
            let mut dir: Vec<f64> = (0..x.len()).map(|_| rng.sample(StandardNormal)).collect();
            let dn = norm(&dir);
            let s = radius * rng.random::<f64>().powf(1.0 / x.len() as f64) / dn;
            dir.iter_mut().for_each(|d| *d *= s);
            let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + b).collect();
            if !obj.contains(&y) {
                out_of_domain += 1;
                tally.add(
                    -obj.domain.point_distance(&y).abs().max(f64::MIN_POSITIVE),
                    0.0,
                    None,
                    Some(&y),
                );
                continue;
            }
            let gy = obj.gradient(&y)?;
            let fy = obj.value(&y)?;
            let gyn = norm(&gy);
            let bound = gn + a;
            tally.add(bound - gyn, 1e-8 * bound, None, Some(&y));
            let d2 = dist_sq(&x[..], &y);
            // f(y) ≤ f(x) + <∇f(x), y − x> + L/2‖y − x‖² and the same with roles swapped
            let up1 = fx + dot(&gx, &dir) + 0.5 * l * d2;
            tally.add(
                up1 - fy,
                1e-8 * (1.0 + up1.abs().max(fy.abs())),
                None,
                Some(&y),
            );
            let up2 = fy - dot(&gy, &dir) + 0.5 * l * d2;
            tally.add(
                up2 - fx,
                1e-8 * (1.0 + up2.abs().max(fx.abs())),
                None,
                Some(&y),
            );
        }
    }
    if out_of_domain > 0 {
        tally = tally.note(format!("{out_of_domain} sampled points left the domain"));
    }
    Ok(tally.done())
}

/// Seeded sampling plan for [`certify_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub samples: usize,
    pub seed: u64,
    /// Per-coordinate region; defaults to the objective's own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Sampling>,
}

impl SamplePlan {
    pub fn new(samples: usize, seed: u64) -> Self {
        SamplePlan {
            samples,
            seed,
            region: None,
        }
    }

    /// Points inside the objective's domain; points that land outside it
    /// are redrawn.
    pub fn points(&self, obj: &Objective) -> Vec<Vec<f64>> {
        let region = self.region.unwrap_or(obj.sampling);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.samples);
        let mut tries = 0usize;
        while out.len() < self.samples && tries < 100 * self.samples.max(1) {
            tries += 1;
            let x: Vec<f64> = (0..obj.dim)
                .map(|_| region.map_unit(rng.random::<f64>()))
                .collect();
            if obj.contains(&x) {
                out.push(x);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub x: Vec<f64>,
    pub hessian_norm: f64,
    pub grad_norm: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub objective: String,
    pub profile: EllFunction,
    pub plan: SamplePlan,
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl Certification {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Relative slack for [`certify_profile`]: a few ulps, enough to absorb the
/// different rounding of `ℓ(|f′|)` and `|f″|` where the profile is an exact
/// identity.
pub const CERTIFY_SLACK: f64 = 1e-12;

/// `‖∇²f(x)‖ ≤ ℓ(‖∇f(x)‖)` at every sampled point, against `profile` (the
/// objective's stored one when `None`).
pub fn certify_profile(
    obj: &Objective,
    plan: &SamplePlan,
    profile: Option<&EllFunction>,
) -> Result<Certification> {
    let ell = profile.unwrap_or(&obj.profile);
    let points = plan.points(obj);
    let mut violations = Vec::new();
    for x in &points {
        let h = obj.hessian_norm(x)?;
        let g = norm(&obj.gradient(x)?);
        let bound = ell.eval(g)?;
        let margin = bound - h;
        if !(margin >= -CERTIFY_SLACK * bound.abs().max(h)) {
            violations.push(Violation {
                x: x.clone(),
                hessian_norm: h,
                grad_norm: g,
                bound,
                margin,
            });
        }
    }
    Ok(Certification {
        objective: obj.name(),
        profile: ell.clone(),
        plan: *plan,
        checked: points.len(),
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    /// `log gap` against `log t`.
    Power,
    /// `log gap` against `t`.
    Linear,
}

/// Regresses the gap series inside `window = (t_lo, t_hi)` (inclusive).
pub fn fit_rate(traj: &Trajectory, mode: RateMode, window: (usize, usize)) -> Result<FittedRate> {
    let series: Vec<(usize, f64)> = traj
        .gaps()
        .into_iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .collect();
    fit_rate_series(&series, mode)
}

pub fn fit_rate_series(series: &[(usize, f64)], mode: RateMode) -> Result<FittedRate> {
    if series.len() < 2 {
        return Err(Error::Window(format!(
            "need at least 2 points, got {}",
            series.len()
        )));
    }
    if let Some((t, g)) = series.iter().find(|(_, g)| !(*g > 0.0) || !g.is_finite()) {
        return Err(Error::Window(format!("gap {g} at t={t} is not positive")));
    }
    if mode == RateMode::Power && series.iter().any(|(t, _)| *t == 0) {
        return Err(Error::Window("power fit needs t >= 1".into()));
    }
    let ys: Vec<f64> = series.iter().map(|(_, g)| g.ln()).collect();
    let xs: Vec<f64> = series
        .iter()
        .map(|(t, _)| match mode {
            RateMode::Power => (*t as f64).ln(),
            RateMode::Linear => *t as f64,
        })
        .collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    Ok(match mode {
        RateMode::Power => FittedRate::Power {
            slope,
            intercept,
            r_squared,
        },
        RateMode::Linear => FittedRate::Linear {
            linear_rate: slope,
            intercept,
            r_squared,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exceedance {
    pub tau1: usize,
    pub tau2: usize,
    pub tau: usize,
}

/// `τ₁ = min{t : ‖∇f(x_{t+1})‖ > G} ∧ T`, `τ₂ = min{t : ‖ε_t‖ > threshold} ∧ T`,
/// `τ = min(τ₁, τ₂)`. Needs every step recorded with its noise norm.
pub fn sgd_exceedance_report(traj: &Trajectory, g: f64, threshold: f64) -> Result<Exceedance> {
    let recs = &traj.records;
    let t_end = traj.last().t;
    if recs.iter().enumerate().any(|(i, r)| r.t != i) {
        return Err(Error::Report(
            "exceedance report needs every step recorded (stride 1)".into(),
        ));
    }
    let mut tau1 = t_end;
    for t in 0..t_end {
        if recs[t + 1].grad_norm > g {
            tau1 = t;
            break;
        }
    }
    let mut tau2 = t_end;
    for r in &recs[..t_end] {
        let e = r
            .noise_norm
            .ok_or_else(|| Error::Report(format!("record {} has no noise norm", r.t)))?;
        if e > threshold {
            tau2 = r.t;
            break;
        }
    }
    Ok(Exceedance {
        tau1,
        tau2,
        tau: tau1.min(tau2),
    })
}

/// Search controls for [`level_set_m`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSetSearch {
    pub grid: usize,
    /// Doublings allowed while looking for the edge of the level set.
    pub max_doublings: usize,
}

impl Default for LevelSetSearch {
    fn default() -> Self {
        LevelSetSearch {
            grid: 20_001,
            max_doublings: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetM {
    #[serde(rename = "M")]
    pub m: f64,
    pub argmax: f64,
    /// Bracket of the level set that was searched.
    pub interval: (f64, f64),
    #[serde(rename = "Delta0")]
    pub delta0: f64,
    /// Largest root of `M² = 2ℓ(2M)Δ₀`; absent when `ℓ` grows too fast.
    pub analytic_root: Option<f64>,
}

impl LevelSetM {
    pub fn within_bound(&self, rel: f64) -> bool {
        match self.analytic_root {
            Some(r) => self.m <= r * (1.0 + rel),
            None => false,
        }
    }
}

/// Largest `M` with `M² ≤ 2ℓ(2M)Δ₀`, by doubling then bisection.
pub fn level_set_bound_root(ell: &EllFunction, delta0: f64) -> Option<f64> {
    if !(delta0 >= 0.0) {
        return None;
    }
    if delta0 == 0.0 {
        return Some(0.0);
    }
    let h = |m: f64| m * m - 2.0 * ell.at(2.0 * m) * delta0;
    let mut hi = 1e-12f64.max(delta0.sqrt());
    let mut n = 0;
    while !(h(hi) > 0.0) {
        hi *= 2.0;
        n += 1;
        if n > 2000 || !hi.is_finite() {
            return None;
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(lo)
}

/// Edge of the level set `{f ≤ f0}` walking from `x0` in direction `dir`.
fn level_edge(obj: &Objective, x0: f64, f0: f64, dir: f64, search: &LevelSetSearch) -> Result<f64> {
    let f = |x: f64| obj.value_unchecked(&[x]);
    let inside = |x: f64| obj.contains(&[x]) && f(x) <= f0;
    let mut step = 1e-3 * x0.abs().max(1.0);
    let mut last_in = x0;
    for _ in 0..search.max_doublings {
        let cand = x0 + dir * step;
        if !obj.contains(&[cand]) {
            // bisect toward the domain boundary
            let (mut a, mut b) = (last_in, cand);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if inside(m) {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(a);
        }
        if f(cand) > f0 {
            let (mut a, mut b) = (last_in, cand);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m == a || m == b {
                    break;
                }
                if inside(m) {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(a);
        }
        last_in = cand;
        step *= 2.0;
    }
    // unbounded: acceptable only if the gradient has decayed far out
    let far = last_in;
    let g_far = obj.gradient_unchecked(&[far])[0].abs();
    let g0 = obj.gradient_unchecked(&[x0])[0].abs();
    if g_far <= 1e-12 * g0.max(1e-300) || g_far == 0.0 {
        Ok(far)
    } else {
        Err(Error::Search(format!(
            "level set of f(x0) is unbounded and |f'| = {g_far:e} does not decay (reached x = {far:e})"
        )))
    }
}

fn golden_max(phi: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = phi(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `M = sup{|f′(x)| : f(x) ≤ f(x₀)}` for a univariate objective, by a grid
/// over the bracketed level set refined by golden-section search, together
/// with the analytic bound root.
pub fn level_set_m(obj: &Objective, x0: f64, search: &LevelSetSearch) -> Result<LevelSetM> {
    if obj.dim != 1 {
        return Err(Error::param("level_set_M needs a univariate objective"));
    }
    obj.check_domain(&[x0])?;
    let f0 = obj.value_unchecked(&[x0]);
    let delta0 = obj.gap(&[x0])?;
    let lo = level_edge(obj, x0, f0, -1.0, search)?;
    let hi = level_edge(obj, x0, f0, 1.0, search)?;
    let phi = |x: f64| {
        if obj.contains(&[x]) && obj.value_unchecked(&[x]) <= f0 {
            obj.gradient_unchecked(&[x])[0].abs()
        } else {
            f64::NEG_INFINITY
        }
    };
    let n = search.grid.max(3);
    let mut best = (x0, phi(x0));
    for &x in &[lo, hi] {
        let v = phi(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let grid: Vec<f64> = if hi > lo {
        crate::linalg::linspace(lo, hi, n)
    } else {
        vec![lo]
    };
    let mut best_i = None;
    for (i, &x) in grid.iter().enumerate() {
        let v = phi(x);
        if v > best.1 {
            best = (x, v);
            best_i = Some(i);
        }
    }
    if let Some(i) = best_i {
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(grid.len() - 1)];
        let (x, v) = golden_max(phi, a, b);
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(LevelSetM {
        m: best.1,
        argmax: best.0,
        interval: (lo, hi),
        delta0,
        analytic_root: level_set_bound_root(&obj.profile, delta0),
    })
}
