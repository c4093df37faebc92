//! Constant-stepsize GD, SGD and the two Nesterov variants.
//!
//! Runs never panic or error once started: leaving the domain or producing a
//! non-finite value ends the run with a [`StopReason`] and the trajectory up
//! to the last valid iterate.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, axpy, dist, norm};
use crate::noise::{sample_noise, NoiseModel, RngStream};
use crate::objectives::Objective;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: usize,
    pub x: Vec<f64>,
    pub f: f64,
    /// `f(x_t) − f*` when `f*` is known.
    pub gap: Option<f64>,
    pub grad_norm: f64,
    /// `‖x_{t+1} − x_t‖`; absent on the final record.
    pub step_norm: Option<f64>,
    /// `Σ_{s<t} ‖∇f(x_s)‖²`, accumulated over every step, recorded or not.
    pub grad_sq_sum: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_grad_norm: Option<f64>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// `‖ε_t‖` of the noise drawn at step `t` (SGD only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum StopReason {
    Completed {
        t: usize,
    },
    DomainViolation {
        t: usize,
        /// Which point left the domain: `"x"` or `"y"`.
        at: String,
        point: Vec<f64>,
        distance: f64,
    },
    Nonfinite {
        t: usize,
    },
    GradTolReached {
        t: usize,
    },
}

impl StopReason {
    /// Index of the last valid record.
    pub fn t(&self) -> usize {
        match self {
            StopReason::Completed { t }
            | StopReason::DomainViolation { t, .. }
            | StopReason::Nonfinite { t }
            | StopReason::GradTolReached { t } => *t,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(
            self,
            StopReason::DomainViolation { .. } | StopReason::Nonfinite { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub method: String,
    pub objective: String,
    pub eta: f64,
    #[serde(rename = "T")]
    pub t_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    pub stride: usize,
    pub stop: StopReason,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn first(&self) -> &Record {
        &self.records[0]
    }

    pub fn last(&self) -> &Record {
        self.records.last().expect("trajectory has at least x0")
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn grad_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.grad_norm).collect()
    }

    /// `(t, f(x_t) − f*)` for every record with a known gap.
    pub fn gaps(&self) -> Vec<(usize, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.gap.map(|g| (r.t, g)))
            .collect()
    }

    pub fn record_at(&self, t: usize) -> Option<&Record> {
        self.records
            .binary_search_by_key(&t, |r| r.t)
            .ok()
            .map(|i| &self.records[i])
    }

    /// Stores a per-record potential series (e.g. from
    /// [`crate::diagnostics::potential_series`]).
    pub fn set_potential(&mut self, values: &[f64]) {
        for (r, v) in self.records.iter_mut().zip(values) {
            r.potential = Some(*v);
        }
    }

    /// CSV with columns `t, f, grad_norm, step_norm, potential, A, B`; floats
    /// carry 17 significant digits, absent values are empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "f", "grad_norm", "step_norm", "potential", "A", "B"])?;
        let fmt = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
        for r in &self.records {
            out.write_record([
                r.t.to_string(),
                fmt(Some(r.f)),
                fmt(Some(r.grad_norm)),
                fmt(r.step_norm),
                fmt(r.potential),
                fmt(r.a),
                fmt(r.b),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(f), self)
            .map_err(|e| Error::Io(e.to_string()))
    }
}

/// Recording and stopping options shared by all methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Stop once `‖∇f(x_t)‖ ≤ grad_tol`.
    pub grad_tol: Option<f64>,
    /// Keep every `stride`-th record (plus `t = 0` and the final one).
    pub stride: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            grad_tol: None,
            stride: 1,
        }
    }
}

const MAX_Z_WARNINGS: usize = 10;

fn check_start(obj: &Objective, x0: &[f64], eta: f64, opts: &RunOptions) -> Result<()> {
    obj.check_domain(x0)?;
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::param(format!(
            "stepsize must be finite and > 0, got {eta}"
        )));
    }
    if opts.stride == 0 {
        return Err(Error::param("stride must be >= 1"));
    }
    Ok(())
}

fn base_record(
    obj: &Objective,
    t: usize,
    x: &[f64],
    f: f64,
    grad_norm: f64,
    grad_sq_sum: f64,
) -> Record {
    Record {
        t,
        x: x.to_vec(),
        f,
        gap: obj.f_star.and_then(|_| obj.gap(x).ok()),
        grad_norm,
        step_norm: None,
        grad_sq_sum,
        y: None,
        z: None,
        y_grad_norm: None,
        a: None,
        b: None,
        noise_norm: None,
        potential: None,
    }
}

fn domain_stop(obj: &Objective, t: usize, at: &str, p: &[f64]) -> StopReason {
    StopReason::DomainViolation {
        t,
        at: at.into(),
        point: p.to_vec(),
        distance: -obj.domain.point_distance(p).min(0.0),
    }
}

fn trajectory(
    method: &str,
    obj: &Objective,
    eta: f64,
    t_max: usize,
    opts: &RunOptions,
    records: Vec<Record>,
    stop: StopReason,
) -> Trajectory {
    Trajectory {
        method: method.into(),
        objective: obj.name(),
        eta,
        t_max,
        mu: None,
        seed: None,
        noise: None,
        stride: opts.stride,
        stop,
        warnings: vec![],
        records,
    }
}

/// GD and SGD share one loop; `noise = None` is plain GD.
fn run_first_order(
    obj: &Objective,
    x0: &[f64],
    eta: f64,
    t_max: usize,
    mut noise: Option<(&NoiseModel, &mut RngStream)>,
    opts: &RunOptions,
) -> Result<(Vec<Record>, StopReason)> {
    check_start(obj, x0, eta, opts)?;
    if let Some((m, _)) = &noise {
        m.validate()?;
    }
    let mut x = x0.to_vec();
    let mut f = obj.value_unchecked(&x);
    let mut g = obj.gradient_unchecked(&x);
    let mut sum = 0.0;
    let mut records = Vec::new();
    let mut t = 0;
    let stop = loop {
        let gn = norm(&g);
        let mut rec = base_record(obj, t, &x, f, gn, sum);
        if !f.is_finite() || !gn.is_finite() {
            // only reachable at t = 0
            records.push(rec);
            break StopReason::Nonfinite { t };
        }
        if t == t_max {
            records.push(rec);
            break StopReason::Completed { t };
        }
        if opts.grad_tol.is_some_and(|tol| gn <= tol) {
            records.push(rec);
            break StopReason::GradTolReached { t };
        }
        let step_dir = match noise.as_mut() {
            Some((m, rng)) => {
                let eps = sample_noise(m, rng, obj.dim)?;
                rec.noise_norm = Some(norm(&eps));
                g.iter().zip(&eps).map(|(a, b)| a + b).collect()
            }
            None => g.clone(),
        };
        let x_next = axpy(&x, -eta, &step_dir);
        if !all_finite(&x_next) {
            records.push(rec);
            break StopReason::Nonfinite { t };
        }
        if !obj.contains(&x_next) {
            records.push(rec);
            break domain_stop(obj, t, "x", &x_next);
        }
        let f_next = obj.value_unchecked(&x_next);
        let g_next = obj.gradient_unchecked(&x_next);
        if !f_next.is_finite() || !all_finite(&g_next) {
            records.push(rec);
            break StopReason::Nonfinite { t };
        }
        rec.step_norm = Some(dist(&x_next, &x));
        if t % opts.stride == 0 {
            records.push(rec);
        }
        sum += gn * gn;
        x = x_next;
        f = f_next;
        g = g_next;
        t += 1;
    };
    Ok((records, stop))
}

/// `x_{t+1} = x_t − η∇f(x_t)` for `t < T`.
pub fn run_gd(
    obj: &Objective,
    x0: &[f64],
    eta: f64,
    t_max: usize,
    grad_tol: Option<f64>,
) -> Result<Trajectory> {
    run_gd_opts(
        obj,
        x0,
        eta,
        t_max,
        &RunOptions {
            grad_tol,
            ..Default::default()
        },
    )
}

pub fn run_gd_opts(
    obj: &Objective,
    x0: &[f64],
    eta: f64,
    t_max: usize,
    opts: &RunOptions,
) -> Result<Trajectory> {
    let (records, stop) = run_first_order(obj, x0, eta, t_max, None, opts)?;
    Ok(trajectory("gd", obj, eta, t_max, opts, records, stop))
}

/// `x_{t+1} = x_t − η(∇f(x_t) + ε_t)`. The noise norms are recorded for the
/// stopping-time diagnostics; nothing is clipped.
pub fn run_sgd(
    obj: &Objective,
    x0: &[f64],
    eta: f64,
    t_max: usize,
    noise: &NoiseModel,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    run_sgd_opts(obj, x0, eta, t_max, noise, rng, &RunOptions::default())
}

pub fn run_sgd_opts(
    obj: &Objective,
    x0: &[f64],
    eta: f64,
    t_max: usize,
    noise: &NoiseModel,
    rng: &mut RngStream,
    opts: &RunOptions,
) -> Result<Trajectory> {
    let seed = rng.seed;
    let (records, stop) = run_first_order(obj, x0, eta, t_max, Some((noise, rng)), opts)?;
    let mut tr = trajectory("sgd", obj, eta, t_max, opts, records, stop);
    tr.seed = Some(seed);
    tr.noise = Some(*noise);
    Ok(tr)
}

/// Weights of the convex accelerated method: `B₀ = 0`,
/// `B_{t+1} = B_t + (1 + √(4B_t + 1))/2`, `A_t = B_t + 1/η`.
#[derive(Debug, Clone, PartialEq)]
pub struct NagWeights {
    pub b: Vec<f64>,
    pub a: Vec<f64>,
    pub eta: f64,
}

pub fn nag_weights(eta: f64, t_max: usize) -> Result<NagWeights> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::param(format!(
            "stepsize must be finite and > 0, got {eta}"
        )));
    }
    let mut b = Vec::with_capacity(t_max + 1);
    b.push(0.0f64);
    for t in 0..t_max {
        let bt = b[t];
        b.push(bt + 0.5 * (1.0 + (4.0 * bt + 1.0).max(0.0).sqrt()));
    }
    let a = b.iter().map(|v| v + 1.0 / eta).collect();
    Ok(NagWeights { b, a, eta })
}

impl NagWeights {
    /// `(1 − A_t/A_{t+1})·(1/A_t)·Σ_{s<t} √A_{s+1}(A_{s+1} − A_s − 1)` for
    /// every `t` with `A_{t+1}` available. Bounded by 4.
    pub fn lemma_series(&self) -> Vec<f64> {
        let n = self.b.len();
        let mut out = Vec::with_capacity(n.saturating_sub(1));
        let mut sum = 0.0;
        for t in 0..n.saturating_sub(1) {
            out.push((1.0 - self.a[t] / self.a[t + 1]) / self.a[t] * sum);
            // A_{s+1} − A_s − 1 = B_{s+1} − B_s − 1, taken from B to avoid
            // cancellation against 1/η
            sum += self.a[t + 1].sqrt() * (self.b[t + 1] - self.b[t] - 1.0);
        }
        out
    }
}

/// Weights of the strongly convex accelerated method.
#[derive(Debug, Clone, PartialEq)]
pub struct NagScWeights {
    pub b: Vec<f64>,
    pub a: Vec<f64>,
    pub tau: Vec<f64>,
    pub delta: Vec<f64>,
    pub eta: f64,
    pub mu: f64,
}

pub fn nag_sc_weights(eta: f64, mu: f64, t_max: usize) -> Result<NagScWeights> {
    if !(eta > 0.0 && mu > 0.0) || !eta.is_finite() || !mu.is_finite() {
        return Err(Error::param("eta and mu must be finite and > 0"));
    }
    let em = eta * mu;
    if em >= 1.0 {
        return Err(Error::param(format!("eta*mu must be < 1, got {em}")));
    }
    let mut b = Vec::with_capacity(t_max + 1);
    b.push(0.0f64);
    for t in 0..t_max {
        let bt = b[t];
        let disc = (4.0 * bt + 4.0 * em * bt * bt + 1.0).max(0.0).sqrt();
        b.push((2.0 * bt + 1.0 + disc) / (2.0 * (1.0 - em)));
    }
    let a: Vec<f64> = b.iter().map(|v| v + 1.0 / em).collect();
    let mut tau = Vec::with_capacity(t_max);
    let mut delta = Vec::with_capacity(t_max);
    for t in 0..t_max {
        // both coefficients rewritten in terms of r = A_t/A_{t+1} so they
        // stay finite once the weights overflow
        let inv_at = 1.0 / a[t];
        let inv_at1 = 1.0 / a[t + 1];
        let r = if a[t + 1].is_finite() {
            a[t] / a[t + 1]
        } else {
            1.0 - em.sqrt()
        };
        tau.push((1.0 - r) * (inv_at + em) / (inv_at + em * (2.0 - r)));
        delta.push((1.0 - r) / (inv_at1 + em));
    }
    Ok(NagScWeights {
        b,
        a,
        tau,
        delta,
        eta,
        mu,
    })
}

/// Accelerated method for convex functions: `z₀ = x₀` and
///
/// ```text
/// y_t     = x_t + (1 − A_t/A_{t+1})(z_t − x_t)
/// x_{t+1} = y_t − η∇f(y_t)
/// z_{t+1} = z_t − η(A_{t+1} − A_t)∇f(y_t)
/// ```
pub fn run_nag(obj: &Objective, x0: &[f64], eta: f64, t_max: usize) -> Result<Trajectory> {
    run_nag_opts(obj, x0, eta, t_max, &RunOptions::default())
}

pub fn run_nag_opts(
    obj: &Objective,
    x0: &[f64],
    eta: f64,
    t_max: usize,
    opts: &RunOptions,
) -> Result<Trajectory> {
    check_start(obj, x0, eta, opts)?;
    let w = nag_weights(eta, t_max)?;
    let step = |t: usize, z: &[f64], gy: &[f64], y: &[f64]| {
        let x_next = axpy(y, -eta, gy);
        let z_next = axpy(z, -eta * (w.b[t + 1] - w.b[t]), gy);
        (x_next, z_next)
    };
    let mix = |t: usize, x: &[f64], z: &[f64]| {
        let c = 1.0 - w.a[t] / w.a[t + 1];
        x.iter()
            .zip(z)
            .map(|(xi, zi)| xi + c * (zi - xi))
            .collect::<Vec<f64>>()
    };
    let (records, stop, warnings) = run_accelerated(obj, x0, t_max, opts, &w.a, &w.b, mix, step)?;
    let mut tr = trajectory("nag", obj, eta, t_max, opts, records, stop);
    tr.warnings = warnings;
    Ok(tr)
}

/// Accelerated method for `μ`-strongly convex functions: `z₀ = x₀` and
///
/// ```text
/// y_t     = x_t + τ_t(z_t − x_t)
/// x_{t+1} = y_t − η∇f(y_t)
/// z_{t+1} = (1 − ημδ_t) z_t + ημδ_t y_t − ηδ_t ∇f(y_t)
/// ```
pub fn run_nag_sc(
    obj: &Objective,
    x0: &[f64],
    eta: f64,
    mu: f64,
    t_max: usize,
) -> Result<Trajectory> {
    run_nag_sc_opts(obj, x0, eta, mu, t_max, &RunOptions::default())
}

pub fn run_nag_sc_opts(
    obj: &Objective,
    x0: &[f64],
    eta: f64,
    mu: f64,
    t_max: usize,
    opts: &RunOptions,
) -> Result<Trajectory> {
    check_start(obj, x0, eta, opts)?;
    if let Some(m) = obj.mu {
        if mu > m * (1.0 + 1e-12) {
            return Err(Error::param(format!(
                "mu = {mu} exceeds the objective's strong convexity modulus {m}"
            )));
        }
    }
    let w = nag_sc_weights(eta, mu, t_max)?;
    let em = eta * mu;
    let step = |t: usize, z: &[f64], gy: &[f64], y: &[f64]| {
        let d = w.delta[t];
        let x_next = axpy(y, -eta, gy);
        let z_next = z
            .iter()
            .zip(y)
            .zip(gy)
            .map(|((zi, yi), gi)| (1.0 - em * d) * zi + em * d * yi - eta * d * gi)
            .collect();
        (x_next, z_next)
    };
    let mix = |t: usize, x: &[f64], z: &[f64]| {
        let c = w.tau[t];
        x.iter()
            .zip(z)
            .map(|(xi, zi)| xi + c * (zi - xi))
            .collect::<Vec<f64>>()
    };
    let (records, stop, warnings) = run_accelerated(obj, x0, t_max, opts, &w.a, &w.b, mix, step)?;
    let mut tr = trajectory("nag_sc", obj, eta, t_max, opts, records, stop);
    tr.mu = Some(mu);
    tr.warnings = warnings;
    Ok(tr)
}

#[allow(clippy::too_many_arguments)]
fn run_accelerated<M, S>(
    obj: &Objective,
    x0: &[f64],
    t_max: usize,
    opts: &RunOptions,
    a: &[f64],
    b: &[f64],
    mix: M,
    step: S,
) -> Result<(Vec<Record>, StopReason, Vec<String>)>
where
    M: Fn(usize, &[f64], &[f64]) -> Vec<f64>,
    S: Fn(usize, &[f64], &[f64], &[f64]) -> (Vec<f64>, Vec<f64>),
{
    let mut x = x0.to_vec();
    let mut z = x0.to_vec();
    let mut f = obj.value_unchecked(&x);
    let mut gx = obj.gradient_unchecked(&x);
    let mut sum = 0.0;
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut z_outside = 0usize;
    let mut t = 0;
    let stop = loop {
        let gn = norm(&gx);
        let mut rec = base_record(obj, t, &x, f, gn, sum);
        rec.z = Some(z.clone());
        rec.a = Some(a[t]);
        rec.b = Some(b[t]);
        if !f.is_finite() || !gn.is_finite() {
            records.push(rec);
            break StopReason::Nonfinite { t };
        }
        if t == t_max {
            records.push(rec);
            break StopReason::Completed { t };
        }
        if opts.grad_tol.is_some_and(|tol| gn <= tol) {
            records.push(rec);
            break StopReason::GradTolReached { t };
        }
        let y = mix(t, &x, &z);
        if !all_finite(&y) {
            records.push(rec);
            break StopReason::Nonfinite { t };
        }
        if !obj.contains(&y) {
            records.push(rec);
            break domain_stop(obj, t, "y", &y);
        }
        let gy = obj.gradient_unchecked(&y);
        rec.y_grad_norm = Some(norm(&gy));
        rec.y = Some(y.clone());
        let (x_next, z_next) = step(t, &z, &gy, &y);
        if !all_finite(&x_next) || !all_finite(&gy) {
            records.push(rec);
            break StopReason::Nonfinite { t };
        }
        if !obj.contains(&x_next) {
            records.push(rec);
            break domain_stop(obj, t, "x", &x_next);
        }
        if !obj.contains(&z_next) {
            z_outside += 1;
            if z_outside <= MAX_Z_WARNINGS {
                warnings.push(format!("z left the domain at t = {}", t + 1));
            }
        }
        let f_next = obj.value_unchecked(&x_next);
        let g_next = obj.gradient_unchecked(&x_next);
        if !f_next.is_finite() || !all_finite(&g_next) {
            records.push(rec);
            break StopReason::Nonfinite { t };
        }
        rec.step_norm = Some(dist(&x_next, &x));
        if t % opts.stride == 0 {
            records.push(rec);
        }
        sum += gn * gn;
        x = x_next;
        z = z_next;
        f = f_next;
        gx = g_next;
        t += 1;
    };
    if z_outside > MAX_Z_WARNINGS {
        warnings.push(format!("z left the domain at {z_outside} steps in total"));
    }
    Ok((records, stop, warnings))
}
