//! The `gensmooth` command line: `tune`, `run`, `sweep`, `lowerbound` and
//! `verify`.
//!
//! Exit codes: 0 success, 1 configuration or validation error, 2 no finite
//! `G`, 3 run failure (divergence, domain violation or a failed check).

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::diagnostics::{
    certify_profile, check_descent, check_gradient_bound, check_theorem_bound, fit_rate,
    potential_series, sgd_exceedance_report, Certification, Check, DiagnosticsReport, Exceedance,
    PotentialKind, RateMode, SamplePlan,
};
use crate::error::{Error, Result};
use crate::lowerbound::{run_lower_bound, LowerBoundReport, LowerBoundSetup};
use crate::noise::{NoiseKind, NoiseModel, RngStream};
use crate::objectives::{catalog, from_spec, HardInstance, Objective};
use crate::smoothness::EllFunction;
use crate::solvers::{
    run_gd_opts, run_nag_opts, run_nag_sc_opts, run_sgd_opts, RunOptions, Trajectory,
};
use crate::tuner::{tune, Method, TunedParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NO_FINITE_G: i32 = 2;
pub const EXIT_RUN_FAILURE: i32 = 3;

/// Default horizon when neither the config nor the tuner fixes `T`.
pub const DEFAULT_T: usize = 1000;
/// Default cap on a tuner-derived SGD horizon.
pub const DEFAULT_T_CAP: usize = 100_000;

#[derive(Debug, Parser)]
#[command(
    name = "gensmooth",
    version,
    about = "Constant-stepsize methods under generalized smoothness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for `sweep` and `verify`.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Record every `stride`-th iterate.
    #[arg(long, global = true)]
    pub stride: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the theorem-prescribed constants for a config.
    Tune,
    /// Run one method and check its invariants.
    Run,
    /// Run every cell of the config's grid.
    Sweep,
    /// Reproduce the GD lower bound on the hard instance.
    Lowerbound {
        #[arg(long)]
        l0: Option<f64>,
        #[arg(long)]
        l2: Option<f64>,
        #[arg(long)]
        g0: Option<f64>,
        #[arg(long)]
        delta0: Option<f64>,
        /// Stepsize; defaults to the geometric middle of the stuck range.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Certify the stored profile of every catalog objective.
    Verify {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub params: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgdTargets {
    pub delta: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Descent,
    Potential,
    GradientBound,
    TheoremBound,
    Exceedance,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Vec<Method>>,
}

/// One experiment. Unset values fall back to the tuner (`eta`, SGD `T`) or
/// to fixed defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub objective: ObjectiveSpec,
    pub method: Method,
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Replaces the objective's stored profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<EllFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sgd: Option<SgdTargets>,
    #[serde(rename = "T_cap", default, skip_serializing_if = "Option::is_none")]
    pub t_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Vec<DiagnosticKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<SweepGrid>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Flag values win over file values.
    pub fn apply_flags(&mut self, seed: Option<u64>, stride: Option<usize>, out: Option<&Path>) {
        if seed.is_some() {
            self.seed = seed;
        }
        if stride.is_some() {
            self.stride = stride;
        }
        if let Some(o) = out {
            self.out = Some(o.to_path_buf());
        }
    }
}

fn default_diagnostics(method: Method) -> Vec<DiagnosticKind> {
    use DiagnosticKind::*;
    match method {
        Method::GdConvex => vec![Descent, Potential, TheoremBound],
        Method::GdStronglyConvex => vec![Potential, TheoremBound],
        Method::GdNonconvex => vec![Descent, GradientBound, TheoremBound],
        Method::NagConvex | Method::NagStronglyConvex => vec![Potential, TheoremBound],
        Method::Sgd => vec![GradientBound, Exceedance],
    }
}

/// A config after validation: everything needed to run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub objective: Objective,
    pub x0: Vec<f64>,
    pub tuned: Option<TunedParams>,
    pub eta: f64,
    pub t: usize,
    pub seed: u64,
    pub mu: Option<f64>,
    pub noise: NoiseModel,
    pub opts: RunOptions,
    pub diagnostics: Vec<DiagnosticKind>,
    pub warnings: Vec<String>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Config(format!(
            "{name} must be finite and > 0, got {v}"
        )));
    }
    Ok(())
}

/// Checks the whole config and resolves tuned values; nothing is run.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let mut obj = from_spec(&cfg.objective.id, &cfg.objective.params)?;
    if let Some(p) = &cfg.profile {
        obj = obj.with_profile(p.clone());
    }
    if cfg.x0.len() != obj.dim {
        return Err(Error::Config(format!(
            "x0 has {} coordinates, objective has dim {}",
            cfg.x0.len(),
            obj.dim
        )));
    }
    obj.check_domain(&cfg.x0)?;
    if let Some(e) = cfg.eta {
        positive("eta", e)?;
    }
    if let Some(m) = cfg.mu {
        positive("mu", m)?;
    }
    if cfg.t == Some(0) {
        return Err(Error::Config("T must be >= 1".into()));
    }
    let stride = cfg.stride.unwrap_or(1);
    if stride == 0 {
        return Err(Error::Config("stride must be >= 1".into()));
    }
    let noise = cfg.noise.unwrap_or_else(NoiseModel::none);
    noise.validate()?;
    if cfg.method != Method::Sgd && !noise.is_zero() {
        return Err(Error::Config(format!(
            "noise is only used by sgd, not {:?}",
            cfg.method
        )));
    }
    if let Some(s) = &cfg.sgd {
        positive("sgd.delta", s.delta)?;
        positive("sgd.epsilon", s.epsilon)?;
        if s.delta >= 1.0 {
            return Err(Error::Config("sgd.delta must be < 1".into()));
        }
    }
    let diagnostics = cfg
        .diagnostics
        .clone()
        .unwrap_or_else(|| default_diagnostics(cfg.method));
    for d in &diagnostics {
        let ok = match d {
            DiagnosticKind::Potential => !matches!(cfg.method, Method::GdNonconvex | Method::Sgd),
            DiagnosticKind::Exceedance => cfg.method == Method::Sgd,
            DiagnosticKind::Descent => matches!(
                cfg.method,
                Method::GdConvex | Method::GdStronglyConvex | Method::GdNonconvex
            ),
            _ => true,
        };
        if !ok {
            return Err(Error::Config(format!(
                "diagnostic {d:?} does not apply to {:?}",
                cfg.method
            )));
        }
    }
    let mu = match cfg.method {
        Method::GdStronglyConvex | Method::NagStronglyConvex => {
            Some(cfg.mu.or(obj.mu).ok_or_else(|| {
                Error::Config(format!("{:?} needs mu and {} has none", cfg.method, obj.id))
            })?)
        }
        _ => cfg.mu,
    };
    let sgd = match cfg.method {
        Method::Sgd => {
            let s = cfg.sgd.ok_or_else(|| {
                Error::Config("sgd needs an 'sgd' block with delta and epsilon".into())
            })?;
            Some((noise.sigma, s.delta, s.epsilon))
        }
        _ => None,
    };
    let tuned = match tune(cfg.method, &obj, &cfg.x0, sgd, cfg.alpha, mu) {
        Ok(p) => Some(p),
        // a user stepsize runs without the tuner as long as no check needs it
        Err(e) if cfg.eta.is_some() && !matches!(e, Error::NoFiniteG { .. }) => {
            let needs = diagnostics.iter().any(|d| {
                matches!(
                    d,
                    DiagnosticKind::TheoremBound
                        | DiagnosticKind::GradientBound
                        | DiagnosticKind::Exceedance
                )
            });
            if needs && cfg.diagnostics.is_some() {
                return Err(e);
            }
            None
        }
        Err(e) => return Err(e),
    };
    let mut warnings = Vec::new();
    if stride > 1 && diagnostics.contains(&DiagnosticKind::Exceedance) {
        if cfg.diagnostics.is_some() {
            return Err(Error::Config(
                "the exceedance diagnostic needs stride 1".into(),
            ));
        }
        warnings.push("exceedance times need every iterate; skipped with stride > 1".into());
    }
    let diagnostics: Vec<DiagnosticKind> = diagnostics
        .into_iter()
        .filter(|d| stride == 1 || *d != DiagnosticKind::Exceedance)
        .collect();
    let diagnostics: Vec<DiagnosticKind> = if tuned.is_none() {
        warnings.push("tuner unavailable; theorem checks skipped".into());
        diagnostics
            .into_iter()
            .filter(|d| matches!(d, DiagnosticKind::Descent | DiagnosticKind::Potential))
            .collect()
    } else {
        diagnostics
    };
    let eta = cfg
        .eta
        .or(tuned.as_ref().map(|p| p.eta))
        .expect("eta resolved");
    let t = match (cfg.t, tuned.as_ref().and_then(|p| p.t)) {
        (Some(t), _) => t,
        (None, Some(theorem_t)) => {
            let cap = cfg.t_cap.unwrap_or(DEFAULT_T_CAP);
            if theorem_t > cap as u64 {
                warnings.push(format!("theorem T = {theorem_t} capped at {cap}"));
                cap
            } else {
                theorem_t as usize
            }
        }
        (None, None) => DEFAULT_T,
    };
    let tuned = tuned.map(|mut p| {
        p.eta = eta;
        p
    });
    Ok(Prepared {
        config: cfg.clone(),
        objective: obj,
        x0: cfg.x0.clone(),
        tuned,
        eta,
        t,
        seed: cfg.seed.unwrap_or(0),
        mu,
        noise,
        opts: RunOptions {
            grad_tol: cfg.grad_tol,
            stride,
        },
        diagnostics,
        warnings,
    })
}

/// Summary written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub objective: String,
    pub method: Method,
    pub eta: f64,
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
    pub stop: crate::solvers::StopReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuned: Option<TunedParams>,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exceedance: Option<Exceedance>,
    pub diagnostics: DiagnosticsReport,
    pub pass: bool,
}

fn potential_kind(method: Method, mu: Option<f64>) -> Option<PotentialKind> {
    match method {
        Method::GdConvex => Some(PotentialKind::GdConvex),
        Method::GdStronglyConvex => Some(PotentialKind::GdStronglyConvex { mu: mu? }),
        Method::NagConvex => Some(PotentialKind::Nag),
        Method::NagStronglyConvex => Some(PotentialKind::NagSc { mu: mu? }),
        _ => None,
    }
}

/// Runs a prepared config and evaluates its diagnostics.
pub fn execute(p: &Prepared) -> Result<(Trajectory, RunReport)> {
    let obj = &p.objective;
    let cfg = &p.config;
    let mut traj = match cfg.method {
        Method::GdConvex | Method::GdStronglyConvex | Method::GdNonconvex => {
            run_gd_opts(obj, &p.x0, p.eta, p.t, &p.opts)?
        }
        Method::NagConvex => run_nag_opts(obj, &p.x0, p.eta, p.t, &p.opts)?,
        Method::NagStronglyConvex => {
            run_nag_sc_opts(obj, &p.x0, p.eta, p.mu.unwrap(), p.t, &p.opts)?
        }
        Method::Sgd => {
            let mut rng = RngStream::new(p.seed, 0);
            run_sgd_opts(obj, &p.x0, p.eta, p.t, &p.noise, &mut rng, &p.opts)?
        }
    };
    traj.warnings.extend(p.warnings.iter().cloned());
    let mut report = DiagnosticsReport::default();
    let mut exceedance = None;
    let failed = traj.stop.is_failure();
    for d in &p.diagnostics {
        match d {
            DiagnosticKind::Descent => {
                let l = p.tuned.as_ref().map(|t| t.l).unwrap_or(f64::NAN);
                report.push(check_descent(&traj, p.eta, l));
            }
            DiagnosticKind::Potential => {
                let kind = potential_kind(cfg.method, p.mu).expect("validated");
                match potential_series(&traj, obj, kind) {
                    Ok(s) => {
                        traj.set_potential(&s.raw());
                        report.push(s.check);
                    }
                    Err(e) => report.push(failed_check(kind.name(), e)),
                }
            }
            DiagnosticKind::GradientBound => {
                let g = p.tuned.as_ref().unwrap().g;
                report.absorb_gradient_bound(&check_gradient_bound(&traj, g));
            }
            DiagnosticKind::TheoremBound => {
                match check_theorem_bound(&traj, p.tuned.as_ref().unwrap()) {
                    Ok(c) => report.push(c),
                    Err(e) => report.push(failed_check("theorem_bound", e)),
                }
            }
            DiagnosticKind::Exceedance => {
                let tp = p.tuned.as_ref().unwrap();
                match sgd_exceedance_report(&traj, tp.g, tp.noise_threshold()) {
                    Ok(e) => {
                        report.push(Check {
                            name: "exceedance".into(),
                            pass: e.tau == traj.last().t,
                            worst_margin: None,
                            t: Some(e.tau),
                            x: None,
                            checked: traj.len(),
                            violations: usize::from(e.tau != traj.last().t),
                            note: None,
                        });
                        exceedance = Some(e);
                    }
                    Err(e) => report.push(failed_check("exceedance", e)),
                }
            }
        }
    }
    if obj.f_star.is_some() && !failed {
        let last = traj.last().t;
        let mode = match cfg.method {
            Method::GdStronglyConvex | Method::NagStronglyConvex => RateMode::Linear,
            _ => RateMode::Power,
        };
        report.fitted_rate = fit_rate(&traj, mode, ((last / 10).max(1), last)).ok();
    }
    let pass = !failed && report.all_pass();
    let rr = RunReport {
        objective: obj.name(),
        method: cfg.method,
        eta: p.eta,
        t: p.t,
        seed: p.seed,
        stop: traj.stop.clone(),
        tuned: p.tuned.clone(),
        warnings: traj.warnings.clone(),
        exceedance,
        diagnostics: report,
        pass,
    };
    Ok((traj, rr))
}

fn failed_check(name: &str, e: Error) -> Check {
    Check {
        name: name.into(),
        pass: false,
        worst_margin: None,
        t: None,
        x: None,
        checked: 0,
        violations: 0,
        note: Some(e.to_string()),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoFiniteG { .. } => EXIT_NO_FINITE_G,
        _ => EXIT_CONFIG,
    }
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("this subcommand needs --config".into()))?;
    let mut cfg = RunConfig::load(path)?;
    cfg.apply_flags(cli.seed, cli.stride, cli.out.as_deref());
    Ok(cfg)
}

/// `tune`: prints the tuned parameters and writes `tuned.json` when an
/// output directory is given.
pub fn cmd_tune(cfg: &RunConfig) -> Result<TunedParams> {
    let p = prepare(cfg)?;
    p.tuned
        .ok_or_else(|| Error::Config("the tuner does not apply to this config".into()))
}

/// `run`: writes `config.json`, `trajectory.csv`, `trajectory.json` and
/// `report.json` into `out` and returns the report.
pub fn cmd_run(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    let p = prepare(cfg)?;
    let (traj, report) = execute(&p)?;
    ensure_dir(out)?;
    write_json(&out.join("config.json"), cfg)?;
    traj.save_csv(&out.join("trajectory.csv"))?;
    traj.save_json(&out.join("trajectory.json"))?;
    write_json(&out.join("report.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: usize,
    pub method: Method,
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
    pub sigma: f64,
    pub eta: Option<f64>,
    pub stop: Option<String>,
    pub final_gap: Option<f64>,
    pub min_grad_sq: Option<f64>,
    pub mean_grad_sq: Option<f64>,
    pub fitted_rate: Option<f64>,
    pub r_squared: Option<f64>,
    pub success: Option<bool>,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateAcrossT {
    pub method: Method,
    pub seed: u64,
    pub sigma: f64,
    pub slope: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessFraction {
    pub method: Method,
    #[serde(rename = "T")]
    pub t: usize,
    pub sigma: f64,
    pub runs: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    /// `log(final gap)` regressed on `log T` for each group with several `T`.
    pub rate_across_t: Vec<RateAcrossT>,
    /// Fraction of seeds with mean `‖∇f‖² ≤ ε²` (SGD configs).
    pub success: Vec<SuccessFraction>,
}

#[derive(Debug, Clone, PartialEq)]
struct Cell {
    method: Method,
    t: Option<usize>,
    seed: Option<u64>,
    sigma: Option<f64>,
}

fn grid_cells(cfg: &RunConfig) -> Result<Vec<Cell>> {
    let g = cfg
        .grid
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs a 'grid' block".into()))?;
    fn axis<T: Clone>(v: &Option<Vec<T>>, name: &str) -> Result<Vec<Option<T>>> {
        match v {
            None => Ok(vec![None]),
            Some(v) if v.is_empty() => Err(Error::Config(format!("grid axis '{name}' is empty"))),
            Some(v) => Ok(v.iter().cloned().map(Some).collect()),
        }
    }
    let methods = match &g.method {
        None => vec![cfg.method],
        Some(m) if m.is_empty() => return Err(Error::Config("grid axis 'method' is empty".into())),
        Some(m) => m.clone(),
    };
    let (ts, seeds, sigmas) = (
        axis(&g.t, "T")?,
        axis(&g.seed, "seed")?,
        axis(&g.sigma, "sigma")?,
    );
    if g.t.is_none() && g.seed.is_none() && g.sigma.is_none() && g.method.is_none() {
        return Err(Error::Config("grid is empty".into()));
    }
    let mut cells = Vec::new();
    for &method in &methods {
        for t in &ts {
            for seed in &seeds {
                for sigma in &sigmas {
                    cells.push(Cell {
                        method,
                        t: *t,
                        seed: *seed,
                        sigma: *sigma,
                    });
                }
            }
        }
    }
    Ok(cells)
}

fn cell_config(cfg: &RunConfig, c: &Cell) -> RunConfig {
    let mut x = cfg.clone();
    x.grid = None;
    x.method = c.method;
    if c.t.is_some() {
        x.t = c.t;
    }
    if c.seed.is_some() {
        x.seed = c.seed;
    }
    if let Some(s) = c.sigma {
        let mut n = cfg.noise.unwrap_or_else(|| NoiseModel::gaussian(0.0));
        if n.kind == NoiseKind::None {
            n.kind = NoiseKind::Gaussian;
        }
        n.sigma = s;
        x.noise = Some(n);
    }
    if x.diagnostics.is_some() && c.method != cfg.method {
        x.diagnostics = None;
    }
    x
}

fn run_cell(i: usize, cfg: &RunConfig) -> SweepRow {
    let mut row = SweepRow {
        cell: i,
        method: cfg.method,
        t: cfg.t.unwrap_or(0),
        seed: cfg.seed.unwrap_or(0),
        sigma: cfg.noise.map(|n| n.sigma).unwrap_or(0.0),
        eta: None,
        stop: None,
        final_gap: None,
        min_grad_sq: None,
        mean_grad_sq: None,
        fitted_rate: None,
        r_squared: None,
        success: None,
        pass: false,
        error: None,
    };
    let res = prepare(cfg).and_then(|p| execute(&p).map(|r| (p, r)));
    match res {
        Err(e) => row.error = Some(e.to_string()),
        Ok((p, (traj, rep))) => {
            let last = traj.last();
            row.t = p.t;
            row.eta = Some(p.eta);
            row.stop = Some(format!("{:?}", traj.stop));
            row.final_gap = last.gap;
            row.min_grad_sq = traj
                .records
                .iter()
                .map(|r| r.grad_norm * r.grad_norm)
                .reduce(f64::min);
            let mean = if last.t > 0 {
                last.grad_sq_sum / last.t as f64
            } else {
                last.grad_norm * last.grad_norm
            };
            row.mean_grad_sq = Some(mean);
            if let Some(f) = &rep.diagnostics.fitted_rate {
                row.fitted_rate = Some(f.rate());
                row.r_squared = Some(f.r_squared());
            }
            row.success = cfg
                .sgd
                .filter(|_| p.config.method == Method::Sgd)
                .map(|s| mean <= s.epsilon * s.epsilon);
            row.pass = rep.pass;
        }
    }
    row
}

fn summarize(rows: Vec<SweepRow>) -> SweepSummary {
    let mut rate_across_t = Vec::new();
    let mut keys: Vec<(Method, u64, u64)> = Vec::new();
    for r in &rows {
        let k = (r.method, r.seed, r.sigma.to_bits());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    for (m, seed, sig) in keys {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.method == m && r.seed == seed && r.sigma.to_bits() == sig)
            .filter_map(|r| {
                r.final_gap
                    .filter(|g| *g > 0.0)
                    .map(|g| ((r.t as f64).ln(), g.ln()))
            })
            .collect();
        let mut ts: Vec<u64> = pts.iter().map(|p| p.0.to_bits()).collect();
        ts.dedup();
        if ts.len() >= 2 {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let (slope, _, r2) = crate::linalg::linear_fit(&x, &y);
            rate_across_t.push(RateAcrossT {
                method: m,
                seed,
                sigma: f64::from_bits(sig),
                slope,
                r_squared: r2,
            });
        }
    }
    let mut success = Vec::new();
    let mut skeys: Vec<(Method, usize, u64)> = Vec::new();
    for r in rows.iter().filter(|r| r.success.is_some()) {
        let k = (r.method, r.t, r.sigma.to_bits());
        if !skeys.contains(&k) {
            skeys.push(k);
        }
    }
    for (m, t, sig) in skeys {
        let group: Vec<bool> = rows
            .iter()
            .filter(|r| r.method == m && r.t == t && r.sigma.to_bits() == sig)
            .filter_map(|r| r.success)
            .collect();
        success.push(SuccessFraction {
            method: m,
            t,
            sigma: f64::from_bits(sig),
            runs: group.len(),
            fraction: group.iter().filter(|s| **s).count() as f64 / group.len() as f64,
        });
    }
    SweepSummary {
        rows,
        rate_across_t,
        success,
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// `sweep`: one row per grid cell, in cell order, regardless of `jobs`.
pub fn cmd_sweep(cfg: &RunConfig, jobs: Option<usize>) -> Result<SweepSummary> {
    let cells = grid_cells(cfg)?;
    let configs: Vec<RunConfig> = cells.iter().map(|c| cell_config(cfg, c)).collect();
    // validate the first cell up front so malformed configs fail fast
    prepare(&configs[0])?;
    let rows = pool(jobs)?.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, c)| run_cell(i, c))
            .collect::<Vec<_>>()
    });
    Ok(summarize(rows))
}

pub fn write_sweep(summary: &SweepSummary, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    w.write_record([
        "cell",
        "method",
        "T",
        "seed",
        "sigma",
        "eta",
        "final_gap",
        "min_grad_sq",
        "mean_grad_sq",
        "fitted_rate",
        "r_squared",
        "success",
        "pass",
        "error",
    ])?;
    let f = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
    for r in &summary.rows {
        w.write_record([
            r.cell.to_string(),
            serde_json::to_value(r.method)
                .unwrap()
                .as_str()
                .unwrap()
                .to_string(),
            r.t.to_string(),
            r.seed.to_string(),
            format!("{:.16e}", r.sigma),
            f(r.eta),
            f(r.final_gap),
            f(r.min_grad_sq),
            f(r.mean_grad_sq),
            f(r.fitted_rate),
            f(r.r_squared),
            r.success.map(|s| s.to_string()).unwrap_or_default(),
            r.pass.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    write_json(&out.join("sweep.json"), summary)
}

fn sweep_table(s: &SweepSummary) -> String {
    let mut out = format!(
        "{:>5} {:<20} {:>8} {:>6} {:>8} {:>12} {:>12} {:>10} {:>5}\n",
        "cell", "method", "T", "seed", "sigma", "final_gap", "mean_g2", "rate", "pass"
    );
    let f = |v: Option<f64>| v.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into());
    for r in &s.rows {
        out.push_str(&format!(
            "{:>5} {:<20} {:>8} {:>6} {:>8.3} {:>12} {:>12} {:>10} {:>5}\n",
            r.cell,
            format!("{:?}", r.method),
            r.t,
            r.seed,
            r.sigma,
            f(r.final_gap),
            f(r.mean_grad_sq),
            r.fitted_rate
                .map(|v| format!("{v:.3}"))
                .unwrap_or_else(|| "-".into()),
            if r.error.is_some() {
                "err"
            } else if r.pass {
                "ok"
            } else {
                "FAIL"
            }
        ));
    }
    for r in &s.rate_across_t {
        out.push_str(&format!(
            "rate across T: {:?} seed={} sigma={}: slope {:.4} (r2 {:.4})\n",
            r.method, r.seed, r.sigma, r.slope, r.r_squared
        ));
    }
    for r in &s.success {
        out.push_str(&format!(
            "success: {:?} T={} sigma={}: {}/{} = {:.3}\n",
            r.method,
            r.t,
            r.sigma,
            (r.fraction * r.runs as f64).round(),
            r.runs,
            r.fraction
        ));
    }
    out
}

/// Lower-bound parameters from an optional JSON file plus flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundConfig {
    #[serde(rename = "L0", default)]
    pub l0: Option<f64>,
    #[serde(rename = "L2", default)]
    pub l2: Option<f64>,
    #[serde(rename = "G0", default)]
    pub g0: Option<f64>,
    #[serde(rename = "Delta0", default)]
    pub delta0: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub budget: Option<u64>,
}

pub fn cmd_lowerbound(c: &LowerBoundConfig) -> Result<LowerBoundReport> {
    let need =
        |v: Option<f64>, n: &str| v.ok_or_else(|| Error::Config(format!("lowerbound needs {n}")));
    let (l0, l2, g0, d0) = (
        need(c.l0, "L0")?,
        need(c.l2, "L2")?,
        need(c.g0, "G0")?,
        need(c.delta0, "Delta0")?,
    );
    let eta = match c.eta {
        Some(e) => e,
        None => {
            let (lo, hi) = HardInstance::new(l0, l2, g0, d0)?.stuck_range();
            (lo * hi).sqrt()
        }
    };
    let mut s = LowerBoundSetup::new(l0, l2, g0, d0, eta);
    s.budget = c.budget;
    run_lower_bound(&s)
}

fn lowerbound_text(r: &LowerBoundReport) -> String {
    let mut s = format!(
        "hard instance: L0={} L2={} G0={} Delta0={} c={} eta1={:.6e}\n",
        r.instance.l0,
        r.instance.l2,
        r.instance.g0,
        r.instance.delta0,
        r.instance.c,
        r.instance.eta1
    );
    s.push_str(&format!(
        "eta={:.6e} regime={:?} stuck range=[{:.6e}, {:.6e}] floor exp(L2*Delta0/8)/6={:.4}\n",
        r.eta, r.regime, r.stuck_range.0, r.stuck_range.1, r.floor
    ));
    match r.gd.steps_to_stationary {
        Some(t) => s.push_str(&format!(
            "GD from x0={:.6}: |g'| <= 1 after {t} steps\n",
            r.gd.x0
        )),
        None => s.push_str(&format!(
            "GD from x0={:.6}: not 1-stationary within {} steps (budget {})\n",
            r.gd.x0, r.gd.steps_run, r.gd.budget
        )),
    }
    if let Some(o) = &r.orbit {
        s.push_str(&format!(
            "orbit: z={:.12} snapped eta={:.6e} {} exact steps, max ||x_t|-z| = {:e} -> {}\n",
            o.z,
            o.eta_snapped,
            o.steps,
            o.max_deviation,
            if o.period2 {
                "period-2"
            } else {
                "not period-2"
            }
        ));
    }
    s.push_str(&format!(
        "quadratic branch: eta={:.6e} |1-eta*L0|={} {} steps, |x_T|={:.4e} -> {}\n",
        r.quadratic.eta,
        r.quadratic.factor,
        r.quadratic.steps,
        r.quadratic.final_abs,
        if r.quadratic.diverged {
            "diverges"
        } else {
            "does not diverge"
        }
    ));
    s.push_str(&format!(
        "consistent with the lower bound: {}\n",
        r.consistent
    ));
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub entries: Vec<Certification>,
    pub pass: bool,
}

/// `verify`: certifies every catalog entry's stored profile.
pub fn cmd_verify(samples: usize, seed: u64, jobs: Option<usize>) -> Result<VerifyReport> {
    let catalog = catalog()?;
    let plan = SamplePlan::new(samples, seed);
    let entries = pool(jobs)?.install(|| {
        catalog
            .par_iter()
            .map(|o| certify_profile(o, &plan, None))
            .collect::<Result<Vec<_>>>()
    })?;
    let pass = entries.iter().all(Certification::pass);
    Ok(VerifyReport { entries, pass })
}

fn verify_table(r: &VerifyReport) -> String {
    let mut s = format!(
        "{:<44} {:>8} {:>10}\n",
        "objective", "samples", "violations"
    );
    for e in &r.entries {
        s.push_str(&format!(
            "{:<44} {:>8} {:>10}\n",
            e.objective,
            e.checked,
            e.violations.len()
        ));
    }
    s
}

fn tuned_text(p: &TunedParams) -> String {
    let mut s = format!(
        "{:?}: G={:.6e} L={:.6e} rG={:.6e} eta={:.6e}",
        p.method, p.g, p.l, p.r_g, p.eta
    );
    if let Some(t) = p.t {
        s.push_str(&format!(" T={t}"));
    }
    s
}

fn default_out(sub: &str) -> PathBuf {
    PathBuf::from("gensmooth-out").join(sub)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Tune => {
            let cfg = load_config(cli)?;
            let p = cmd_tune(&cfg)?;
            println!("{}", tuned_text(&p));
            println!(
                "{}",
                serde_json::to_string_pretty(&p).map_err(|e| Error::Io(e.to_string()))?
            );
            if let Some(out) = &cfg.out {
                ensure_dir(out)?;
                write_json(&out.join("tuned.json"), &p)?;
            }
            Ok(EXIT_OK)
        }
        Command::Run => {
            let cfg = load_config(cli)?;
            let out = cfg.out.clone().unwrap_or_else(|| default_out("run"));
            let r = cmd_run(&cfg, &out)?;
            println!(
                "{} {:?}: eta={:.6e} T={} stop={:?}",
                r.objective, r.method, r.eta, r.t, r.stop
            );
            for w in &r.warnings {
                println!("warning: {w}");
            }
            print!("{}", r.diagnostics.table());
            if let Some(f) = &r.diagnostics.fitted_rate {
                println!("fitted rate {:.4} (r2 {:.4})", f.rate(), f.r_squared());
            }
            println!("outputs in {}", out.display());
            Ok(if r.pass { EXIT_OK } else { EXIT_RUN_FAILURE })
        }
        Command::Sweep => {
            let cfg = load_config(cli)?;
            let out = cfg.out.clone().unwrap_or_else(|| default_out("sweep"));
            let s = cmd_sweep(&cfg, cli.jobs)?;
            write_sweep(&s, &out)?;
            print!("{}", sweep_table(&s));
            println!("outputs in {}", out.display());
            Ok(EXIT_OK)
        }
        Command::Lowerbound {
            l0,
            l2,
            g0,
            delta0,
            eta,
            budget,
        } => {
            let mut c = match &cli.config {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                    serde_json::from_str::<LowerBoundConfig>(&text)
                        .map_err(|e| Error::Config(e.to_string()))?
                }
                None => LowerBoundConfig::default(),
            };
            c.l0 = l0.or(c.l0);
            c.l2 = l2.or(c.l2);
            c.g0 = g0.or(c.g0);
            c.delta0 = delta0.or(c.delta0);
            c.eta = eta.or(c.eta);
            c.budget = budget.or(c.budget);
            let r = cmd_lowerbound(&c)?;
            print!("{}", lowerbound_text(&r));
            if let Some(out) = &cli.out {
                ensure_dir(out)?;
                write_json(&out.join("lowerbound.json"), &r)?;
            }
            Ok(if r.consistent {
                EXIT_OK
            } else {
                EXIT_RUN_FAILURE
            })
        }
        Command::Verify { samples } => {
            let r = cmd_verify(*samples, cli.seed.unwrap_or(0), cli.jobs)?;
            print!("{}", verify_table(&r));
            if let Some(out) = &cli.out {
                ensure_dir(out)?;
                write_json(&out.join("verify.json"), &r)?;
            }
            Ok(if r.pass { EXIT_OK } else { EXIT_RUN_FAILURE })
        }
    }
}

/// Parses `args` (program name first) and runs the subcommand; returns the
/// process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn quad_cfg(method: Method) -> RunConfig {
        RunConfig::from_json(
            &json!({
                "objective": {"id": "quadratic", "params": {"L": 1.0}},
                "method": method,
                "x0": [1.0],
                "T": 200
            })
            .to_string(),
        )
        .unwrap()
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = r#"{"objective": {"id": "quadratic"}, "method": "gd_convex", "x0": [1.0], "colour": 1}"#;
        assert!(matches!(RunConfig::from_json(bad), Err(Error::Config(_))));
        let bad = r#"{"objective": {"id": "quadratic", "parms": {}}, "method": "gd_convex", "x0": [1.0]}"#;
        assert!(RunConfig::from_json(bad).is_err());
    }

    #[test]
    fn config_round_trip() {
        let mut c = quad_cfg(Method::Sgd);
        c.noise = Some(NoiseModel::heavy_tailed(1.0));
        c.sgd = Some(SgdTargets {
            delta: 0.2,
            epsilon: 0.5,
        });
        c.profile = Some(EllFunction::power_law(1.0, 2.0, 1.0).unwrap());
        c.grid = Some(SweepGrid {
            seed: Some(vec![0, 1]),
            ..Default::default()
        });
        let once = c.to_json().unwrap();
        let twice = RunConfig::from_json(&once).unwrap().to_json().unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn tune_errors_map_to_exit_codes() {
        let mut c = quad_cfg(Method::GdNonconvex);
        c.objective = ObjectiveSpec {
            id: "quartic_well".into(),
            params: Value::Null,
        };
        c.x0 = vec![1.5];
        let p = cmd_tune(&c).unwrap();
        assert!(p.g > 0.0 && p.eta > 0.0);
        c.profile = Some(EllFunction::power_law(1.0, 1.0, 2.0).unwrap());
        let e = cmd_tune(&c).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_NO_FINITE_G);
    }

    #[test]
    fn nag_run_passes_and_divergent_gd_fails() {
        let c = quad_cfg(Method::NagConvex);
        let (_, r) = execute(&prepare(&c).unwrap()).unwrap();
        assert!(r.pass, "{r:?}");
        let mut c = quad_cfg(Method::GdConvex);
        c.eta = Some(4.0);
        c.t = Some(1000);
        let (traj, r) = execute(&prepare(&c).unwrap()).unwrap();
        assert!(!r.pass);
        assert!(traj.stop.is_failure());
    }

    #[test]
    fn sweep_rows_in_cell_order() {
        let mut c = quad_cfg(Method::Sgd);
        c.noise = Some(NoiseModel::gaussian(0.5));
        c.sgd = Some(SgdTargets {
            delta: 0.2,
            epsilon: 0.5,
        });
        c.t = Some(100);
        c.eta = Some(0.1);
        c.grid = Some(SweepGrid {
            seed: Some((0..8).collect()),
            ..Default::default()
        });
        let a = cmd_sweep(&c, Some(1)).unwrap();
        let b = cmd_sweep(&c, Some(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.rows.iter().map(|r| r.seed).collect::<Vec<_>>(),
            (0..8).collect::<Vec<_>>()
        );
        assert_eq!(a.success.len(), 1);
        c.grid = Some(SweepGrid {
            t: Some(vec![]),
            ..Default::default()
        });
        assert!(matches!(cmd_sweep(&c, None), Err(Error::Config(_))));
    }
}
