//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when
//! any criterion fails. Run with `cargo test --test acceptance`.

use std::time::{Duration, Instant};

use gensmooth::diagnostics::{
    certify_profile, check_descent, check_gradient_bound, check_local_lipschitz, check_reverse_pl,
    check_theorem_bound, fit_rate, fit_rate_series, level_set_m, sgd_exceedance_report,
    LevelSetSearch, RateMode, SamplePlan,
};
use gensmooth::lowerbound::{gd_on_hard, quadratic_branch, verify_stuck_orbit};
use gensmooth::noise::{NoiseModel, RngStream};
use gensmooth::objectives::{
    catalog, make_cosh, make_exponential, make_polynomial, make_quadratic, make_quartic_well,
    make_rational_inverse, HardInstance, Objective,
};
use gensmooth::smoothness::{solve_g, EllFunction, GConstraint, GVariant};
use gensmooth::solvers::{
    nag_sc_weights, nag_weights, run_gd, run_nag, run_nag_sc, run_sgd_opts, RunOptions,
};
use gensmooth::tuner::{predict_bound, tune, Method, TunedParams};
use gensmooth::Error;
use rayon::prelude::*;

type Outcome = Result<Vec<String>, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s(e: Error) -> String {
    e.to_string()
}

fn tuned(
    method: Method,
    obj: &Objective,
    x0: f64,
    alpha: Option<f64>,
) -> Result<TunedParams, String> {
    tune(method, obj, &[x0], None, alpha, obj.mu).map_err(e2s)
}

/// Every `t ≥ 1` of the trajectory against the tuner's bound.
fn bound_violations(
    traj: &gensmooth::Trajectory,
    p: &TunedParams,
    upto: usize,
) -> Result<usize, String> {
    let mut bad = 0;
    for r in traj.records.iter().filter(|r| r.t >= 1 && r.t <= upto) {
        let b = predict_bound(p, r.t as u64).map_err(e2s)?;
        let lhs = r.gap.ok_or("missing gap")?;
        if lhs.is_nan() || lhs > b * (1.0 + 1e-12) {
            bad += 1;
        }
    }
    Ok(bad)
}

fn c1_convex_gd() -> Outcome {
    let obj = make_polynomial(&[0.0, 0.0, 0.0, 0.0, 1.0]).map_err(e2s)?;
    let p = tuned(Method::GdConvex, &obj, 1.0, None)?;
    let traj = run_gd(&obj, &[1.0], p.eta, 10_000, None).map_err(e2s)?;
    let mut lines = vec![format!("x^4: eta={:.6e}", p.eta)];
    for t in [10usize, 100, 1000, 10_000] {
        let r = traj.record_at(t).ok_or(format!("no record at {t}"))?;
        let b = predict_bound(&p, t as u64).map_err(e2s)?;
        let gap = r.gap.unwrap();
        lines.push(format!("T={t}: gap {gap:.4e} <= bound {b:.4e}"));
        ensure(gap <= b, format!("gap {gap:e} exceeds {b:e} at T={t}"))?;
    }
    let all = check_theorem_bound(&traj, &p).map_err(e2s)?;
    ensure(
        all.pass,
        format!("bound violated at {} steps", all.violations),
    )?;
    let mut worst = 0.0f64;
    for w in traj.records.windows(2) {
        let (a, b) = (w[0].grad_norm, w[1].grad_norm);
        ensure(
            b <= a * (1.0 + 1e-12),
            format!("gradient norm grew at t={}", w[1].t),
        )?;
        worst = worst.max(b / a);
    }
    lines.push(format!(
        "gradient norm non-increasing over {} steps",
        traj.len() - 1
    ));
    Ok(lines)
}

fn c2_strongly_convex_gd() -> Outcome {
    let obj = make_cosh().map_err(e2s)?;
    let p = tuned(Method::GdStronglyConvex, &obj, 2.0, None)?;
    let traj = run_gd(&obj, &[2.0], p.eta, 10_000, None).map_err(e2s)?;
    let bad = bound_violations(&traj, &p, 10_000)?;
    ensure(bad == 0, format!("{bad} bound violations"))?;
    let mu = obj.mu.unwrap();
    let predicted = (1.0 - p.eta * mu).ln();
    // fit while the gap is well above rounding
    let g0 = traj.first().gap.unwrap();
    let series: Vec<(usize, f64)> = traj
        .gaps()
        .into_iter()
        .filter(|&(_, g)| g > 1e-12 * g0.max(1.0))
        .collect();
    let fit = fit_rate_series(&series, RateMode::Linear).map_err(e2s)?;
    ensure(
        fit.rate() <= 0.9 * predicted,
        format!(
            "fitted log-rate {:.6} > 0.9·log(1-eta mu) = {:.6}",
            fit.rate(),
            0.9 * predicted
        ),
    )?;
    Ok(vec![
        format!(
            "cosh: eta={:.6e} mu={mu}; bound holds for all T <= 10^4",
            p.eta
        ),
        format!(
            "fitted log-rate {:.6} over {} points <= 0.9·{:.6}",
            fit.rate(),
            series.len(),
            predicted
        ),
    ])
}

fn c3_nag() -> Outcome {
    let mut lines = Vec::new();
    for (name, obj, x0) in [
        ("quadratic L=1", make_quadratic(1.0, 1).map_err(e2s)?, 1.0),
        (
            "x^4",
            make_polynomial(&[0.0, 0.0, 0.0, 0.0, 1.0]).map_err(e2s)?,
            1.0,
        ),
    ] {
        let p = tuned(Method::NagConvex, &obj, x0, None)?;
        let traj = run_nag(&obj, &[x0], p.eta, 10_000).map_err(e2s)?;
        let r0 = traj.first();
        let b0 = predict_bound(&p, 0).map_err(e2s)?;
        ensure(r0.gap.unwrap() <= b0, format!("{name}: bound fails at T=0"))?;
        let bad = bound_violations(&traj, &p, 10_000)?;
        ensure(bad == 0, format!("{name}: {bad} bound violations"))?;
        lines.push(format!(
            "{name}: eta={:.6e} alpha={:?}; bound holds for all T <= 10^4",
            p.eta, p.inputs.alpha
        ));
        if name.starts_with("quadratic") {
            let fit = fit_rate(&traj, RateMode::Power, (100, 10_000)).map_err(e2s)?;
            ensure(
                fit.rate() <= -1.7,
                format!("power slope {:.3} > -1.7", fit.rate()),
            )?;
            lines.push(format!(
                "quadratic power slope over [1e2, 1e4]: {:.3}",
                fit.rate()
            ));
        }
        let w = nag_weights(p.eta, 10_000).map_err(e2s)?;
        for (t, &b) in w.b.iter().enumerate() {
            let tf = t as f64;
            ensure(
                0.25 * tf * tf <= b && b <= tf * tf,
                format!("B_{t} = {b} outside [t²/4, t²]"),
            )?;
        }
        let lemma = w.lemma_series();
        let worst = lemma.iter().cloned().fold(0.0, f64::max);
        ensure(worst <= 4.0, format!("weights expression reaches {worst}"))?;
        lines.push(format!(
            "{name}: t²/4 <= B_t <= t² and weights expression max {worst:.4} <= 4"
        ));
    }
    Ok(lines)
}

fn c4_nag_sc() -> Outcome {
    let obj = make_cosh().map_err(e2s)?;
    let p = tuned(Method::NagStronglyConvex, &obj, 2.0, None)?;
    let mu = obj.mu.unwrap();
    let traj = run_nag_sc(&obj, &[2.0], p.eta, mu, 1000).map_err(e2s)?;
    let bad = bound_violations(&traj, &p, 1000)?;
    ensure(bad == 0, format!("{bad} bound violations"))?;
    let mut lines = vec![format!(
        "cosh: eta={:.6e} mu={mu}; bound holds for all T <= 10^3",
        p.eta
    )];
    for em in [1e-2, 1e-4] {
        let w = nag_sc_weights(1.0, em, 500).map_err(e2s)?;
        let mut worst = 0.0f64;
        for t in 0..500 {
            for s in 0..=t {
                worst = worst.max(w.tau[t] * w.delta[s]);
            }
        }
        ensure(
            worst <= 1.0,
            format!("eta mu={em}: max tau_t delta_s = {worst}"),
        )?;
        let q = 1.0 + em.sqrt();
        for t in 1..=500 {
            ensure(
                w.b[t] >= q.powi(t as i32 - 1),
                format!("eta mu={em}: B_{t} below (1+sqrt(eta mu))^(t-1)"),
            )?;
        }
        lines.push(format!(
            "eta mu={em}: max tau_t delta_s = {worst:.6} <= 1; B_t growth holds for t <= 500"
        ));
    }
    Ok(lines)
}

fn c5_nonconvex_gd() -> Outcome {
    let obj = make_quartic_well().map_err(e2s)?;
    let p = tuned(Method::GdNonconvex, &obj, 1.5, None)?;
    let traj = run_gd(&obj, &[1.5], p.eta, 10_000, None).map_err(e2s)?;
    let c = check_theorem_bound(&traj, &p).map_err(e2s)?;
    ensure(
        c.pass,
        format!("averaged gradient bound violated at {} steps", c.violations),
    )?;
    let gb = check_gradient_bound(&traj, p.g);
    ensure(
        gb.tau.is_none(),
        format!("gradient exceeded G at t={:?}", gb.tau),
    )?;
    let descent = check_descent(&traj, p.eta, p.l);
    ensure(descent.pass, "descent inequality violated")?;
    let max_g = traj.grad_norms().into_iter().fold(0.0, f64::max);
    Ok(vec![format!(
        "quartic well: G={:.4} eta={:.6e}; averaged bound holds for T <= 10^4; max |f'| = {max_g:.4} <= G",
        p.g, p.eta
    )])
}

fn c6_sgd() -> Outcome {
    const CAP: u64 = 100_000;
    let (sigma, delta, eps) = (1.0, 0.2, 0.5);
    let obj = make_quadratic(1.0, 1).map_err(e2s)?;
    let p = tune(
        Method::Sgd,
        &obj,
        &[1.0],
        Some((sigma, delta, eps)),
        None,
        None,
    )
    .map_err(e2s)?;
    let theorem_t = p.t.unwrap();
    let t = theorem_t.min(CAP);
    let mut lines = Vec::new();
    let threshold = if theorem_t > CAP {
        let floor = predict_bound(&p, t).map_err(e2s)?;
        lines.push(format!(
            "theorem T = {theorem_t} capped at {CAP}; checking against 2Δ0/(ηT)+ηLσ² = {floor:.4e}"
        ));
        (eps * eps).max(floor)
    } else {
        eps * eps
    };
    let noise = NoiseModel::heavy_tailed(sigma);
    let thr = p.noise_threshold();
    let runs: Vec<(f64, bool)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = RngStream::new(seed, 0);
            let opts = RunOptions {
                grad_tol: None,
                stride: 1,
            };
            let traj = run_sgd_opts(&obj, &[1.0], p.eta, t as usize, &noise, &mut rng, &opts)
                .map_err(e2s)?;
            let last = traj.last();
            let mean = last.grad_sq_sum / last.t as f64;
            let ex = sgd_exceedance_report(&traj, p.g, thr).map_err(e2s)?;
            Ok((mean, ex.tau2 < last.t))
        })
        .collect::<Result<_, String>>()?;
    let n = runs.len() as f64;
    let success = runs.iter().filter(|r| r.0 <= threshold).count() as f64 / n;
    let literal = runs.iter().filter(|r| r.0 <= eps * eps).count() as f64 / n;
    let exceed = runs.iter().filter(|r| r.1).count() as f64 / n;
    lines.push(format!(
        "eta={:.4e} G={:.4} L={:.4}; success fraction {success:.2} (literal eps² fraction {literal:.2}); tau2 exceedance fraction {exceed:.2}",
        p.eta, p.g, p.l
    ));
    ensure(success >= 0.8, format!("success fraction {success} < 0.8"))?;
    ensure(
        exceed <= delta / 4.0 + 0.05,
        format!("exceedance fraction {exceed} > {}", delta / 4.0 + 0.05),
    )?;
    Ok(lines)
}

fn c7_lower_bound() -> Outcome {
    let mut lines = Vec::new();
    for d0 in [24.0, 40.0] {
        let h = HardInstance::new(64.0, 1.0, 4.0, d0).map_err(e2s)?;
        let (lo, hi) = h.stuck_range();
        let eta = (lo * hi).sqrt();
        let orbit = verify_stuck_orbit(&h, eta, 1000).map_err(e2s)?;
        ensure(
            orbit.period2 && orbit.max_deviation <= 1e-9,
            format!("L2Δ0={d0}: orbit deviation {:e}", orbit.max_deviation),
        )?;
        let floor = h.step_floor;
        let slow_eta = 0.5 * lo;
        let budget = (10.0 * floor).ceil() as u64;
        let gd = gd_on_hard(&h, h.x0, slow_eta, budget.max(100_000));
        let steps = gd.steps_to_stationary.unwrap_or(gd.steps_run);
        ensure(
            steps as f64 >= floor,
            format!("L2Δ0={d0}: stationary after {steps} < {floor} steps"),
        )?;
        let q = quadratic_branch(64.0, 4.0 / 64.0, 1.0, 100).map_err(e2s)?;
        ensure(
            q.diverged && q.strictly_increasing,
            "quadratic branch does not diverge monotonically",
        )?;
        lines.push(format!(
            "L2Δ0={d0}: stuck range [{lo:.4e}, {hi:.4e}], |x_t| = {:.9} for 1000 steps (dev {:.1e}); eta={slow_eta:.3e}: {} steps >= floor {floor:.2}; quadratic |x_T| = {:.3e}",
            orbit.z,
            orbit.max_deviation,
            match gd.steps_to_stationary {
                Some(t) => t.to_string(),
                None => format!("> {}", gd.steps_run),
            },
            q.final_abs
        ));
    }
    Ok(lines)
}

fn c8_certification() -> Outcome {
    let plan = SamplePlan::new(10_000, 0);
    let catalog = catalog().map_err(e2s)?;
    let certs: Vec<_> = catalog
        .par_iter()
        .map(|o| certify_profile(o, &plan, None))
        .collect::<Result<_, _>>()
        .map_err(e2s)?;
    let mut lines = Vec::new();
    for c in &certs {
        ensure(
            c.pass(),
            format!("{}: {} violations", c.objective, c.violations.len()),
        )?;
    }
    lines.push(format!(
        "{} catalog entries, zero violations over 10^4 samples each",
        certs.len()
    ));
    let e = make_exponential(std::f64::consts::E).map_err(e2s)?;
    let halved = EllFunction::power_law(0.0, 0.5, 1.0).map_err(e2s)?;
    let neg1 = certify_profile(&e, &plan, Some(&halved)).map_err(e2s)?;
    ensure(!neg1.pass(), "halved exponential profile certified")?;
    let r = make_rational_inverse().map_err(e2s)?;
    let (l0, lrho) = match r.profile {
        EllFunction::PowerLaw { l0, lrho, .. } => (l0, lrho),
        _ => return Err("1/x profile is not a power law".into()),
    };
    let low_rho = EllFunction::power_law(l0, lrho, 1.25).map_err(e2s)?;
    let neg2 = certify_profile(&r, &plan, Some(&low_rho)).map_err(e2s)?;
    ensure(!neg2.pass(), "1/x with rho=1.25 certified")?;
    lines.push(format!(
        "negative controls: halved exponential {} violations, 1/x with rho=1.25 {} violations",
        neg1.violations.len(),
        neg2.violations.len()
    ));
    Ok(lines)
}

fn c9_lemma_suites() -> Outcome {
    let catalog: Vec<Objective> = catalog()
        .map_err(e2s)?
        .into_iter()
        .filter(|o| o.bounded_below && o.f_star.is_some())
        .collect();
    let results: Vec<Result<String, String>> = catalog
        .par_iter()
        .enumerate()
        .map(|(i, o)| {
            let pts = SamplePlan::new(100, 100 + i as u64).points(o);
            let rp = check_reverse_pl(o, &pts).map_err(e2s)?;
            ensure(
                rp.pass,
                format!("{}: reverse PL fails ({} points)", o.name(), rp.violations),
            )?;
            let ll = if o.closed {
                let c = check_local_lipschitz(o, &pts, 1.0, 1.0, 4, i as u64).map_err(e2s)?;
                ensure(
                    c.pass,
                    format!("{}: local Lipschitz fails: {c:?}", o.name()),
                )?;
                "ok"
            } else {
                "skipped (not closed)"
            };
            let search = LevelSetSearch::default();
            let mut worst = 0.0f64;
            for x in &pts {
                let m = level_set_m(o, x[0], &search).map_err(|e| format!("{}: {e}", o.name()))?;
                ensure(
                    m.within_bound(1e-6),
                    format!(
                        "{}: M={} above root {:?} from x0={}",
                        o.name(),
                        m.m,
                        m.analytic_root,
                        x[0]
                    ),
                )?;
                worst = worst.max(m.m / m.analytic_root.unwrap());
            }
            Ok(format!(
                "{}: reverse PL ok, local Lipschitz {ll}, M/root max {worst:.4}",
                o.name()
            ))
        })
        .collect();
    let mut lines = Vec::new();
    for r in results {
        lines.push(r?);
    }
    let r = make_rational_inverse().map_err(e2s)?;
    let near: Vec<Vec<f64>> = (0..100).map(|i| vec![0.05 + 0.001 * i as f64]).collect();
    let neg = check_local_lipschitz(&r, &near, 1.0, 10.0, 4, 7).map_err(e2s)?;
    ensure(!neg.pass, "10x radius on 1/x passed local Lipschitz")?;
    lines.push(format!(
        "negative control: 10x radius on 1/x gives {} violations",
        neg.violations
    ));
    Ok(lines)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c10_solve_g() -> Outcome {
    let mut checked = 0;
    let mut worst = 0.0f64;
    for &d0 in &[0.01, 0.5, 1.0, 7.0, 100.0] {
        for &g0 in &[0.0, 0.3, 1.0, 20.0, 500.0] {
            for &l in &[0.1, 1.0, 2.0, 50.0] {
                let ell = EllFunction::constant(l).map_err(e2s)?;
                let g = solve_g(&GConstraint::new(
                    GVariant::NonconvexGd,
                    d0,
                    g0,
                    0.0,
                    ell.clone(),
                ))
                .map_err(e2s)?;
                let want = (32.0 * l * d0).sqrt().max(2.0 * g0);
                worst = worst.max(rel(g, want));
                let dist = 1.5;
                let gn = solve_g(&GConstraint::new(
                    GVariant::NagConvex { alpha: 2.0 },
                    d0,
                    g0,
                    dist,
                    ell.clone(),
                ))
                .map_err(e2s)?;
                let want_n = (8.0 * (l * (d0 + dist)).sqrt()).max(g0);
                worst = worst.max(rel(gn, want_n));
                let (delta, sigma) = (0.5, 1.0);
                let gs = solve_g(&GConstraint::new(
                    GVariant::Sgd {
                        delta,
                        epsilon: 0.1,
                        sigma,
                    },
                    d0,
                    g0,
                    0.0,
                    ell,
                ))
                .map_err(e2s)?;
                let want_s = (40.0 * ((d0 + 2.0 * sigma) * l / delta).sqrt())
                    .max(2.0 * g0)
                    .max(sigma);
                worst = worst.max(rel(gs, want_s));
                checked += 3;
            }
            // PowerLaw(0,1,1): G ≥ √(32GΔ₀) ⇔ G ≥ 32Δ₀
            let lin = EllFunction::power_law(0.0, 1.0, 1.0).map_err(e2s)?;
            let g =
                solve_g(&GConstraint::new(GVariant::NonconvexGd, d0, g0, 0.0, lin)).map_err(e2s)?;
            worst = worst.max(rel(g, (32.0 * d0).max(2.0 * g0)));
            checked += 1;
        }
    }
    ensure(worst <= 1e-9, format!("worst relative error {worst:e}"))?;
    let sq = EllFunction::power_law(0.0, 1.0, 2.0).map_err(e2s)?;
    let r = solve_g(&GConstraint::new(GVariant::NonconvexGd, 1.0, 1.0, 0.0, sq));
    ensure(
        matches!(r, Err(Error::NoFiniteG { .. })),
        format!("rho=2 gave {r:?}"),
    )?;
    Ok(vec![format!(
        "{checked} closed-form cases, worst relative error {worst:.2e}; rho=2 -> NoFiniteG"
    )])
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 convex GD bound", Duration::from_secs(1), c1_convex_gd),
        (
            "2 strongly convex GD",
            Duration::from_secs(1),
            c2_strongly_convex_gd,
        ),
        ("3 NAG acceleration", Duration::from_secs(5), c3_nag),
        ("4 NAG strongly convex", Duration::from_secs(2), c4_nag_sc),
        ("5 nonconvex GD", Duration::from_secs(1), c5_nonconvex_gd),
        ("6 SGD high probability", Duration::from_secs(60), c6_sgd),
        ("7 lower bound", Duration::from_secs(1), c7_lower_bound),
        (
            "8 smoothness certification",
            Duration::from_secs(5),
            c8_certification,
        ),
        (
            "9 lemma property suites",
            Duration::from_secs(5),
            c9_lemma_suites,
        ),
        (
            "10 solve_G closed forms",
            Duration::from_millis(100),
            c10_solve_g,
        ),
    ];
    let mut failed = 0;
    for (name, budget, f) in criteria {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let within = took <= budget;
        let (ok, detail) = match &out {
            Ok(lines) => (within, lines.clone()),
            Err(e) => (false, vec![e.clone()]),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name} ({:.3} s, budget {:.1} s{})",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs_f64(),
            if within { "" } else { ", over budget" }
        );
        for l in detail {
            println!("     {l}");
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
