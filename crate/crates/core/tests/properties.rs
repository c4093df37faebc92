use gensmooth::cli::{ObjectiveSpec, RunConfig, SgdTargets, SweepGrid};
use gensmooth::diagnostics::{
    certify_profile, check_gradient_bound, fit_rate_series, RateMode, SamplePlan,
};
use gensmooth::noise::{NoiseModel, RngStream};
use gensmooth::objectives::{
    catalog, make_cosh, make_exponential, make_quadratic, make_quartic_well, HardInstance,
};
use gensmooth::smoothness::{solve_g, to_radius_profile, GConstraint, GVariant};
use gensmooth::solvers::{nag_sc_weights, nag_weights, run_gd, run_sgd};
use gensmooth::tuner::{predict_bound, tune, Method};
use gensmooth::EllFunction;
use proptest::prelude::*;
use serde_json::json;

fn power_law() -> impl Strategy<Value = EllFunction> {
    (0.0f64..10.0, 0.01f64..10.0, 0.0f64..1.9)
        .prop_map(|(l0, lr, rho)| EllFunction::power_law(l0, lr, rho).unwrap())
}

fn variant() -> impl Strategy<Value = GVariant> {
    prop_oneof![
        Just(GVariant::NonconvexGd),
        (0.5f64..=2.0).prop_map(|alpha| GVariant::NagConvex { alpha }),
        (0.05f64..0.9, 0.0f64..3.0).prop_map(|(delta, sigma)| GVariant::Sgd {
            delta,
            epsilon: 0.1,
            sigma
        }),
        (0.01f64..5.0, 0.5f64..=2.0)
            .prop_map(|(mu, alpha)| GVariant::NagStronglyConvex { mu, alpha }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profiles_are_monotone(ell in power_law(), u1 in 0.0f64..1e6, du in 0.0f64..1e6) {
        prop_assert!(ell.eval(u1).unwrap() <= ell.eval(u1 + du).unwrap());
    }

    #[test]
    fn radius_conversion_shifts_argument(ell in power_law(), a in 1e-3f64..1e3, u in 0.0f64..1e4) {
        let rp = to_radius_profile(&ell, a).unwrap();
        prop_assert_eq!(rp.m(u), ell.at(u + a));
        prop_assert_eq!(rp.r(u), a / ell.at(u + a));
    }

    #[test]
    fn solve_g_is_feasible_and_minimal(
        ell in power_law(),
        v in variant(),
        delta0 in 1e-3f64..10.0,
        grad0 in 0.0f64..10.0,
        dist in 0.0f64..10.0,
    ) {
        let c = GConstraint::new(v, delta0, grad0, dist, ell);
        if let Ok(g) = solve_g(&c) {
            prop_assert!(c.phi(g) <= g * (1.0 + 1e-9));
            let half = 0.5 * g;
            prop_assert!(!c.satisfied(half) || (half - c.explicit_lower()).abs() <= 1e-9 * g || g <= 2.0 * c.explicit_lower().max(1e-300));
        }
    }

    #[test]
    fn constant_profile_reduces_to_closed_form(l in 0.01f64..100.0, delta0 in 1e-3f64..100.0, grad0 in 0.0f64..100.0) {
        let c = GConstraint::new(GVariant::NonconvexGd, delta0, grad0, 0.0, EllFunction::constant(l).unwrap());
        let g = solve_g(&c).unwrap();
        let want = (32.0 * l * delta0).sqrt().max(2.0 * grad0);
        prop_assert!((g - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn certification_is_monotone_in_profile(s0 in 1.0f64..3.0, s1 in 1.0f64..3.0, seed in 0u64..1000) {
        let obj = make_quartic_well().unwrap();
        let (l0, lr, rho) = match obj.profile {
            EllFunction::PowerLaw { l0, lrho, rho } => (l0, lrho, rho),
            _ => unreachable!(),
        };
        let plan = SamplePlan::new(500, seed);
        // a deliberately too-small profile so that both sides can have violations
        let small = EllFunction::power_law(0.3 * l0, 0.3 * lr, rho).unwrap();
        let big = EllFunction::power_law(0.3 * l0 * s0, 0.3 * lr * s1, rho).unwrap();
        let a = certify_profile(&obj, &plan, Some(&small)).unwrap();
        let b = certify_profile(&obj, &plan, Some(&big)).unwrap();
        prop_assert!(b.violations.len() <= a.violations.len());
    }

    #[test]
    fn fit_rate_recovers_exact_slopes(p in 0.1f64..4.0, c in 0.1f64..100.0, q in 0.5f64..0.999) {
        let pow: Vec<(usize, f64)> = (1..300).map(|t| (t, c * (t as f64).powf(-p))).collect();
        prop_assert!((fit_rate_series(&pow, RateMode::Power).unwrap().rate() + p).abs() < 1e-9);
        let lin: Vec<(usize, f64)> = (0..300).map(|t| (t, c * q.powi(t as i32))).collect();
        prop_assert!((fit_rate_series(&lin, RateMode::Linear).unwrap().rate() - q.ln()).abs() < 1e-9);
    }

    #[test]
    fn exceedance_area_beats_rectangle(l in 0.5f64..5.0, k in 2.05f64..3.0, mult in 1.5f64..20.0) {
        let obj = make_quadratic(l, 1).unwrap();
        let traj = run_gd(&obj, &[1.0], k / l, 400, None).unwrap();
        let g = mult * l;
        let gb = check_gradient_bound(&traj, g);
        prop_assert!(gb.tau.is_some());
        if let (Some(uc), Some(rect)) = (gb.s_uc, gb.s_rect) {
            prop_assert!(uc > rect, "S_uc {} S_rect {}", uc, rect);
        }
    }

    #[test]
    fn configs_round_trip(
        method in prop_oneof![Just(Method::GdConvex), Just(Method::NagConvex), Just(Method::Sgd)],
        x0 in -5.0f64..5.0,
        eta in proptest::option::of(1e-6f64..1.0),
        t in proptest::option::of(1usize..100_000),
        seed in proptest::option::of(any::<u64>()),
        sigma in 0.0f64..5.0,
        seeds in proptest::collection::vec(any::<u64>(), 1..5),
    ) {
        let cfg = RunConfig {
            objective: ObjectiveSpec { id: "quadratic".into(), params: json!({"L": 2.5}) },
            method,
            x0: vec![x0],
            eta,
            t,
            seed,
            mu: None,
            alpha: None,
            profile: Some(EllFunction::power_law(1.0, 0.5, 1.0).unwrap()),
            noise: Some(NoiseModel::student_t(3.0, sigma)),
            sgd: Some(SgdTargets { delta: 0.1, epsilon: 0.2 }),
            t_cap: None,
            stride: Some(3),
            grad_tol: None,
            out: None,
            diagnostics: None,
            grid: Some(SweepGrid { seed: Some(seeds), ..Default::default() }),
        };
        let once = cfg.to_json().unwrap();
        let back = RunConfig::from_json(&once).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_json().unwrap(), once);
    }

    #[test]
    fn nag_sc_weight_identity(em in 1e-5f64..0.5) {
        let w = nag_sc_weights(1.0, em, 300).unwrap();
        for s in 0..300 {
            let d = w.b[s + 1] - w.b[s];
            let rhs = w.b[s + 1] * (1.0 + em * w.b[s + 1]);
            if !rhs.is_finite() {
                break;
            }
            prop_assert!((d * d - rhs).abs() <= 1e-10 * rhs, "s={}", s);
        }
        let mut sum = 0.0;
        for t in 1..300 {
            sum += w.b[t].sqrt();
            if !w.b[t].is_finite() {
                break;
            }
            prop_assert!(sum <= 3.0 * w.b[t] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn bounds_are_non_increasing(x0 in 0.2f64..3.0) {
        let cases = [
            (Method::GdConvex, make_quadratic(1.0, 1).unwrap(), None),
            (Method::GdStronglyConvex, make_cosh().unwrap(), None),
            (Method::GdNonconvex, make_quartic_well().unwrap(), None),
            (Method::NagConvex, make_quadratic(2.0, 1).unwrap(), None),
            (Method::Sgd, make_quadratic(1.0, 1).unwrap(), Some((1.0, 0.2, 0.5))),
        ];
        for (m, obj, sgd) in cases {
            let p = tune(m, &obj, &[x0], sgd, None, obj.mu).unwrap();
            let mut prev = f64::INFINITY;
            for t in [1u64, 2, 5, 10, 100, 1000, 100_000] {
                let b = predict_bound(&p, t).unwrap();
                prop_assert!(b <= prev, "{:?} at t={}", m, t);
                prev = b;
            }
        }
    }

    #[test]
    fn hard_instance_is_symmetric(x in 0.0f64..50.0, d0 in 24.0f64..60.0) {
        let h = HardInstance::new(64.0, 1.0, 4.0, d0).unwrap();
        prop_assert_eq!(h.g_value(-x), h.g_value(x));
        prop_assert_eq!(h.g_d1(-x), -h.g_d1(x));
    }

    #[test]
    fn noiseless_sgd_is_gd(x0 in -3.0f64..3.0, eta in 0.001f64..0.1, seed in any::<u64>()) {
        let obj = make_exponential(2.0).unwrap();
        let a = run_gd(&obj, &[x0], eta, 50, None).unwrap();
        let b = run_sgd(&obj, &[x0], eta, 50, &NoiseModel::none(), &mut RngStream::new(seed, 0)).unwrap();
        let xa: Vec<_> = a.records.iter().map(|r| r.x.clone()).collect();
        let xb: Vec<_> = b.records.iter().map(|r| r.x.clone()).collect();
        prop_assert_eq!(xa, xb);
    }
}

#[test]
fn nag_weights_recompute_exactly() {
    let w = nag_weights(0.1, 10_000).unwrap();
    let mut b = 0.0f64;
    for t in 0..=10_000usize {
        assert_eq!(w.b[t].to_bits(), b.to_bits());
        let tf = t as f64;
        assert!(0.25 * tf * tf <= b && b <= tf * tf);
        b += 0.5 * (1.0 + (4.0 * b + 1.0).sqrt());
    }
}

#[test]
fn catalog_gradients_match_finite_differences() {
    for (i, obj) in catalog().unwrap().iter().enumerate() {
        for x in SamplePlan::new(100, i as u64).points(obj) {
            let g = obj.gradient(&x).unwrap()[0];
            let h = 1e-6 * x[0].abs().max(1.0);
            let (xp, xm) = ([x[0] + h], [x[0] - h]);
            if !obj.contains(&xp) || !obj.contains(&xm) {
                continue;
            }
            let fd = (obj.value(&xp).unwrap() - obj.value(&xm).unwrap()) / (2.0 * h);
            // relative to the gradient, or to f/|x| where f dominates rounding
            let scale = g
                .abs()
                .max(obj.value(&x).unwrap().abs() * 1e-4 / h.max(1e-300) * 1e-6)
                .max(1e-8);
            assert!(
                (fd - g).abs() <= 1e-6 * scale,
                "{} at {}: fd {fd} vs {g}",
                obj.name(),
                x[0]
            );
        }
    }
}
