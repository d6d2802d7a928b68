use crawler_ris::dissipation::{DissipationSpec, Friction};
use crawler_ris::initial::{InitialKeyword, InitialState};
use crawler_ris::model::{chi, d_transpose, pi, sigma, CrawlerModel, Spring};
use crawler_ris::oracle::{strategy_result, Strategy as Schedule};
use crawler_ris::presets::{strategy_model, triangle_wave, two_point};
use crawler_ris::solver::{simulate, sweeping_invariant_check, SolverConfig, StepProblem, StepSettings, TieBreak};
use crawler_ris::stasis::build_geometry;
use crawler_ris::timeprog::TimeProgram;
use proptest::prelude::*;

fn coefs(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(0.1f64..3.0, n), prop::collection::vec(0.1f64..3.0, n))
}

fn sized_coefs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..7).prop_flat_map(|n| {
        (
            prop::collection::vec(0.1f64..3.0, n),
            prop::collection::vec(0.1f64..3.0, n),
            prop::collection::vec(-2.0f64..2.0, n),
        )
    })
}

fn chain(k: &[f64], rest: &[f64], minus: &[f64], plus: &[f64]) -> CrawlerModel {
    let n = minus.len();
    CrawlerModel::new(
        (0..n).map(|i| i as f64).collect(),
        (0..n - 1).map(|i| Spring::new(i, i + 1, k[i], TimeProgram::constant(rest[i]))).collect(),
        (0..n).map(|i| Friction::constant(minus[i], plus[i])).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn program_time_scaling(amp in 0.1f64..5.0, factor in 0.25f64..4.0, t in 0.0f64..3.0) {
        let p = triangle_wave(amp);
        let q = p.time_scaled(factor);
        prop_assert!((q.eval(t / factor).unwrap() - p.eval(t).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn dissipation_is_sublinear((m, p, u) in sized_coefs(), v_scale in -2.0f64..2.0, lam in 0.0f64..10.0) {
        let d = DissipationSpec::constant(&m, &p).unwrap();
        let v: Vec<f64> = u.iter().rev().map(|a| a * v_scale).collect();
        let r = |w: &[f64]| d.eval_r(0.0, w).unwrap();
        let su: Vec<f64> = u.iter().map(|a| lam * a).collect();
        prop_assert!((r(&su) - lam * r(&u)).abs() <= 1e-12 * (1.0 + lam * r(&u)));
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        prop_assert!(r(&sum) <= r(&u) + r(&v) + 1e-12);
    }

    #[test]
    fn shape_reduction_bounds((m, p, u) in sized_coefs()) {
        let d = DissipationSpec::constant(&m, &p).unwrap();
        let red = d.shape_reduced(0.0, &sigma(&u)).unwrap();
        prop_assert!(red.value <= d.eval_r(0.0, &u).unwrap() + 1e-12);
        // the minimal translation attains the reduced value
        let best = chi(&sigma(&u), red.vm.midpoint());
        prop_assert!((d.eval_r(0.0, &best).unwrap() - red.value).abs() <= 1e-10 * (1.0 + red.value));
        // and nothing does better along translations
        for s in [-1.0, -0.1, 0.1, 1.0] {
            let x = chi(&sigma(&u), red.vm.midpoint() + s);
            prop_assert!(d.eval_r(0.0, &x).unwrap() >= red.value - 1e-12);
        }
    }

    #[test]
    fn prox_is_optimal((m, p, v) in sized_coefs(), step in 0.01f64..3.0, dir in -1.0f64..1.0) {
        let d = DissipationSpec::constant(&m, &p).unwrap();
        let c = d.coefficients(0.0).unwrap();
        let u = c.prox(step, &v);
        let f = |w: &[f64]| w.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (2.0 * step) + c.eval(w);
        for i in 0..v.len() {
            let mut w = u.clone();
            w[i] += 1e-3 * dir;
            prop_assert!(f(&w) >= f(&u) - 1e-14);
        }
    }

    #[test]
    fn homogeneous_condition_matches_subsets((m, p) in (0.2f64..3.0, 0.2f64..3.0), n in 2usize..9) {
        let hom = DissipationSpec::homogeneous(n, m, p).check_star(0.0).unwrap();
        // identical coefficients, but built point by point
        let d = DissipationSpec::constant(&vec![m; n], &vec![p; n]).unwrap();
        let c = d.coefficients(0.0).unwrap();
        let tie = (0..1u32 << n).any(|mask| {
            let j: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            c.subset_gap(&j).abs() <= 1e-12 * (n as f64) * m.max(p)
        });
        prop_assert_eq!(hom.holds, !tie);
    }

    #[test]
    fn heterogeneous_condition_matches_subsets((m, p) in coefs(5), ties in 0usize..3) {
        // optionally force a balanced subset
        let mut m = m;
        if ties == 1 {
            m[0] = p[1] + p[2] + p[3] + p[4];
        }
        let d = DissipationSpec::constant(&m, &p).unwrap();
        let rep = d.check_star(0.0).unwrap();
        let c = d.coefficients(0.0).unwrap();
        let total: f64 = m.iter().chain(&p).sum();
        let tie = (0..1u32 << 5).any(|mask| {
            let j: Vec<usize> = (0..5).filter(|i| mask >> i & 1 == 1).collect();
            c.subset_gap(&j).abs() <= 1e-12 * total.max(1.0)
        });
        prop_assert_eq!(rep.holds, !tie);
    }

    #[test]
    fn stasis_vertices_in_box((m, p) in coefs(3)) {
        let d = DissipationSpec::constant(&m, &p).unwrap();
        let g = build_geometry(&d, 0.0).unwrap();
        prop_assert!(g.vertices.len() >= 3);
        for (z, full) in g.vertices.iter().zip(&g.vertices_full) {
            prop_assert!(g.excess(z) <= 1e-10);
            let f = d_transpose(z);
            prop_assert!(f.iter().sum::<f64>().abs() <= 1e-12);
            for i in 0..3 {
                prop_assert!((f[i] - full[i]).abs() <= 1e-12);
                prop_assert!(f[i] <= p[i] + 1e-10 && f[i] >= -m[i] - 1e-10);
            }
        }
    }

    #[test]
    fn step_certificate(
        (m, p) in coefs(4),
        k in prop::collection::vec(0.5f64..3.0, 3),
        rest in prop::collection::vec(-1.0f64..1.0, 3),
        x in prop::collection::vec(-0.5f64..0.5, 4),
    ) {
        let model = chain(&k, &rest, &m, &p);
        let e = model.assemble().unwrap();
        let problem = StepProblem::new(&e, model.dissipation().coefficients(0.0).unwrap(), 0.0, &x).unwrap();
        let settings = StepSettings { prox_tol: 1e-10, max_inner_iters: 100_000, tie_break: TieBreak::Midpoint, inner: Default::default() };
        let out = problem.solve(&settings, &mut Vec::new()).unwrap();
        prop_assert!(!out.iter_limit);
        let scale = 1.0 + problem.g.iter().chain(&m).chain(&p).fold(0.0f64, |a, b| a.max(b.abs()));
        prop_assert!(problem.certificate(&out.delta) <= 1e-10 * scale);
        let f0 = problem.objective(&out.delta);
        for i in 0..4 {
            for h in [-1e-4, 1e-4] {
                let mut d = out.delta.clone();
                d[i] += h;
                prop_assert!(problem.objective(&d) >= f0 - 1e-12);
            }
        }
    }

    #[test]
    fn two_point_stays_in_stasis_domain(mu_minus in 0.5f64..3.0, mu_plus in 0.5f64..3.0, amp in 0.5f64..6.0) {
        prop_assume!((mu_minus - mu_plus).abs() > 1e-3);
        let model = two_point(1.0, mu_minus, mu_plus, amp).unwrap();
        let tr = simulate(&model, &SolverConfig::with_steps(200), &[0.0, 0.0], 0.0, 2.0).unwrap();
        prop_assert!(sweeping_invariant_check(&tr, &model).unwrap() <= 1e-9);
        prop_assert!(tr.dissipated.windows(2).all(|w| w[1] >= w[0]));
        for (x, y) in tr.x.iter().zip(&tr.y) {
            prop_assert_eq!(pi(x), *y);
        }
    }

    #[test]
    fn strategies_are_rate_independent(which in prop::sample::select(vec![Schedule::A, Schedule::B, Schedule::C]), l_max in 0.5f64..6.0, factor in prop::sample::select(vec![0.5, 2.0, 4.0])) {
        let model = strategy_model(which, 1.0, 1.0, l_max).unwrap();
        let e = model.assemble().unwrap();
        let x0 = InitialState::Keyword(InitialKeyword::MaxElongation).resolve(&model, &e, 0.0).unwrap();
        let base = simulate(&model, &SolverConfig::with_steps(200), &x0, 0.0, 1.0).unwrap();
        let fast = simulate(&model.time_scaled(factor), &SolverConfig::with_steps((200.0 * factor) as usize), &x0, 0.0, 1.0 / factor).unwrap();
        prop_assert_eq!(base.len(), fast.len());
        for (a, b) in base.x.iter().zip(&fast.x) {
            for i in 0..2 {
                prop_assert!((a[i] - b[i]).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn oracle_scaling(which in prop::sample::select(vec![Schedule::A, Schedule::B, Schedule::C]), r in 0.2f64..8.0, alpha in 0.1f64..10.0) {
        prop_assume!([1.0, 2.0, 3.0, 4.0].iter().all(|b| (r - b).abs() > 1e-6));
        let a = strategy_result(which, 1.0, 1.0, r).unwrap();
        let b = strategy_result(which, alpha, alpha, r).unwrap();
        prop_assert!((a.per_cycle_displacement - b.per_cycle_displacement).abs() <= 1e-12 * (1.0 + r));
        prop_assert_eq!(a.slip_onsets.len(), b.slip_onsets.len());
    }
}
