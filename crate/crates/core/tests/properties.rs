use multibump::geometry::chain::index_distance;
use multibump::geometry::{chain_admissible, chain_from_params, make_curve, CurveSource, SeparationScales};
use multibump::pde::banded::BandMatrix;
use multibump::pde::build_strip_grid;
use multibump::pde::export::{field_from_table, field_to_csv, parse_field_csv};
use multibump::pde::GridField;
use multibump::pipeline::{parse_config, RunConfig};
use multibump::profile::cache::{parse_profile_meta, ProfileMeta};
use multibump::profile::{NonlinearityKind, NonlinearitySpec};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    (
        -2.4f64..6.0,
        prop_oneof![Just(0.05), Just(0.1), Just(0.25)],
        1usize..5,
        0..=i64::MAX as u64,
        prop::collection::btree_set(2u32..500, 3..6),
        (0.5f64..4.0, 0.5f64..4.0),
        prop_oneof![Just(None), (8.0f64..30.0).prop_map(Some)],
        prop::bool::ANY,
        1e-12f64..1e-4,
    )
        .prop_map(|(lambda, h, k, seed, rs, (a, w), l_xi, segment, tol)| {
            let curve = if segment {
                CurveSource::segment([0.0, 0.0], [1.0, 0.5])
            } else {
                CurveSource::circle([0.5, -1.0], 2.0)
            };
            RunConfig {
                curve,
                lambda,
                h,
                l_xi,
                n: 2 * k,
                sweep_r: rs.into_iter().map(f64::from).collect(),
                fit_window: (a, a + w),
                tol_reduce: tol,
                seed,
                ..RunConfig::default()
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn config_text_round_trips(cfg in config_strategy()) {
        let back = parse_config(&cfg.to_text()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn config_parser_never_panics(text in "\\PC{0,200}") {
        let _ = parse_config(&text);
    }

    #[test]
    fn config_lines_point_into_the_file(key in "[a-z]{1,8}", v in -5i32..5) {
        let text = format!("seed = 1\n\n[physics]\nlambda = {v}\n{key}_x = 3\n");
        if let Err(multibump::Error::Config { line, .. }) = parse_config(&text) {
            prop_assert!(line >= 1 && line <= text.lines().count());
        } else {
            prop_assert!(false, "unknown key accepted");
        }
    }

    #[test]
    fn profile_meta_round_trips(
        sign in prop_oneof![Just(1i8), Just(-1i8)],
        lambda in -2.4f64..10.0,
        p in 1.1f64..7.0,
        p_minus in prop::option::of(1.1f64..7.0),
        h in 0.01f64..0.5,
        vals in prop::array::uniform5(-1e6f64..1e6),
    ) {
        let meta = ProfileMeta {
            sign, lambda, p, p_minus, h,
            l_xi: vals[0].abs(), mu: vals[1].abs(), mu_fit: vals[2].abs(), energy: vals[3], residual: vals[4].abs(),
        };
        prop_assert_eq!(parse_profile_meta(&meta.to_text()).unwrap(), meta);
    }

    #[test]
    fn profile_meta_parser_never_panics(text in "\\PC{0,200}") {
        let _ = parse_profile_meta(&text);
    }

    #[test]
    fn field_csv_round_trips(vals in prop::collection::vec(-1e3f64..1e3, 7 * 15)) {
        // 8/h intervals along xi, 2/h across: 7 x 15 unknowns at h = 0.125
        let grid = build_strip_grid(0.5, 0.125).unwrap();
        prop_assume!(grid.len() == vals.len());
        let field = GridField::new(grid.clone(), vals).unwrap();
        let table = parse_field_csv(&field_to_csv(&field)).unwrap();
        let back = field_from_table(&grid, &table).unwrap();
        for (a, b) in field.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn field_csv_parser_never_panics(text in "(xi,eta,value\n)?[-0-9.e,\n]{0,200}") {
        let _ = parse_field_csv(&text);
    }

    #[test]
    fn nonlinearity_f_is_derivative_of_antiderivative(
        p in 1.5f64..6.0, q in 1.5f64..6.0, u in -3.0f64..3.0,
    ) {
        let nl = NonlinearitySpec::new(NonlinearityKind::TwoPower { p_plus: p, p_minus: q }).unwrap();
        let e = 1e-6;
        let fd = (nl.big_f(u + e) - nl.big_f(u - e)) / (2.0 * e);
        prop_assert!((fd - nl.f(u)).abs() < 1e-6 * (1.0 + nl.f(u).abs()));
        let dfd = (nl.f(u + e) - nl.f(u - e)) / (2.0 * e);
        prop_assert!((dfd - nl.df(u)).abs() < 1e-5 * (1.0 + nl.df(u).abs()));
        prop_assert!(nl.big_f(u) >= 0.0);
    }

    #[test]
    fn cubic_splitting_bounds_are_finite(u in prop::collection::vec(-2.0f64..2.0, 2..4)) {
        let t = NonlinearitySpec::cubic().splitting_terms(&u);
        prop_assert!(t.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn ldl_inertia_matches_dense_eigenvalues(
        n in 4usize..14,
        bw in 1usize..4,
        entries in prop::collection::vec(-1.0f64..1.0, 14 * 4),
        diag in prop::collection::vec(-3.0f64..3.0, 14),
    ) {
        let mut band = BandMatrix::zeros(n, bw);
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            band.add(i, i, diag[i]);
            dense[(i, i)] = diag[i];
            for k in 1..=bw.min(i) {
                let v = entries[i * 4 + k];
                band.add(i, i - k, v);
                dense[(i, i - k)] = v;
                dense[(i - k, i)] = v;
            }
        }
        let eig = dense.clone().symmetric_eigen();
        let min_abs = eig.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        prop_assume!(min_abs > 1e-6);
        if let Ok(f) = band.factor() {
            let neg = eig.eigenvalues.iter().filter(|v| **v < 0.0).count();
            prop_assert_eq!(f.negative_pivots(), neg);
            let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let mut x = b.clone();
            f.solve_in_place(&mut x);
            let ax = &dense * nalgebra::DVector::from_vec(x);
            let res = ax.iter().zip(&b).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            prop_assert!(res < 1e-7 / min_abs.min(1.0), "residual {}", res);
        }
    }

    #[test]
    fn index_distance_is_a_metric(n in 2usize..30, i in 0usize..30, j in 0usize..30, k in 0usize..30, wrap in any::<bool>()) {
        let (i, j, k) = (i % n, j % n, k % n);
        let d = |a, b| index_distance(n, a, b, wrap);
        prop_assert_eq!(d(i, j), d(j, i));
        prop_assert_eq!(d(i, i), 0);
        prop_assert!(d(i, k) <= d(i, j) + d(j, k));
        if wrap {
            prop_assert!(d(i, j) <= n / 2);
        }
    }

    #[test]
    fn chains_alternate_and_scale_with_r(k in 1usize..5, r in 2.0f64..200.0, offset in 0.0f64..0.5) {
        let curve = make_curve(&CurveSource::circle([0.0, 0.0], 1.0)).unwrap();
        let n = 2 * k;
        let t: Vec<f64> = (0..n).map(|i| (i as f64 + offset) / n as f64).collect();
        let chain = chain_from_params(&curve, r, &t).unwrap();
        for (i, s) in chain.signs().iter().enumerate() {
            prop_assert_eq!(*s, if i % 2 == 0 { 1 } else { -1 });
        }
        let expect = 2.0 * r * (std::f64::consts::PI / n as f64).sin();
        prop_assert!((chain.min_separation() - expect).abs() < 1e-9 * r);
        let scales = SeparationScales::new(1.862096, 0.75, r).unwrap();
        prop_assert!(scales.g2 < scales.g1);
        let rep = chain_admissible(&chain, &scales, 1, false);
        prop_assert_eq!(rep.admissible, expect > scales.g1);
    }

    #[test]
    fn odd_chains_are_refused_on_closed_curves(k in 0usize..4) {
        let curve = make_curve(&CurveSource::circle([0.0, 0.0], 1.0)).unwrap();
        let n = 2 * k + 1;
        let t: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        prop_assert!(matches!(chain_from_params(&curve, 20.0, &t), Err(multibump::Error::OddChainOnClosedCurve(_))));
    }
}
