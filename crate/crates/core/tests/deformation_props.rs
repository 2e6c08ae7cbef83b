use ncspectra_core::evenpower::{indicial_exponent, PrefactorExponents, Recurrence, SignMode};
use ncspectra_core::invpower::{poly_from_roots, split_roots};
use ncspectra_core::report::{rows_table, SplittingReport, SplittingRow};
use ncspectra_core::{deform, NcContext, PotentialSpec};
use proptest::prelude::*;

const TOL: f64 = 1e-15;

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= TOL * x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}

fn even() -> impl Strategy<Value = PotentialSpec> {
    (0.01..10.0_f64, -10.0..10.0_f64, -10.0..10.0_f64).prop_map(|(a, b, c)| PotentialSpec::even_power(a, b, c))
}

fn inverse() -> impl Strategy<Value = PotentialSpec> {
    (-10.0..10.0_f64, -10.0..10.0_f64).prop_map(|(a, b)| PotentialSpec::inverse_power(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn even_map_is_exact(spec in even(), theta in -1.0..1.0_f64, m in -8i32..=8) {
        let tm = theta * f64::from(m);
        let p = deform(spec, NcContext::new(theta, m)).unwrap();
        prop_assert_eq!(p.coefficient(2), spec.a);
        prop_assert_eq!(p.coefficient(-2), spec.b);
        prop_assert!(close(p.coefficient(-4), spec.c + spec.b / 4.0 * tm));
        prop_assert!(close(p.coefficient(-6), spec.c / 2.0 * tm));
        prop_assert!(close(p.energy_shift, spec.a / 2.0 * tm));
        prop_assert!(close(p.centrifugal, f64::from(m * m) - 0.25));
    }

    #[test]
    fn inverse_map_is_exact(spec in inverse(), theta in -1.0..1.0_f64, m in -8i32..=8) {
        let tm = theta * f64::from(m);
        let p = deform(spec, NcContext::new(theta, m)).unwrap();
        prop_assert_eq!(p.coefficient(-1), spec.a);
        prop_assert_eq!(p.coefficient(-2), spec.b);
        prop_assert!(close(p.coefficient(-3), spec.a / 2.0 * tm));
        prop_assert!(close(p.coefficient(-4), spec.b / 4.0 * tm));
        prop_assert_eq!(p.energy_shift, 0.0);
    }

    #[test]
    fn deformation_is_linear_in_theta_m(spec in prop_oneof![even(), inverse()], theta in -1.0..1.0_f64, m in 1i32..=8) {
        let base = deform(spec, NcContext::new(0.0, m)).unwrap();
        let one = deform(spec, NcContext::new(theta, m)).unwrap();
        let two = deform(spec, NcContext::new(2.0 * theta, m)).unwrap();
        for k in [-3, -4, -6] {
            let (f0, f1, f2) = (base.coefficient(k), one.coefficient(k), two.coefficient(k));
            let scale = f0.abs().max(f1.abs()).max(f2.abs());
            prop_assert!((f2 - f0 - 2.0 * (f1 - f0)).abs() <= 4.0 * TOL * scale.max(f64::MIN_POSITIVE));
        }
        prop_assert!((two.energy_shift - 2.0 * one.energy_shift).abs() <= TOL * two.energy_shift.abs());
    }

    #[test]
    fn opposite_theta_and_m_agree(spec in prop_oneof![even(), inverse()], theta in -1.0..1.0_f64, m in -8i32..=8) {
        let p = deform(spec, NcContext::new(theta, m)).unwrap();
        let q = deform(spec, NcContext::new(-theta, -m)).unwrap();
        prop_assert_eq!(&p.terms, &q.terms);
        prop_assert_eq!(p.energy_shift, q.energy_shift);
        prop_assert_eq!(p.centrifugal, q.centrifugal);
    }

    #[test]
    fn zero_theta_is_the_bare_potential(spec in prop_oneof![even(), inverse()], m in -8i32..=8) {
        let p = deform(spec, NcContext::new(0.0, m)).unwrap();
        for (&k, &v) in &p.terms {
            let bare = match k {
                2 | -1 => spec.a,
                -2 => spec.b,
                -4 if spec.family == ncspectra_core::Family::EvenPower => spec.c,
                _ => 0.0,
            };
            prop_assert_eq!(v, bare);
        }
        prop_assert_eq!(p.energy_shift, 0.0);
    }

    #[test]
    fn spacing_is_four_root_a(spec in even(), theta in 0.001..0.5_f64, m in 1i32..=4, n in 0usize..6) {
        prop_assume!(spec.c > 0.0);
        let p = deform(spec, NcContext::new(theta, m)).unwrap();
        let pre = PrefactorExponents::new(&p, SignMode::Normalizable).unwrap();
        let rec = Recurrence::new(&p, &pre, indicial_exponent(&p, &pre).unwrap());
        let gap = rec.terminating_energy(n + 1) - rec.terminating_energy(n);
        prop_assert!((gap - 4.0 * spec.a.sqrt()).abs() <= 8.0 * f64::EPSILON * rec.terminating_energy(n + 1).abs());
    }

    #[test]
    fn roots_rebuild_the_polynomial(roots in prop::collection::vec(-5.0..5.0_f64, 1..4)) {
        let h = poly_from_roots(&roots);
        let (real, pairs) = split_roots(&h);
        prop_assume!(pairs.is_empty());
        let rebuilt = poly_from_roots(&real);
        for (x, y) in h.iter().zip(&rebuilt) {
            prop_assert!((x - y).abs() <= 1e-8 * x.abs().max(1.0));
        }
    }

    #[test]
    fn csv_round_trips(theta in 0.0..1.0_f64, m in -5i32..=5, e in prop::option::of(-100.0..100.0_f64), gap in prop::option::of(0.0..1.0_f64)) {
        let row = SplittingRow {
            family: ncspectra_core::Family::InversePower,
            theta,
            m,
            theta_m: theta * f64::from(m),
            mode: ncspectra_core::report::Mode::Paper,
            level: 2,
            status: "ok".into(),
            b: e,
            e_physical: e,
            e_reduced: e,
            shift: 0.0,
            e_paper: gap,
            e_rederived: e,
            constraint_residual: gap,
            ode_residual: None,
            oracle_e: e,
            gap,
            nodes: Some(1),
            oracle_nodes: None,
            oracle_verified: gap.is_some(),
            oracle_fixed_e: e,
            flags: "paper-differs;oracle-disagrees".into(),
        };
        let report = SplittingReport { rows: vec![row], fits: Vec::new() };
        let text = report.to_csv(Some("unix:0"));
        prop_assert_eq!(SplittingReport::from_csv(&text).unwrap(), report);
        prop_assert_eq!(rows_table(&[]).headers.len(), 22);
    }
}
