use std::f64::consts::{SQRT_2, TAU};

use optobell_core::device::{model_from_device, DeviceConfig};
use optobell_core::model::{ground, ClosedForm};
use optobell_core::sweep::{parse_csv, round_sig12, write_csv, SweepRow};
use optobell_core::{Complex64, ModelParams, ProbabilityTriple, Setting, SettingsQuad};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (0.0..0.999f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..3.0f64)
        .prop_map(|(p, t, eta, n0)| ModelParams { p, t, eta, n0 })
}

fn setting() -> impl Strategy<Value = Complex64> {
    (0.0..2.999f64, 0.0..TAU).prop_map(|(r, phi)| Complex64::from_polar(r, phi))
}

fn alpha() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn probabilities_are_probabilities(params in params(), a1 in alpha(), a2 in alpha()) {
        let t = ClosedForm::new(&params).unwrap().triple(a1, a2);
        for v in [t.joint, t.marg1, t.marg2] {
            prop_assert!((0.0..=1.0).contains(&v), "{v}");
        }
        prop_assert!(t.is_consistent(1e-12), "{t:?}");
        prop_assert!(t.correlator().abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn chsh_respects_tsirelson(params in params(), quad in prop::array::uniform4(alpha())) {
        let s = ClosedForm::new(&params).unwrap().chsh(quad);
        prop_assert!(s.abs() <= 2.0 * SQRT_2 + 1e-9);
    }

    #[test]
    fn joint_is_phase_covariant(params in params(), a1 in alpha(), a2 in alpha(), phi in 0.0..TAU) {
        let f = ClosedForm::new(&params).unwrap();
        let rot = Complex64::from_polar(1.0, phi);
        let base = f.joint(a1, a2);
        prop_assert!((f.joint(a1 * rot, a2 / rot) - base).abs() <= 1e-13);
        prop_assert!((f.joint(a1.conj(), a2.conj()) - base).abs() <= 1e-13);
        prop_assert!((f.marginal_one(a1 * rot) - f.marginal_one(a1)).abs() <= 1e-13);
        prop_assert!((f.marginal_two(a2 * rot) - f.marginal_two(a2)).abs() <= 1e-13);
    }

    #[test]
    fn marginals_fall_with_displacement(
        params in params(),
        r in 0.0..2.5f64,
        dr in 0.01..0.5f64,
        phi in 0.0..TAU,
    ) {
        let f = ClosedForm::new(&params).unwrap();
        let (near, far) = (Complex64::from_polar(r, phi), Complex64::from_polar(r + dr, phi));
        if params.eta > 1e-3 {
            prop_assert!(f.marginal_one(far) < f.marginal_one(near));
        }
        if params.eta > 1e-3 && params.t > 1e-3 {
            prop_assert!(f.marginal_two(far) < f.marginal_two(near));
        }
    }

    #[test]
    fn thermal_forms_reduce_to_ground_forms(params in params(), a1 in alpha(), a2 in alpha()) {
        let params = ModelParams { n0: 0.0, ..params };
        let f = ClosedForm::new(&params).unwrap();
        prop_assert_eq!(f.marginal_one(a1), ground::marginal_one(&params, a1));
        prop_assert_eq!(f.marginal_two(a2), ground::marginal_two(&params, a2));
        prop_assert_eq!(f.joint(a1, a2), ground::joint(&params, a1, a2));
    }

    #[test]
    fn blind_detectors_give_local_value(params in params(), quad in prop::array::uniform4(alpha())) {
        let params = ModelParams { eta: 0.0, ..params };
        let f = ClosedForm::new(&params).unwrap();
        prop_assert_eq!(f.correlator(quad[0], quad[2]), 1.0);
        prop_assert!((f.chsh(quad) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn triple_invariants_catch_inconsistent_values(
        m1 in 0.0..=1.0f64,
        m2 in 0.0..=1.0f64,
        excess in 1e-6..0.5f64,
    ) {
        let over = ProbabilityTriple { joint: m1.min(m2) + excess, marg1: m1, marg2: m2 };
        prop_assert!(!over.is_consistent(1e-9));
        let under = ProbabilityTriple { joint: (m1 + m2 - 1.0).max(0.0) - excess, marg1: m1, marg2: m2 };
        prop_assert!(!under.is_consistent(1e-9));
    }
}

fn device(t1: f64, t2: f64, n_plus: f64, n_minus: f64) -> optobell_core::device::DeviceParams {
    DeviceConfig {
        t1_s: t1,
        t2_s: t2,
        n_plus,
        n_minus,
        ..DeviceConfig::nanobeam()
    }
    .to_angular()
}

proptest! {
    #[test]
    fn pulse_map_is_monotone(
        t1 in 1e-9..100e-9f64,
        t2 in 1e-9..100e-9f64,
        n in 1.0..300.0f64,
        grow in 1.01..2.0f64,
    ) {
        let (base, _) = model_from_device(&device(t1, t2, n, n), 0.9).unwrap();
        let (longer, _) = model_from_device(&device(t1 * grow, t2 * grow, n, n), 0.9).unwrap();
        let (brighter, _) = model_from_device(&device(t1, t2, n * grow, n * grow), 0.9).unwrap();
        for m in [base, longer, brighter] {
            prop_assert!((0.0..1.0).contains(&m.p) && (0.0..=1.0).contains(&m.t));
        }
        prop_assert!(longer.p > base.p && longer.t > base.t);
        prop_assert!(brighter.p > base.p && brighter.t > base.t);
    }

    #[test]
    fn hz_and_angular_inputs_agree(kappa_hz in 1e7..2e9f64, g0_hz in 1e4..1e7f64) {
        let hz = DeviceConfig { kappa_hz, g0_hz, ..DeviceConfig::nanobeam() };
        let angular = hz.to_angular();
        let back = angular.to_hz().to_angular();
        match (model_from_device(&angular, 0.9), model_from_device(&back, 0.9)) {
            (Ok((a, _)), Ok((b, _))) => {
                prop_assert!((a.p - b.p).abs() <= 1e-15 && (a.t - b.t).abs() <= 1e-15)
            }
            // saturated pulses reject p = 1 on both paths
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn csv_round_trips(
        rows in prop::collection::vec(
            (0.0..1.0f64, params(), 1.0..2.9f64, prop::array::uniform4(setting()), any::<bool>()),
            1..6,
        ),
    ) {
        let rows: Vec<SweepRow> = rows
            .into_iter()
            .map(|(x, params, s, quad, converged)| {
                let settings = quad.map(|a| Setting::new(a).unwrap());
                SweepRow {
                    axis_value: x,
                    params,
                    s_star: s,
                    quad: SettingsQuad::new(settings[0], settings[1], settings[2], settings[3]),
                    converged,
                }
            })
            .collect();
        let mut first = Vec::new();
        write_csv(&rows, &mut first).unwrap();
        let parsed = parse_csv(&first[..]).unwrap();
        prop_assert_eq!(parsed.len(), rows.len());
        for (a, b) in rows.iter().zip(&parsed) {
            prop_assert_eq!(round_sig12(a.s_star), b.s_star);
            prop_assert_eq!(round_sig12(a.params.t), b.params.t);
        }
        let mut second = Vec::new();
        write_csv(&parsed, &mut second).unwrap();
        prop_assert_eq!(first, second);
    }
}
