use std::f64::consts::PI;

use cavityqed::airy_shift::{pv_shift, pv_shift_cos, pv_shift_sin, FinesseParam};
use cavityqed::dipole_response::shift_factor;
use cavityqed::ray_model::{airy_factor_m, airy_factor_m_weights, StandingWaveWeights};
use cavityqed::specfun::bessel_sum_rules;
use cavityqed::{response, CavityGeometry, DipoleOrientation, FieldPoint, RaySettings, ResponseMethod};
use proptest::prelude::*;

fn geometry() -> impl Strategy<Value = CavityGeometry> {
    (0.2f64..1.4, 0.2f64..1.4, 0.0f64..0.99, 0.0f64..0.99, -0.5f64..0.5).prop_map(|(t1, t2, r1, r2, kd)| {
        CavityGeometry { k_radius: 1e5, theta_m1: t1, theta_m2: t2, rho1: r1, rho2: r2, k_delta: kd }
    })
}

fn point() -> impl Strategy<Value = FieldPoint> {
    (-8.0f64..8.0, -8.0f64..8.0, -30.0f64..30.0).prop_map(|(x, y, z)| FieldPoint::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn airy_factor_bounds_and_forms(phi in -PI..PI, x in -50.0f64..50.0, r1 in 0.0f64..0.995, r2 in 0.0f64..0.995) {
        let m = airy_factor_m(phi, x, r1, r2).unwrap();
        let w = airy_factor_m_weights(phi, StandingWaveWeights::new(x), r1, r2).unwrap();
        prop_assert!(m >= 0.0);
        prop_assert!((m - w).abs() <= 1e-9 * m.max(1.0));
        let p = r1 * r2;
        prop_assert!(m <= (1.0 + r1.max(r2)).powi(2) / (1.0 - p).powi(2) + 1e-9);
    }

    #[test]
    fn swapping_mirrors_mirrors_the_standing_wave(phi in -PI..PI, x in -20.0f64..20.0, r1 in 0.0f64..0.99, r2 in 0.0f64..0.99) {
        let a = airy_factor_m(phi, x, r1, r2).unwrap();
        let b = airy_factor_m(phi, -x, r2, r1).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
        let sa = shift_factor(phi, x, r1, r2).unwrap();
        let sb = shift_factor(phi, -x, r2, r1).unwrap();
        prop_assert!((sa - sb).abs() <= 1e-9 * sa.abs().max(1.0));
    }

    #[test]
    fn shift_kernels_parity(phi in -3.0f64..3.0, rho in 0.0f64..0.99) {
        let f = FinesseParam::from_reflectivity(rho);
        prop_assert!((pv_shift(phi, rho) + pv_shift(-phi, rho)).abs() < 1e-9);
        prop_assert!((pv_shift_cos(phi, f) + pv_shift_cos(-phi, f)).abs() < 1e-9);
        prop_assert!((pv_shift_sin(phi, f) - pv_shift_sin(-phi, f)).abs() < 1e-9);
    }

    #[test]
    fn bessel_completeness(kr in 0.01f64..100.0) {
        let (total, even, odd) = bessel_sum_rules(kr, kr as usize + 60).unwrap();
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert!((even - odd - (2.0 * kr).sin() / (2.0 * kr)).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn damping_positive_and_orientation_sum(g in geometry(), p in point(), phi in -0.4f64..0.4) {
        let r = |d| response(p, d, &g, phi, ResponseMethod::RayAsymmetric, RaySettings::default()).unwrap();
        let (par, perp, iso) = (r(DipoleOrientation::Parallel), r(DipoleOrientation::Perpendicular), r(DipoleOrientation::Isotropic));
        prop_assert!(par.gamma_ratio >= 0.0 && perp.gamma_ratio >= 0.0);
        prop_assert!(((par.gamma_ratio + 2.0 * perp.gamma_ratio) / 3.0 - iso.gamma_ratio).abs() < 1e-8);
        prop_assert!(((par.shift_ratio + 2.0 * perp.shift_ratio) / 3.0 - iso.shift_ratio).abs() < 1e-8);
    }

    #[test]
    fn no_mirrors_is_free_space(p in point(), phi in -1.0f64..1.0, t in 0.2f64..1.4) {
        let g = CavityGeometry::symmetric(1e5, t, 0.0);
        for d in [DipoleOrientation::Parallel, DipoleOrientation::Perpendicular, DipoleOrientation::Isotropic] {
            let r = response(p, d, &g, phi, ResponseMethod::RaySymmetric, RaySettings::default()).unwrap();
            prop_assert!((r.gamma_ratio - 1.0).abs() < 1e-12);
            prop_assert!(r.shift_ratio.abs() < 1e-12);
        }
    }

    #[test]
    fn center_shift_is_odd_in_detuning(t in 0.3f64..1.4, rho in 0.0f64..0.99, phi in 0.0f64..0.5) {
        let g = CavityGeometry::symmetric(1e5, t, rho);
        let s = |ph| response(FieldPoint::ORIGIN, DipoleOrientation::Parallel, &g, ph, ResponseMethod::RaySymmetric, RaySettings::default())
            .unwrap()
            .shift_ratio;
        prop_assert_eq!(s(phi), -s(-phi));
    }
}
