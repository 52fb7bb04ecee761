use dfchannel_core::absorber::damp_single_mode;
use dfchannel_core::charfunc::{charfunc_numeric, fock_factor};
use dfchannel_core::fock::{coherent_vector, FockCutoff};
use dfchannel_core::stats::{build_A_state, compute_stats, covariance_closed_form, mandel_closed_form};
use dfchannel_core::{TwoModeState, C64};
use proptest::prelude::*;

fn cutoff(alpha: C64, n: usize) -> FockCutoff {
    FockCutoff::for_input(alpha, n, 40, 2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn photon_statistics(n in 0usize..=3, r in 0.0f64..=2.0, phase in 0.0f64..std::f64::consts::TAU, theta in 0.0f64..=std::f64::consts::PI) {
        let alpha = C64::from_polar(r, phase);
        let (s, c) = theta.sin_cos();
        let st = build_A_state(alpha, n, c, s, cutoff(alpha, n)).unwrap();
        let rep = compute_stats(&st);
        let (qa, qb) = mandel_closed_form(alpha, n, c, s);
        prop_assert!((rep.mandel_a - qa).abs() < 1e-10);
        prop_assert!((rep.mandel_b - qb).abs() < 1e-10);
        prop_assert!(rep.mandel_a >= -1.0 && rep.mandel_b >= -1.0);
        prop_assert!((rep.covariance - covariance_closed_form(alpha, n, c, s)).abs() < 1e-8);
        prop_assert!((rep.separability - 2.0 * (1.0 + n as f64)).abs() < 1e-8);
        prop_assert!((rep.sum_variance - r * r).abs() < 1e-8);
        let cross = 4.0 * c * c * s * s * (2.0 * r * r + 1.0);
        prop_assert!((rep.diff_variance - (r * r + cross * n as f64)).abs() < 1e-8);
        if cross >= 1.0 {
            prop_assert!(rep.diff_variance >= rep.shot_level - 1e-9);
        }
        prop_assert!(rep.min_quadrature_variance >= 0.5 - 1e-9);
    }

    #[test]
    fn charfunc_symmetry(re in -0.8f64..0.8, im in -0.8f64..0.8, n in 0usize..3,
                         b1 in (-1.4f64..1.4, -1.4f64..1.4), b2 in (-1.4f64..1.4, -1.4f64..1.4)) {
        let alpha = C64::new(re, im);
        let f = cutoff(alpha, n);
        let st = build_A_state(alpha, n, 0.6, 0.8, f).unwrap();
        let (b1, b2) = (C64::new(b1.0, b1.1), C64::new(b2.0, b2.1));
        let v = charfunc_numeric(&st, b1, b2).unwrap();
        let m = charfunc_numeric(&st, -b1, -b2).unwrap();
        prop_assert!((m - v.conj()).norm() < 1e-10);
        let origin = charfunc_numeric(&st, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        prop_assert!((origin - 1.0).norm() < 1e-10);
    }

    #[test]
    fn fock_factor_bounded_by_one(n in 0usize..8, x in 0.0f64..4.0) {
        // |L_n(x)| <= e^{x/2}
        prop_assert!(fock_factor(n, x).abs() <= (x / 2.0).exp() + 1e-12);
    }

    #[test]
    fn damping_is_a_semigroup(q1 in 0.05f64..1.0, q2 in 0.05f64..1.0, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let v = coherent_vector(C64::new(re, im), 20);
        let rho = &v * v.adjoint();
        let twice = damp_single_mode(&damp_single_mode(&rho, q1).unwrap(), q2).unwrap();
        let once = damp_single_mode(&rho, q1 * q2).unwrap();
        prop_assert!((twice - once).norm() < 1e-12);
    }
}

#[test]
fn vacuum_statistics() {
    let st = TwoModeState::basis(0, 0, FockCutoff::new(5, 2).unwrap()).unwrap();
    let rep = compute_stats(&st);
    assert_eq!(rep.shot_level, 0.0);
    assert!((rep.separability - 2.0).abs() < 1e-12);
}
