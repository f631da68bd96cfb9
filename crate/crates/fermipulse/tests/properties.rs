//! Randomized invariants of the special functions, the degeneracy
//! closed forms and the deterministic output paths.

use num_complex::Complex64;
use proptest::prelude::*;

use fermipulse::degeneracy::{delta1_axis, delta2_axis, Symmetry};
use fermipulse::detection::{joint_density_t0, marginal_density};
use fermipulse::estimation::sample_clicks;
use fermipulse::runconfig::RunConfig;
use fermipulse::specfun::{erf_complex, erf_real, erfc_real, faddeeva};
use fermipulse::statemodel::default_ensemble;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn erf_real_is_odd_and_complements(x in -6.4f64..6.4) {
        let v = erf_real(x).unwrap();
        prop_assert!((v + erf_real(-x).unwrap()).abs() < 1e-12);
        prop_assert!((v + erfc_real(x).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&v));
    }

    #[test]
    fn erf_complex_oddness_and_conjugation(x in -6.0f64..6.0, y in -6.0f64..6.0) {
        let z = Complex64::new(x, y);
        let v = erf_complex(z).unwrap();
        let scale = v.norm().max(1.0);
        prop_assert!((v + erf_complex(-z).unwrap()).norm() < 1e-12 * scale);
        prop_assert!((v.conj() - erf_complex(z.conj()).unwrap()).norm() < 1e-12 * scale);
    }

    #[test]
    fn erf_complex_agrees_with_real_axis(x in -6.4f64..6.4) {
        let v = erf_complex(Complex64::new(x, 0.0)).unwrap();
        prop_assert!((v.re - erf_real(x).unwrap()).abs() < 1e-13);
        prop_assert!(v.im == 0.0);
    }

    #[test]
    fn faddeeva_real_axis_identity(x in -8.0f64..8.0) {
        // Re w(x) = exp(-x^2) exactly for real x.
        let w = faddeeva(Complex64::new(x, 0.0)).unwrap();
        prop_assert!((w.re - (-x * x).exp()).abs() < 1e-12);
        // Im w is odd.
        let wm = faddeeva(Complex64::new(-x, 0.0)).unwrap();
        prop_assert!((w.im + wm.im).abs() < 1e-12);
    }
}

proptest! {
    // The degeneracy forms are costlier per case.
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn delta1_window_monotone(
        frac_lo in -3.0f64..3.0,
        grow in 0.0f64..2.0,
        t_ns in 0.0f64..10.0,
    ) {
        let ens = default_ensemble();
        let dk = ens.one_el.dk();
        let k0 = ens.one_el.k0()[0];
        let t = t_ns * 1e-9;
        let center = fermipulse::constants::HBAR * k0 * t / fermipulse::constants::M_E;
        let lo = center + frac_lo / dk;
        let hi = lo + 0.3 / dk;
        let base = delta1_axis(lo, hi, k0, dk, t).unwrap();
        // Growing the window on either side never loses mass.
        let wider = delta1_axis(lo - grow / dk, hi + grow / dk, k0, dk, t).unwrap();
        prop_assert!(wider >= base - 1e-15);
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn delta2_classical_limit_at_zero_overlap(
        sep_dk in 30.0f64..80.0,
        t_ns in 0.0f64..10.0,
    ) {
        let ens = default_ensemble();
        let dk = ens.one_el.dk();
        let ka = ens.one_el.k0()[0];
        let kb = ka - sep_dk * dk;
        let t = t_ns * 1e-9;
        // Track the first packet's center so the window mass stays finite.
        let center = fermipulse::constants::HBAR * ka * t / fermipulse::constants::M_E;
        let (lo, hi) = (center - 0.5 / dk, center + 0.5 / dk);
        let s = delta2_axis(Symmetry::Symmetric, lo, hi, ka, kb, dk, t).unwrap();
        let a = delta2_axis(Symmetry::Antisymmetric, lo, hi, ka, kb, dk, t).unwrap();
        // The overlap is ~exp(-sep^2/8) < 1e-49 here: far below double
        // precision but not exactly zero, so compare relatively.
        prop_assert!((s - a).abs() <= 1e-12 * s.abs().max(1e-300));
        let sum = delta1_axis(lo, hi, ka, dk, t).unwrap() + delta1_axis(lo, hi, kb, dk, t).unwrap();
        prop_assert!((s - sum).abs() <= 1e-12 * sum.max(1e-300));
    }

    #[test]
    fn joint_density_is_symmetric_and_nonnegative(
        x1 in -5e-9f64..5e-9,
        x2 in -5e-9f64..5e-9,
    ) {
        let ens = default_ensemble();
        let (ps, pas, pt) = joint_density_t0(&ens.two_el, x1, x2).unwrap();
        let (ps2, pas2, _) = joint_density_t0(&ens.two_el, x2, x1).unwrap();
        prop_assert_eq!((ps, pas), (ps2, pas2));
        prop_assert!(ps >= 0.0 && pas >= 0.0 && pt >= 0.0);
        let (ms, mas, _) = marginal_density(&ens.two_el, x1).unwrap();
        prop_assert!(ms >= 0.0 && mas >= 0.0);
    }
}

#[test]
fn outputs_are_byte_deterministic() {
    let cfg = RunConfig {
        n_t: Some(25),
        n_x: Some(25),
        ..RunConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    for fig in 1..=6u8 {
        let a = std::fs::read(fermipulse::figures::write_figure(fig, &cfg, dir.path()).unwrap())
            .unwrap();
        let b = std::fs::read(fermipulse::figures::write_figure(fig, &cfg, dir.path()).unwrap())
            .unwrap();
        assert_eq!(a, b, "fig{fig} not byte-identical");
    }
    let ens = default_ensemble();
    let mut csv1 = Vec::new();
    sample_clicks(&ens, 500, 9).unwrap().write_csv(&mut csv1).unwrap();
    let mut csv2 = Vec::new();
    sample_clicks(&ens, 500, 9).unwrap().write_csv(&mut csv2).unwrap();
    assert_eq!(csv1, csv2);
}
