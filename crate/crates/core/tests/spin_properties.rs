// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use proptest::prelude::*;

use ssb_measure::spin_dynamics::{
    evolve_analytic, evolve_numeric, generator, purity, ReservoirCoefficients, SpinDensityMatrix,
};

fn state() -> impl Strategy<Value = SpinDensityMatrix> {
    (0.0..=1.0f64, 0.0..=1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(p, r, phase)| {
        let radius = (p * (1.0 - p)).sqrt() * r;
        SpinDensityMatrix::from_population(p, Complex64::from_polar(radius, phase)).unwrap()
    })
}

fn coeffs() -> impl Strategy<Value = ReservoirCoefficients> {
    (0.0..3.0f64, 0.0..3.0f64, 0.0..3.0f64, -20.0..20.0f64)
        .prop_map(|(a, b, c, w)| ReservoirCoefficients::new(a, b, c, w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_form_stays_physical(rho in state(), k in coeffs(), t in 0.0..50.0f64) {
        let r = evolve_analytic(&rho, &k, t).unwrap();
        prop_assert!((r.trace() - 1.0).abs() < 1e-12);
        prop_assert!(r.rho11() >= -1e-12 && r.rho22() >= -1e-12);
        prop_assert!(r.determinant() >= -1e-12);
        let m = r.to_matrix();
        prop_assert!((m[0][1] - m[1][0].conj()).norm() < 1e-15);
        prop_assert!(purity(&r) <= 1.0 + 1e-12);
    }

    #[test]
    fn generator_is_traceless_and_hermitian(rho in state(), k in coeffs()) {
        let d = generator(&rho.to_matrix(), &k);
        prop_assert!((d[0][0] + d[1][1]).norm() < 1e-12);
        prop_assert!((d[0][1] - d[1][0].conj()).norm() < 1e-12);
        prop_assert!(d[0][0].im.abs() < 1e-12 && d[1][1].im.abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rk4_matches_closed_form(rho in state(), k in coeffs(), t in 0.0..5.0f64) {
        let exact = evolve_analytic(&rho, &k, t).unwrap();
        let num = evolve_numeric(&rho, &k, t, 1e-3f64.min(t.max(1e-9))).unwrap();
        prop_assert!((exact.rho11() - num.rho11()).abs() < 1e-9);
        prop_assert!((exact.rho12() - num.rho12()).norm() < 1e-9);
    }
}

#[test]
fn populations_relax_at_twice_the_total_rate() {
    let k = ReservoirCoefficients::new(0.3, 0.9, 0.0, 0.0).unwrap();
    let rho = evolve_analytic(&SpinDensityMatrix::pure_down(), &k, 1.0).unwrap();
    let eq = 0.9 / 1.2;
    assert!((rho.rho11() - eq * (1.0 - (-2.4f64).exp())).abs() < 1e-14);
}

#[test]
fn coherence_rotates_and_decays() {
    let k = ReservoirCoefficients::new(0.2, 0.1, 0.4, 3.0).unwrap();
    let rho0 = SpinDensityMatrix::new(0.5, 0.5, Complex64::new(0.5, 0.0)).unwrap();
    let t = 0.7;
    let rho = evolve_analytic(&rho0, &k, t).unwrap();
    let want = Complex64::from_polar(0.5 * (-0.7f64 * t).exp(), -3.0 * t);
    assert!((rho.rho12() - want).norm() < 1e-14);
}

#[test]
fn purity_dips_then_recovers() {
    let rho0 = SpinDensityMatrix::new(0.5, 0.5, Complex64::new(0.5, 0.0)).unwrap();
    let k = ReservoirCoefficients::new(0.99, 0.01, 1.0, 10.0).unwrap();
    let p = |t: f64| purity(&evolve_analytic(&rho0, &k, t).unwrap());
    assert!(p(0.357) < 0.746);
    assert!(p(0.1) > p(0.357) && p(2.0) > p(0.357));
    assert!((p(40.0) - (0.99f64.powi(2) + 0.01f64.powi(2))).abs() < 1e-12);
}

#[test]
fn rk4_rejects_stiff_steps() {
    let k = ReservoirCoefficients::new(1.0, 1.0, 1.0, 100.0).unwrap();
    assert!(evolve_numeric(&SpinDensityMatrix::pure_up(), &k, 1.0, 0.01).is_err());
}

#[test]
fn invalid_states_are_rejected() {
    assert!(SpinDensityMatrix::new(0.6, 0.6, Complex64::new(0.0, 0.0)).is_err());
    assert!(SpinDensityMatrix::new(0.5, 0.5, Complex64::new(0.6, 0.0)).is_err());
    assert!(SpinDensityMatrix::new(-0.1, 1.1, Complex64::new(0.0, 0.0)).is_err());
    assert!(ReservoirCoefficients::new(-1.0, 0.0, 0.0, 0.0).is_err());
}
