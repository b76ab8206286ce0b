// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

use ssb_measure::ensemble::run_seed;
use ssb_measure::order_parameter::{
    em_step, epsilon_turning_point, gaussian_propagate, onset_time, optimization_z, p_minus,
    p_plus, tune_noise_for_z, variance_profile, Convention, GridDensity, LangevinParams,
    NoiseSource,
};
use ssb_measure::Error;

fn em_finals(params: &LangevinParams, phi0: f64, dt: f64, steps: usize, n: usize) -> Vec<f64> {
    (0..n as u64)
        .map(|i| {
            let mut noise = NoiseSource::new(run_seed(11, i));
            (0..steps).fold(phi0, |phi, _| em_step(phi, params, dt, noise.next_normal()))
        })
        .collect()
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (
        m,
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0),
    )
}

#[test]
fn linear_variance_matches_ito_law() {
    let p = LangevinParams::new(0.5, 0.0, 0.02).unwrap();
    let xs = em_finals(&p, 0.0, 1e-3, 2000, 20_000);
    let (m, v) = moments(&xs);
    let want = variance_profile(2.0, &p, Convention::Mc);
    assert!(m.abs() < 4.0 * (want / 20_000.0).sqrt());
    assert!((v / want - 1.0).abs() < 0.04, "{v} vs {want}");
    assert_eq!(variance_profile(2.0, &p, Convention::Paper), 2.0 * want);
}

#[test]
fn propagated_density_matches_monte_carlo() {
    let p = LangevinParams::new(1.0, 0.0, 0.01).unwrap();
    let p0 = GridDensity::delta(-0.2, 0.2, 401, 0.05).unwrap();
    let dens = gaussian_propagate(&p0, 1.0, &p, Convention::Mc).unwrap();
    assert!((dens.mass() - 1.0).abs() < 1e-9);
    let (m, v) = moments(&em_finals(&p, 0.05, 1e-3, 1000, 20_000));
    assert!((dens.mean() - m).abs() < 4.0 * (v / 20_000.0).sqrt());
    assert!((dens.variance() / v - 1.0).abs() < 0.04);
}

#[test]
fn tail_probabilities_are_complementary() {
    for (d, v) in [(0.0, 1.0), (0.3, 0.01), (-0.2, 0.5), (1e-3, 1e-8)] {
        let s = p_plus(d, v).unwrap() + p_minus(d, v).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
    }
    assert_eq!(p_plus(0.0, 0.3).unwrap(), 0.5);
    assert!(p_plus(0.1, 0.0).is_err());
}

#[test]
fn onset_time_precondition() {
    let p = LangevinParams::new(1.0, 1.0, 1e-4).unwrap();
    let t0 = onset_time(&p, 0.01).unwrap();
    assert!((t0 - (-(1e-4f64 + 1e-4).ln() / 2.0)).abs() < 1e-12);
    assert!(matches!(
        onset_time(&p.with_epsilon(2.0).unwrap(), 0.0),
        Err(Error::Domain(_))
    ));
}

#[test]
fn z_falls_on_the_lower_branch() {
    let p = LangevinParams::new(1.0, 1.0, 0.0).unwrap();
    let (mu, b) = (1.0, 0.1);
    let top = epsilon_turning_point(&p, mu, b).unwrap();
    let z = |e: f64| optimization_z(&p.with_epsilon(e).unwrap(), mu, b, Convention::Mc).unwrap();
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        let e = 1e-12 * (top / 1e-12).powf(k as f64 / 59.0);
        let zk = z(e);
        assert!(zk < prev, "z not decreasing at ε = {e}");
        prev = zk;
    }
    assert!(z(top * 1.5) > z(top));
}

#[test]
fn tuning_orders_noise_by_target() {
    let p = LangevinParams::new(1.0, 1.0, 0.0).unwrap();
    let tune = |z: f64| tune_noise_for_z(z, &p, 1.0, 0.1, Convention::Mc).unwrap();
    let (e_lo, e_mid, e_hi) = (tune(0.08), tune(2.0), tune(10.0));
    assert!(e_lo > e_mid && e_mid > e_hi);
    assert!(e_lo / e_hi > 1e3);
    for (z, e) in [(0.08, e_lo), (2.0, e_mid), (10.0, e_hi)] {
        let back = optimization_z(&p.with_epsilon(e).unwrap(), 1.0, 0.1, Convention::Mc).unwrap();
        assert!((back / z - 1.0).abs() < 1e-6);
    }
}

#[test]
fn unreachable_target_reports_interval() {
    let p = LangevinParams::new(1.0, 1.0, 0.0).unwrap();
    match tune_noise_for_z(1e-3, &p, 1.0, 0.1, Convention::Mc) {
        Err(Error::Optimization { lo, hi, .. }) => assert!(lo < hi),
        other => panic!("expected optimization error, got {other:?}"),
    }
    assert!(tune_noise_for_z(2.0, &p, 1.0, 0.0, Convention::Mc).is_err());
}
