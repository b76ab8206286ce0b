// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line;
//! run with `-- --nocapture` to see them. Tests take a shared lock so the
//! wall-clock limits are measured without interference.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ssb_measure::csv::CsvTable;
use ssb_measure::ensemble::{
    analytic_p_plus_at_t0, born_check, calibration_csv, calibration_curve, run_seed, s3_grid,
    time_for_z, BornEvaluation, CalibrationPoint, EmpiricalSettings, EnsembleMode,
};
use ssb_measure::measurement::{lockin_outcome, run_trajectory, MeasurementParams};
use ssb_measure::order_parameter::{
    em_step, onset_time, optimization_z, p_plus, tune_noise_for_z, variance_profile, Convention,
    LangevinParams, NoiseSource,
};
use ssb_measure::spin_dynamics::{
    evolve_analytic, evolve_numeric, purity, ReservoirCoefficients, SpinDensityMatrix,
};

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: &str, pass: bool, detail: String) {
    println!(
        "criterion {id}: {} | {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn random_state(rng: &mut ChaCha8Rng) -> SpinDensityMatrix {
    let rho11: f64 = rng.random();
    let radius = (rho11 * (1.0 - rho11)).sqrt() * rng.random::<f64>();
    let phase = rng.random::<f64>() * std::f64::consts::TAU;
    SpinDensityMatrix::from_population(rho11, Complex64::from_polar(radius, phase)).unwrap()
}

fn random_coeffs(rng: &mut ChaCha8Rng) -> ReservoirCoefficients {
    ReservoirCoefficients::new(
        2.0 * rng.random::<f64>(),
        2.0 * rng.random::<f64>(),
        2.0 * rng.random::<f64>(),
        20.0 * rng.random::<f64>() - 10.0,
    )
    .unwrap()
}

fn max_elementwise(x: &SpinDensityMatrix, y: &SpinDensityMatrix) -> f64 {
    (x.rho11() - y.rho11())
        .abs()
        .max((x.rho22() - y.rho22()).abs())
        .max((x.rho12() - y.rho12()).norm())
}

// Shared device: γ = g = 1, μ = 1, B = 0.1 so δmax = 0.05.
fn device(epsilon: f64) -> MeasurementParams {
    let l = LangevinParams::new(1.0, 1.0, epsilon).unwrap();
    MeasurementParams::new(l, 1.0, 0.1, 0.1, 0.5, 10.0, 0.01, 60.0).unwrap()
}

fn tuned_device(z: f64) -> MeasurementParams {
    let base = device(0.0);
    let eps = tune_noise_for_z(z, &base.langevin, base.mu, base.b_field, Convention::Mc).unwrap();
    base.with_epsilon(eps).unwrap()
}

#[test]
fn criterion_1_master_equation_oracle() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let rho0 = random_state(&mut rng);
        let coeffs = random_coeffs(&mut rng);
        let t = 10.0 * rng.random::<f64>();
        let exact = evolve_analytic(&rho0, &coeffs, t).unwrap();
        let num = evolve_numeric(&rho0, &coeffs, t, 5e-4_f64.min(t.max(1e-12))).unwrap();
        worst = worst.max(max_elementwise(&exact, &num));
    }
    let elapsed = start.elapsed();
    let pass = worst < 1e-8 && elapsed < Duration::from_secs(5);
    report(
        "1",
        pass,
        format!("max |numeric − analytic| = {worst:.3e}, runtime {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_2_fig2_purity_shape() {
    let _g = serial();
    let rho0 = SpinDensityMatrix::new(0.5, 0.5, Complex64::new(0.5, 0.0)).unwrap();
    let coeffs = ReservoirCoefficients::new(0.99, 0.01, 1.0, 10.0).unwrap();
    let pur = |t: f64| purity(&evolve_analytic(&rho0, &coeffs, t).unwrap());
    let (mut t_min, mut p_min) = (0.0, f64::INFINITY);
    for i in 0..=200_000 {
        let t = i as f64 * 1e-5;
        let p = pur(t);
        if p < p_min {
            t_min = t;
            p_min = p;
        }
    }
    let p0 = pur(0.0);
    let p10 = pur(10.0);
    let pass = (p0 - 1.0).abs() < 1e-15
        && (p_min - 0.745).abs() <= 1e-3
        && (t_min - 0.357).abs() <= 2e-3
        && (p10 - 0.9802).abs() <= 1e-4;
    report(
        "2",
        pass,
        format!("purity(0) = {p0}, min {p_min:.6} at t = {t_min:.5}, purity(10) = {p10:.6}"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_asymptote_independence() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let coeffs = ReservoirCoefficients::new(0.37, 1.21, 0.4, 3.0).unwrap();
    let (a, b) = (coeffs.a, coeffs.b);
    let t = 50.0 / (a + b);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let rho = evolve_analytic(&random_state(&mut rng), &coeffs, t).unwrap();
        worst = worst
            .max((rho.rho11() - b / (a + b)).abs())
            .max((rho.rho22() - a / (a + b)).abs())
            .max(rho.rho12().norm());
    }
    let pass = worst < 1e-8;
    report(
        "3",
        pass,
        format!("max deviation from diag(b, a)/(a+b) = {worst:.3e}"),
    );
    assert!(pass);
}

/// Final φ of `n` linear Langevin runs (γ = 1, g = 0, ε = 0.01) from φ0 to t = 1.
fn linear_ensemble(n: usize, master: u64) -> (LangevinParams, f64, f64, Vec<f64>) {
    let params = LangevinParams::new(1.0, 0.0, 0.01).unwrap();
    let (phi0, dt, steps) = (0.05, 1e-3, 1000);
    let finals = (0..n as u64)
        .map(|i| {
            let mut noise = NoiseSource::new(run_seed(master, i));
            let mut phi = phi0;
            for _ in 0..steps {
                phi = em_step(phi, &params, dt, noise.next_normal());
            }
            phi
        })
        .collect();
    (params, phi0, dt * steps as f64, finals)
}

fn linear_ensemble_csv(finals: &[f64]) -> String {
    let mut table = CsvTable::new(&["run", "phi"]);
    for (i, x) in finals.iter().enumerate() {
        table.push(&[i as f64, *x]);
    }
    table.into_string()
}

#[test]
fn criterion_4_linear_langevin_distribution() {
    let _g = serial();
    let start = Instant::now();
    let n = 100_000;
    let (params, phi0, t, finals) = linear_ensemble(n, 4);
    let nf = n as f64;
    let mean = finals.iter().sum::<f64>() / nf;
    let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let m4 = finals.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    let plus = finals.iter().filter(|x| **x > 0.0).count() as f64 / nf;
    let elapsed = start.elapsed();

    let mean_ref = (params.gamma * t).exp() * phi0;
    let var_ref = variance_profile(t, &params, Convention::Mc);
    // Sign fraction against the integral of the propagated Gaussian over φ > 0.
    let p_ref = p_plus(mean_ref, var_ref).unwrap();

    let se_mean = (var / nf).sqrt();
    let se_var = ((m4 - var * var) / nf).sqrt();
    let se_p = (p_ref * (1.0 - p_ref) / nf).sqrt();
    let ok_mean = (mean - mean_ref).abs() <= 3.0 * se_mean;
    let ok_var = (var - var_ref).abs() <= 3.0 * se_var;
    let ok_p = (plus - p_ref).abs() <= 3.0 * se_p;
    let pass = ok_mean && ok_var && ok_p && elapsed < Duration::from_secs(30);
    report(
        "4",
        pass,
        format!(
            "mean {mean:.6} vs {mean_ref:.6} (±{:.1e}), var {var:.6} vs {var_ref:.6} (±{:.1e}), \
             P+ {plus:.5} vs {p_ref:.5} (±{:.1e}), runtime {elapsed:.2?}",
            3.0 * se_mean,
            3.0 * se_var,
            3.0 * se_p
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_optimization_condition() {
    let _g = serial();
    let p = tuned_device(2.0);
    let z = optimization_z(&p.langevin, p.mu, p.b_field, Convention::Mc).unwrap();
    let dmax = p.mu * p.b_field / (2.0 * p.langevin.gamma);
    let t0 = onset_time(&p.langevin, dmax).unwrap();
    let at_dmax = p_plus(dmax, variance_profile(t0, &p.langevin, Convention::Mc)).unwrap();
    let via_curve = analytic_p_plus_at_t0(0.5, &p, Convention::Mc).unwrap();
    let pass = ((z - 2.0) / 2.0).abs() < 1e-6
        && (at_dmax - 0.997_661).abs() < 1e-6
        && (via_curve - 0.997_661).abs() < 1e-6;
    report(
        "5",
        pass,
        format!(
            "epsilon = {:.6e}, z = {z:.9}, P+(δmax, t0) = {at_dmax:.7}",
            p.langevin.epsilon
        ),
    );
    assert!(pass);
}

fn analytic_curve(z: f64, n: usize) -> Vec<CalibrationPoint> {
    calibration_curve(
        &s3_grid(-0.5, 0.5, n),
        &tuned_device(z),
        Convention::Mc,
        None,
    )
    .unwrap()
}

#[test]
fn criterion_6a_calibration_shape() {
    let _g = serial();
    let mut pass = true;
    let mut notes = Vec::new();
    for z in [0.08, 2.0, 10.0] {
        let curve = analytic_curve(z, 101);
        let monotone = curve
            .windows(2)
            .all(|w| w[1].p_plus_analytic >= w[0].p_plus_analytic);
        let strictly = curve
            .windows(2)
            .all(|w| w[1].p_plus_analytic > w[0].p_plus_analytic);
        let anti = (0..curve.len())
            .map(|i| {
                (curve[i].p_plus_analytic + curve[curve.len() - 1 - i].p_plus_analytic - 1.0).abs()
            })
            .fold(0.0, f64::max);
        let lo = curve.first().unwrap().p_plus_analytic;
        let hi = curve.last().unwrap().p_plus_analytic;
        pass &= monotone && anti < 1e-12;
        if z == 2.0 {
            pass &= strictly;
        }
        if z == 0.08 {
            pass &= curve
                .iter()
                .all(|p| (0.39..=0.61).contains(&p.p_plus_analytic));
        }
        notes.push(format!(
            "z={z}: range [{lo:.5}, {hi:.5}], antisym err {anti:.1e}, strictly monotone {strictly}"
        ));
    }
    report("6a", pass, notes.join("; "));
    assert!(pass);
}

#[test]
fn criterion_6b_degeneracy_at_z10() {
    let _g = serial();
    let curve = analytic_curve(10.0, 101);
    let worst = curve
        .iter()
        .filter(|p| p.s3_init >= 0.1 * 0.5 - 1e-12)
        .map(|p| (p.p_plus_analytic - 1.0).abs())
        .fold(0.0, f64::max);
    let pass = worst < 1e-3;
    report(
        "6b",
        pass,
        format!("z=10: max |P+ − 1| over s3 ≥ 0.05 is {worst:.4} (limit 1e-3)"),
    );
    assert!(pass, "max |P+ - 1| = {worst} for s3 >= 0.05 at z = 10");
}

fn empirical_curve() -> Vec<CalibrationPoint> {
    let settings = EmpiricalSettings {
        n_runs: 10_000,
        master_seed: 6,
        mode: EnsembleMode::Decoupled,
    };
    calibration_curve(
        &s3_grid(-0.5, 0.5, 11),
        &tuned_device(2.0),
        Convention::Mc,
        Some(settings),
    )
    .unwrap()
}

#[test]
fn criterion_6c_empirical_agreement() {
    let _g = serial();
    let start = Instant::now();
    let curve = empirical_curve();
    let elapsed = start.elapsed();
    let mut failed = Vec::new();
    for p in &curve {
        let ok = p.agrees(3.0).unwrap();
        println!(
            "    s3 = {:+.2}: analytic {:.5}, empirical {:.5} ± {:.5} {}",
            p.s3_init,
            p.p_plus_analytic,
            p.freq_empirical.unwrap(),
            p.stderr.unwrap(),
            if ok { "ok" } else { "outside 3σ" }
        );
        if !ok {
            failed.push(p.s3_init);
        }
    }
    let pass = failed.is_empty() && elapsed < Duration::from_secs(300);
    report(
        "6c",
        pass,
        format!(
            "{} of {} grid points outside 3σ, runtime {elapsed:.2?}",
            failed.len(),
            curve.len()
        ),
    );
    assert!(pass, "grid points outside 3σ: {failed:?}");
}

struct LockinSummary {
    decided: usize,
    correlated: usize,
    median_purity: f64,
    dip_then_recover: usize,
    csv: String,
}

fn lockin_runs(rho0: &SpinDensityMatrix, master: u64) -> LockinSummary {
    let p = tuned_device(2.0).with_record_every(10).unwrap();
    let mut table = CsvTable::new(&[
        "run",
        "phi_final",
        "rho11_final",
        "purity_final",
        "purity_min",
    ]);
    let (mut decided, mut correlated, mut dip) = (0, 0, 0);
    let mut finals = Vec::with_capacity(1000);
    for i in 0..1000u64 {
        let rec = run_trajectory(rho0, &p, run_seed(master, i)).unwrap();
        let out = lockin_outcome(&rec).unwrap();
        if out.is_decided() {
            decided += 1;
            correlated += out.is_correlated() as usize;
        }
        let last = rec.len() - 1;
        let (argmin, pmin) =
            rec.purity
                .iter()
                .copied()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (k, v)| if v < acc.1 { (k, v) } else { acc },
                );
        if pmin < 0.95 && argmin < last && rec.purity[last] >= 0.99 {
            dip += 1;
        }
        finals.push(rec.purity[last]);
        table.push(&[
            i as f64,
            rec.phi[last],
            rec.rho11[last],
            rec.purity[last],
            pmin,
        ]);
    }
    finals.sort_by(f64::total_cmp);
    LockinSummary {
        decided,
        correlated,
        median_purity: 0.5 * (finals[499] + finals[500]),
        dip_then_recover: dip,
        csv: table.into_string(),
    }
}

fn mixed_start() -> SpinDensityMatrix {
    SpinDensityMatrix::new(0.9, 0.1, Complex64::new(0.28, 0.0)).unwrap()
}

#[test]
fn criterion_7_lockin_quartet() {
    let _g = serial();
    let p = tuned_device(2.0);
    assert!(p.theta * p.langevin.equilibrium() >= 10.0);
    let up = lockin_runs(&SpinDensityMatrix::pure_up(), 7);
    let mixed0 = mixed_start();
    assert!(purity(&mixed0) > 0.95 && mixed0.determinant() > 0.0);
    let mixed = lockin_runs(&mixed0, 77);

    let agreement = up.correlated as f64 / up.decided.max(1) as f64;
    let pass_a = up.decided > 0 && agreement >= 0.99;
    let pass_b = up.median_purity >= 0.99;
    let pass_c = mixed.dip_then_recover >= 1;
    report(
        "7",
        pass_a && pass_b && pass_c,
        format!(
            "(a) {}/{} decided runs correlated ({agreement:.4}); (b) median final purity {:.6}; \
             (c) {}/1000 mixed-start runs dip below 0.95 and recover to ≥ 0.99",
            up.correlated, up.decided, up.median_purity, mixed.dip_then_recover
        ),
    );
    assert!(pass_a && pass_b && pass_c);
}

#[test]
fn criterion_8_born_regime() {
    let _g = serial();
    let l = LangevinParams::new(1.0, 0.0, 0.01).unwrap();
    let p = MeasurementParams::new(l, 1.0, 0.1, 0.1, 0.5, 10.0, 0.01, 60.0).unwrap();
    let born_z = std::f64::consts::PI.sqrt() / 2.0;
    let grid = s3_grid(-0.01, 0.01, 11);
    let mut pass = true;
    let mut notes = Vec::new();
    for z in [0.5, born_z, 2.0] {
        let t = time_for_z(&p, z, Convention::Mc).unwrap();
        let fit = born_check(&p, &grid, Convention::Mc, BornEvaluation::FixedTime(t)).unwrap();
        let rel = (fit.alpha_fitted / fit.alpha_predicted - 1.0).abs();
        pass &= fit.regime_ok() && rel < 0.01 && (fit.z - z).abs() < 1e-12;
        notes.push(format!(
            "z={z:.4}: α = {:.6} vs z/√π = {:.6}",
            fit.alpha_fitted, fit.alpha_predicted
        ));
        if z == born_z {
            let var = variance_profile(t, &l, Convention::Mc);
            let born_dev = grid
                .iter()
                .map(|&s| (p_plus(p.mu / l.gamma * s * p.b_field, var).unwrap() - (s + 0.5)).abs())
                .fold(0.0, f64::max);
            pass &= (fit.alpha_fitted - 0.5).abs() < 0.01 && born_dev < 0.01;
            notes.push(format!("max |P+ − ‖P+ψ‖²| = {born_dev:.2e}"));
        }
    }
    // The linearization error shrinks with the grid.
    let t = time_for_z(&p, 2.0, Convention::Mc).unwrap();
    let errs: Vec<f64> = [0.2, 0.1, 0.05, 0.01]
        .iter()
        .map(|&w| {
            let fit = born_check(
                &p,
                &s3_grid(-w, w, 11),
                Convention::Mc,
                BornEvaluation::FixedTime(t),
            )
            .unwrap();
            (fit.alpha_fitted / fit.alpha_predicted - 1.0).abs()
        })
        .collect();
    pass &= errs.windows(2).all(|w| w[1] < w[0]);
    notes.push(format!(
        "z=2 relative error vs grid half-width 0.2→0.01: {errs:?}"
    ));
    report("8", pass, notes.join("; "));
    assert!(pass);
}

#[test]
fn criterion_9_determinism() {
    let _g = serial();
    let c4 = || linear_ensemble_csv(&linear_ensemble(100_000, 4).3);
    let c6 = || calibration_csv(&empirical_curve());
    let c7 =
        || lockin_runs(&SpinDensityMatrix::pure_up(), 7).csv + &lockin_runs(&mixed_start(), 77).csv;
    let same4 = c4() == c4();
    let same6 = c6() == c6();
    let same7 = c7() == c7();
    let pass = same4 && same6 && same7;
    report(
        "9",
        pass,
        format!("byte-identical reruns: c4 {same4}, c6 {same6}, c7 {same7}"),
    );
    assert!(pass);
}
