// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! Euler–Maruyama ensemble of the linearized order parameter compared with
//! the propagated Gaussian.

use ssb_measure::ensemble::run_seed;
use ssb_measure::order_parameter::{
    em_step, gaussian_propagate, p_plus, variance_profile, Convention, GridDensity, LangevinParams,
    NoiseSource,
};

pub struct Summary {
    pub mean: f64,
    pub variance: f64,
    pub frac_plus: f64,
    pub predicted: (f64, f64, f64),
}

pub fn run() -> ssb_measure::Result<Summary> {
    let params = LangevinParams::new(1.0, 0.0, 0.01)?;
    let (phi0, dt, steps, n) = (0.05, 1e-3, 1000, 5000);
    let finals: Vec<f64> = (0..n as u64)
        .map(|i| {
            let mut noise = NoiseSource::new(run_seed(1, i));
            (0..steps).fold(phi0, |x, _| em_step(x, &params, dt, noise.next_normal()))
        })
        .collect();
    let nf = n as f64;
    let mean = finals.iter().sum::<f64>() / nf;
    let variance = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let frac_plus = finals.iter().filter(|x| **x > 0.0).count() as f64 / nf;

    let dens = gaussian_propagate(
        &GridDensity::delta(-0.1, 0.1, 201, phi0)?,
        1.0,
        &params,
        Convention::Mc,
    )?;
    let var = variance_profile(1.0, &params, Convention::Mc);
    Ok(Summary {
        mean,
        variance,
        frac_plus,
        predicted: (dens.mean(), dens.variance(), p_plus(dens.mean(), var)?),
    })
}

fn main() -> ssb_measure::Result<()> {
    let s = run()?;
    println!("          simulated   propagated");
    println!("mean      {:.6}    {:.6}", s.mean, s.predicted.0);
    println!("variance  {:.6}    {:.6}", s.variance, s.predicted.1);
    println!("P(φ > 0)  {:.4}      {:.4}", s.frac_plus, s.predicted.2);
    Ok(())
}
