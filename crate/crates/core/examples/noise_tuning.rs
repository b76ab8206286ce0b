// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! Picks the noise strength that gives a target optimization parameter z.

use ssb_measure::order_parameter::{
    epsilon_turning_point, onset_time, optimization_z, tune_noise_for_z, Convention, LangevinParams,
};

pub fn run() -> ssb_measure::Result<Vec<(f64, f64, f64)>> {
    let base = LangevinParams::new(1.0, 1.0, 0.0)?;
    let (mu, b) = (1.0, 0.1);
    let mut rows = Vec::new();
    for z in [0.08, 0.5, 2.0, 10.0] {
        let eps = tune_noise_for_z(z, &base, mu, b, Convention::Mc)?;
        let p = base.with_epsilon(eps)?;
        let back = optimization_z(&p, mu, b, Convention::Mc)?;
        assert!((back / z - 1.0).abs() < 1e-6);
        rows.push((z, eps, onset_time(&p, mu * b / 2.0)?));
    }
    Ok(rows)
}

fn main() -> ssb_measure::Result<()> {
    let base = LangevinParams::new(1.0, 1.0, 0.0)?;
    println!(
        "z is smallest at epsilon = {:.4e}",
        epsilon_turning_point(&base, 1.0, 0.1).unwrap()
    );
    println!("{:>6} {:>12} {:>8}", "z", "epsilon", "t0");
    for (z, eps, t0) in run()? {
        println!("{z:>6} {eps:>12.4e} {t0:>8.3}");
    }
    Ok(())
}
