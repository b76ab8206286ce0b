// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! Outcome probability against the initial spin for weak, matched and strong
//! bias. The empirical column comes from a small decoupled ensemble.

use ssb_measure::ensemble::{
    calibration_curve, s3_grid, CalibrationPoint, EmpiricalSettings, EnsembleMode,
};
use ssb_measure::measurement::MeasurementParams;
use ssb_measure::order_parameter::{tune_noise_for_z, Convention, LangevinParams};

pub fn run() -> ssb_measure::Result<Vec<(f64, Vec<CalibrationPoint>)>> {
    let l = LangevinParams::new(1.0, 1.0, 0.0)?;
    let grid = s3_grid(-0.5, 0.5, 5);
    let mut curves = Vec::new();
    for z in [0.08, 2.0, 10.0] {
        let eps = tune_noise_for_z(z, &l, 1.0, 0.1, Convention::Mc)?;
        let params =
            MeasurementParams::new(l.with_epsilon(eps)?, 1.0, 0.1, 0.1, 0.5, 10.0, 0.01, 60.0)?;
        let settings = EmpiricalSettings {
            n_runs: 400,
            master_seed: 7,
            mode: EnsembleMode::Decoupled,
        };
        curves.push((
            z,
            calibration_curve(&grid, &params, Convention::Mc, Some(settings))?,
        ));
    }
    Ok(curves)
}

fn main() -> ssb_measure::Result<()> {
    for (z, curve) in run()? {
        println!("z = {z}");
        for p in curve {
            println!(
                "  <S3> = {:+.2}  analytic {:.4}  empirical {:.4}",
                p.s3_init,
                p.p_plus_analytic,
                p.freq_empirical.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
