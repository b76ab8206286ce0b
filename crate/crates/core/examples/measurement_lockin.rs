// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! One coupled measurement per initial spin. The pointer picks a phase and
//! the spin is driven into the matching eigenstate.

use ssb_measure::measurement::{lockin_outcome, run_trajectory, LockIn, MeasurementParams};
use ssb_measure::order_parameter::{tune_noise_for_z, Convention, LangevinParams};
use ssb_measure::spin_dynamics::SpinDensityMatrix;

pub fn run() -> ssb_measure::Result<Vec<(f64, LockIn, f64, f64)>> {
    let l = LangevinParams::new(1.0, 1.0, 0.0)?;
    let eps = tune_noise_for_z(2.0, &l, 1.0, 0.1, Convention::Mc)?;
    let params =
        MeasurementParams::new(l.with_epsilon(eps)?, 1.0, 0.1, 0.1, 0.5, 10.0, 0.01, 40.0)?
            .with_record_every(50)?;
    let mut rows = Vec::new();
    for (i, s3) in [0.5, 0.3, -0.3, -0.5].into_iter().enumerate() {
        let rec = run_trajectory(
            &SpinDensityMatrix::pure_with_s3(s3)?,
            &params,
            100 + i as u64,
        )?;
        let out = lockin_outcome(&rec).expect("non-empty record");
        rows.push((s3, out, *rec.phi.last().unwrap(), rec.min_purity().unwrap()));
    }
    Ok(rows)
}

fn main() -> ssb_measure::Result<()> {
    for (s3, out, phi, pmin) in run()? {
        println!(
            "<S3> = {s3:+.1}: spin {:?}, phase {:?}, final phi {phi:+.4}, min purity {pmin:.3}",
            out.spin, out.phase
        );
    }
    Ok(())
}
