// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! In the linear regime the outcome probability is linear in the initial
//! polarization with slope z/√π; at z = √π/2 it equals |⟨↑|ψ⟩|².

use ssb_measure::ensemble::{born_check, s3_grid, time_for_z, BornEvaluation, BornFit};
use ssb_measure::measurement::MeasurementParams;
use ssb_measure::order_parameter::{Convention, LangevinParams};

pub fn run() -> ssb_measure::Result<Vec<BornFit>> {
    let l = LangevinParams::new(1.0, 0.0, 0.01)?;
    let params = MeasurementParams::new(l, 1.0, 0.1, 0.1, 0.5, 10.0, 0.01, 60.0)?;
    let grid = s3_grid(-0.01, 0.01, 11);
    [0.25, std::f64::consts::PI.sqrt() / 2.0, 1.5]
        .into_iter()
        .map(|z| {
            let t = time_for_z(&params, z, Convention::Mc)?;
            born_check(&params, &grid, Convention::Mc, BornEvaluation::FixedTime(t))
        })
        .collect()
}

fn main() -> ssb_measure::Result<()> {
    for fit in run()? {
        println!(
            "z = {:.4}: slope {:.5}, z/sqrt(pi) = {:.5}",
            fit.z, fit.alpha_fitted, fit.alpha_predicted
        );
    }
    Ok(())
}
