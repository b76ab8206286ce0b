// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! A spin prepared along x relaxes in a fixed field. Purity first drops as
//! the coherence dies, then climbs back toward the thermal value.

use num_complex::Complex64;
use ssb_measure::spin_dynamics::{
    evolve_analytic, evolve_numeric, purity, ReservoirCoefficients, SpinDensityMatrix,
};

pub fn run() -> ssb_measure::Result<Vec<(f64, f64)>> {
    let rho0 = SpinDensityMatrix::new(0.5, 0.5, Complex64::new(0.5, 0.0))?;
    let coeffs = ReservoirCoefficients::new(0.99, 0.01, 1.0, 10.0)?;
    let mut curve = Vec::new();
    for i in 0..=20 {
        let t = 0.1 * i as f64;
        let exact = evolve_analytic(&rho0, &coeffs, t)?;
        let rk4 = evolve_numeric(&rho0, &coeffs, t, 1e-3_f64.min(t.max(1e-9)))?;
        assert!((purity(&exact) - purity(&rk4)).abs() < 1e-9);
        curve.push((t, purity(&exact)));
    }
    Ok(curve)
}

fn main() -> ssb_measure::Result<()> {
    for (t, p) in run()? {
        println!(
            "t = {t:4.1}  purity = {p:.6}  {}",
            "#".repeat((60.0 * (p - 0.7)).max(0.0) as usize)
        );
    }
    Ok(())
}
