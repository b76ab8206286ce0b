// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-level system coupled to a stationary reservoir.
//!
//! The reduced master equation has a coherent part `-iω[S3, ρ]` and three
//! dissipative channels with real rates:
//!
//! ```text
//! dρ/dt = -iω[S3, ρ] + ( a[L ρ, L†] + b[R ρ, R†] + c[S3 ρ, S3] + h.c. )
//! ```
//!
//! with `S3 = diag(+1/2, -1/2)`, `L = |↓⟩⟨↑|` and `R = |↑⟩⟨↓|`. The rate `a`
//! flips the spin down and `b` flips it up, so the stationary state is
//! `diag(b, a) / (a + b)`. Populations relax at `2(a + b)` and the
//! coherence decays at `a + b + c` while rotating at `ω`.
//!
//! Two solvers are provided: [`evolve_analytic`] evaluates the closed form
//! and [`evolve_numeric`] integrates the generator above with classical RK4.
//! They are written independently and are expected to agree.

use num_complex::Complex64;

use crate::error::{config, domain, Result};

/// Dense 2×2 complex matrix, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-12;

/// Largest `dt · (a + b + c + |ω|)` accepted by the fixed-step integrator.
pub const STABILITY_LIMIT: f64 = 0.1;

/// State of the measured spin in the S3 eigenbasis (index 1 = up).
///
/// `rho21` is not stored; it is the complex conjugate of `rho12`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinDensityMatrix {
    rho11: f64,
    rho22: f64,
    rho12: Complex64,
}

impl SpinDensityMatrix {
    /// Validated constructor.
    pub fn new(rho11: f64, rho22: f64, rho12: Complex64) -> Result<Self> {
        if !(rho11.is_finite() && rho22.is_finite() && rho12.re.is_finite() && rho12.im.is_finite())
        {
            return Err(domain("density matrix entries must be finite"));
        }
        if (rho11 + rho22 - 1.0).abs() > TRACE_TOL {
            return Err(domain(format!("trace must be one, got {}", rho11 + rho22)));
        }
        if rho11 < 0.0 || rho22 < 0.0 {
            return Err(domain("populations must be non-negative"));
        }
        if rho11 * rho22 - rho12.norm_sqr() < -POSITIVITY_TOL {
            return Err(domain("density matrix is not positive semidefinite"));
        }
        Ok(Self {
            rho11,
            rho22,
            rho12,
        })
    }

    /// Builds from the up population and the coherence; `rho22 = 1 - rho11`.
    pub fn from_population(rho11: f64, rho12: Complex64) -> Result<Self> {
        Self::new(rho11, 1.0 - rho11, rho12)
    }

    /// Pure state with `⟨S3⟩ = s` on the x–z great circle (real, non-negative coherence).
    pub fn pure_with_s3(s: f64) -> Result<Self> {
        if !(-0.5..=0.5).contains(&s) {
            return Err(domain(format!("<S3> must lie in [-1/2, 1/2], got {s}")));
        }
        let rho11 = 0.5 + s;
        let rho22 = 0.5 - s;
        Self::new(rho11, rho22, Complex64::new((rho11 * rho22).sqrt(), 0.0))
    }

    pub fn pure_up() -> Self {
        Self {
            rho11: 1.0,
            rho22: 0.0,
            rho12: ZERO,
        }
    }

    pub fn pure_down() -> Self {
        Self {
            rho11: 0.0,
            rho22: 1.0,
            rho12: ZERO,
        }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho11: 0.5,
            rho22: 0.5,
            rho12: ZERO,
        }
    }

    /// Reads populations and coherence out of a full matrix without validation.
    ///
    /// Integrators use this; their outputs can sit a few ulps outside the
    /// validated region.
    pub fn from_matrix_unchecked(m: &Mat2) -> Self {
        Self {
            rho11: m[0][0].re,
            rho22: m[1][1].re,
            rho12: m[0][1],
        }
    }

    pub fn rho11(&self) -> f64 {
        self.rho11
    }

    pub fn rho22(&self) -> f64 {
        self.rho22
    }

    pub fn rho12(&self) -> Complex64 {
        self.rho12
    }

    pub fn rho21(&self) -> Complex64 {
        self.rho12.conj()
    }

    pub fn trace(&self) -> f64 {
        self.rho11 + self.rho22
    }

    /// `rho11·rho22 − |rho12|²`, the determinant; non-negative for physical states.
    pub fn determinant(&self) -> f64 {
        self.rho11 * self.rho22 - self.rho12.norm_sqr()
    }

    /// `⟨S3⟩ = (rho11 − rho22)/2`.
    pub fn s3(&self) -> f64 {
        0.5 * (self.rho11 - self.rho22)
    }

    pub fn to_matrix(&self) -> Mat2 {
        [
            [Complex64::new(self.rho11, 0.0), self.rho12],
            [self.rho12.conj(), Complex64::new(self.rho22, 0.0)],
        ]
    }

    /// The image under the Z2 spin flip: populations swapped, coherence conjugated.
    pub fn mirrored(&self) -> Self {
        Self {
            rho11: self.rho22,
            rho22: self.rho11,
            rho12: self.rho12.conj(),
        }
    }
}

/// Reservoir rates and the level splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirCoefficients {
    /// Down-flip rate.
    pub a: f64,
    /// Up-flip rate.
    pub b: f64,
    /// Dephasing rate.
    pub c: f64,
    /// Level splitting ω (may be negative).
    pub omega: f64,
}

impl ReservoirCoefficients {
    pub fn new(a: f64, b: f64, c: f64, omega: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !v.is_finite() || v < 0.0 {
                return Err(domain(format!(
                    "rate {name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if !omega.is_finite() {
            return Err(domain("omega must be finite"));
        }
        Ok(Self { a, b, c, omega })
    }

    /// Sum of all rates plus `|ω|`; bounds the generator's spectral radius.
    pub fn stiffness(&self) -> f64 {
        self.a + self.b + self.c + self.omega.abs()
    }
}

/// Detailed-balance down-flip rate `a = b·exp(−ħω/kT)`.
pub fn fdr_rate(b: f64, omega: f64, temperature: f64, hbar: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(domain(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if !(b >= 0.0) {
        return Err(domain(format!("rate b must be non-negative, got {b}")));
    }
    Ok(b * (-hbar * omega / temperature).exp())
}

/// Closed-form state at time `t`.
pub fn evolve_analytic(
    rho0: &SpinDensityMatrix,
    coeffs: &ReservoirCoefficients,
    t: f64,
) -> Result<SpinDensityMatrix> {
    if !(t >= 0.0) {
        return Err(domain(format!("time must be non-negative, got {t}")));
    }
    let ReservoirCoefficients { a, b, c, omega } = *coeffs;
    let (c1, c4) = (rho0.rho11, rho0.rho22);
    let flip = a + b;
    let (rho11, rho22) = if flip > 0.0 {
        let decay = (-2.0 * flip * t).exp();
        (
            (b * (c1 + c4) + decay * (a * c1 - b * c4)) / flip,
            (a * (c1 + c4) + decay * (-a * c1 + b * c4)) / flip,
        )
    } else {
        (c1, c4)
    };
    let rho12 = rho0.rho12 * (-(Complex64::new(flip + c, omega)) * t).exp();
    Ok(SpinDensityMatrix {
        rho11,
        rho22,
        rho12,
    })
}

/// Fixed-step RK4 integration of the master equation up to time `t`.
///
/// The step actually used is `t / ceil(t / dt)`, never larger than `dt`.
pub fn evolve_numeric(
    rho0: &SpinDensityMatrix,
    coeffs: &ReservoirCoefficients,
    t: f64,
    dt: f64,
) -> Result<SpinDensityMatrix> {
    if !(t >= 0.0) {
        return Err(domain(format!("time must be non-negative, got {t}")));
    }
    if !(dt > 0.0) {
        return Err(config(format!("step size must be positive, got {dt}")));
    }
    if t == 0.0 {
        return Ok(*rho0);
    }
    if dt > t {
        return Err(config(format!(
            "step size {dt} exceeds integration time {t}"
        )));
    }
    if dt * coeffs.stiffness() >= STABILITY_LIMIT {
        return Err(config(format!(
            "step size {dt} violates dt·(a+b+c+|ω|) < {STABILITY_LIMIT}"
        )));
    }
    let steps = (t / dt).ceil() as usize;
    let h = t / steps as f64;
    let mut m = rho0.to_matrix();
    for _ in 0..steps {
        m = rk4_step(&m, coeffs, h);
    }
    Ok(SpinDensityMatrix::from_matrix_unchecked(&m))
}

/// `Tr ρ² = rho11² + rho22² + 2|rho12|²`.
pub fn purity(rho: &SpinDensityMatrix) -> f64 {
    rho.rho11 * rho.rho11 + rho.rho22 * rho.rho22 + 2.0 * rho.rho12.norm_sqr()
}

/// Long-time purity of a damped oscillator in a thermal bath, `tanh(ħω/2kT)`.
pub fn cl_purity_asymptote(omega: f64, temperature: f64, hbar: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(domain(format!(
            "oscillator frequency must be positive, got {omega}"
        )));
    }
    if !(temperature > 0.0) {
        return Err(domain(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    Ok((hbar * omega / (2.0 * temperature)).tanh())
}

// ---- generator ------------------------------------------------------------

fn mat(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Mat2 {
    [[a, b], [c, d]]
}

pub(crate) fn mul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

pub(crate) fn add(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        [x[0][0] + y[0][0], x[0][1] + y[0][1]],
        [x[1][0] + y[1][0], x[1][1] + y[1][1]],
    ]
}

pub(crate) fn sub(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        [x[0][0] - y[0][0], x[0][1] - y[0][1]],
        [x[1][0] - y[1][0], x[1][1] - y[1][1]],
    ]
}

pub(crate) fn scale(s: Complex64, x: &Mat2) -> Mat2 {
    [[s * x[0][0], s * x[0][1]], [s * x[1][0], s * x[1][1]]]
}

pub(crate) fn dagger(x: &Mat2) -> Mat2 {
    [
        [x[0][0].conj(), x[1][0].conj()],
        [x[0][1].conj(), x[1][1].conj()],
    ]
}

fn commutator(x: &Mat2, y: &Mat2) -> Mat2 {
    sub(&mul(x, y), &mul(y, x))
}

fn s3() -> Mat2 {
    mat(
        Complex64::new(0.5, 0.0),
        ZERO,
        ZERO,
        Complex64::new(-0.5, 0.0),
    )
}

fn lowering() -> Mat2 {
    mat(ZERO, ZERO, ONE, ZERO)
}

fn raising() -> Mat2 {
    mat(ZERO, ONE, ZERO, ZERO)
}

/// Right-hand side of the master equation for a full density matrix.
pub fn generator(rho: &Mat2, coeffs: &ReservoirCoefficients) -> Mat2 {
    let s3 = s3();
    let low = lowering();
    let up = raising();
    let rate = |r: f64| Complex64::new(r, 0.0);

    let coherent = scale(-I * coeffs.omega, &commutator(&s3, rho));
    let down_flip = scale(rate(coeffs.a), &commutator(&mul(&low, rho), &dagger(&low)));
    let up_flip = scale(rate(coeffs.b), &commutator(&mul(&up, rho), &dagger(&up)));
    let dephase = scale(rate(coeffs.c), &commutator(&mul(&s3, rho), &s3));
    let dissipative = add(&add(&down_flip, &up_flip), &dephase);

    add(&coherent, &add(&dissipative, &dagger(&dissipative)))
}

pub(crate) fn rk4_step(m: &Mat2, coeffs: &ReservoirCoefficients, h: f64) -> Mat2 {
    let half = Complex64::new(0.5 * h, 0.0);
    let full = Complex64::new(h, 0.0);
    let k1 = generator(m, coeffs);
    let k2 = generator(&add(m, &scale(half, &k1)), coeffs);
    let k3 = generator(&add(m, &scale(half, &k2)), coeffs);
    let k4 = generator(&add(m, &scale(full, &k3)), coeffs);
    let sum = add(
        &add(&k1, &scale(Complex64::new(2.0, 0.0), &k2)),
        &add(&scale(Complex64::new(2.0, 0.0), &k3), &k4),
    );
    add(m, &scale(Complex64::new(h / 6.0, 0.0), &sum))
}
