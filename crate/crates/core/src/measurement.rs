// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! The measuring device: spin and order parameter evolved together.
//!
//! ```text
//! dφ/dt = γφ − gφ³ + μ⟨S3⟩B + η
//! dρ/dt = master equation with ω = μφB and rates a(φ), b(φ)
//! ```
//!
//! The spin biases the roll of φ, and the sign of φ in turn selects which
//! spin state the reservoir drives towards. This positive feedback locks
//! the spin to the chosen phase.

use num_complex::Complex64;

use crate::csv::CsvTable;
use crate::error::{config, domain, Result};
use crate::order_parameter::{drift, LangevinParams, NoiseSource};
use crate::spin_dynamics::{
    add, generator, purity, scale, Mat2, ReservoirCoefficients, SpinDensityMatrix, STABILITY_LIMIT,
};

/// Parameters of the coupled device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementParams {
    pub langevin: LangevinParams,
    /// Spin–field coupling μ > 0.
    pub mu: f64,
    /// Field strength along z, non-zero.
    pub b_field: f64,
    /// Total flip rate Γ = a + b.
    pub base_rate: f64,
    /// Dephasing rate c.
    pub c_rate: f64,
    /// `ħμB/(kT)` per unit φ: the detailed-balance exponent is `theta·φ`.
    pub theta: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Keep every k-th step in a [`TrajectoryRecord`].
    pub record_every: usize,
    /// Starting value of φ; zero is the symmetric phase.
    pub phi0: f64,
}

impl MeasurementParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        langevin: LangevinParams,
        mu: f64,
        b_field: f64,
        base_rate: f64,
        c_rate: f64,
        theta: f64,
        dt: f64,
        t_end: f64,
    ) -> Result<Self> {
        let p = Self {
            langevin,
            mu,
            b_field,
            base_rate,
            c_rate,
            theta,
            dt,
            t_end,
            record_every: 1,
            phi0: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(domain(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.b_field != 0.0 && self.b_field.is_finite()) {
            return Err(domain("field B must be finite and non-zero"));
        }
        if !(self.base_rate > 0.0 && self.base_rate.is_finite()) {
            return Err(domain(format!(
                "base rate must be positive, got {}",
                self.base_rate
            )));
        }
        if !(self.c_rate >= 0.0 && self.c_rate.is_finite()) {
            return Err(domain(format!(
                "dephasing rate must be non-negative, got {}",
                self.c_rate
            )));
        }
        if !self.theta.is_finite() {
            return Err(domain("theta must be finite"));
        }
        if !(self.dt > 0.0) {
            return Err(config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(config(format!(
                "t_end must be at least dt, got {}",
                self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(config("record_every must be at least 1"));
        }
        if !self.phi0.is_finite() {
            return Err(domain("phi0 must be finite"));
        }
        Ok(())
    }

    pub fn with_record_every(mut self, k: usize) -> Result<Self> {
        self.record_every = k;
        self.validate()?;
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.langevin = self.langevin.with_epsilon(epsilon)?;
        Ok(self)
    }

    /// Number of integration steps, `round(t_end/dt)`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }
}

/// Instantaneous state of the device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledState {
    pub phi: f64,
    pub rho: SpinDensityMatrix,
    pub t: f64,
}

impl CoupledState {
    pub fn new(phi: f64, rho: SpinDensityMatrix) -> Self {
        Self { phi, rho, t: 0.0 }
    }

    /// Image under φ → −φ with the spin flipped.
    pub fn mirrored(&self) -> Self {
        Self {
            phi: -self.phi,
            rho: self.rho.mirrored(),
            t: self.t,
        }
    }
}

/// `⟨S3⟩·B` for a field along z.
pub fn spin_projection(rho: &SpinDensityMatrix, b_field: f64) -> f64 {
    b_field * (rho.rho11() - rho.rho22()) / 2.0
}

/// Splitting `ω = μφB` seen by the spin.
pub fn effective_frequency(phi: f64, mu: f64, b_field: f64) -> f64 {
    mu * phi * b_field
}

/// Down- and up-flip rates `(a, b)` at the current φ.
///
/// The pair sums to Γ and satisfies `a/b = exp(−theta·φ)`.
pub fn rates_from_phi(phi: f64, params: &MeasurementParams) -> (f64, f64) {
    let x = params.theta * phi;
    let gamma = params.base_rate;
    // Written so that x → −x swaps the two results bit for bit.
    if x >= 0.0 {
        let e = (-x).exp();
        (gamma * e / (1.0 + e), gamma / (1.0 + e))
    } else {
        let e = x.exp();
        (gamma / (1.0 + e), gamma * e / (1.0 + e))
    }
}

/// Tilted double-well `V(φ) = −γφ²/2 + gφ⁴/4 − μ·(⟨S3⟩B)·φ`.
pub fn biased_potential(phi: f64, langevin: &LangevinParams, mu: f64, spin_bias: f64) -> f64 {
    -0.5 * langevin.gamma * phi * phi + 0.25 * langevin.g * phi.powi(4) - mu * spin_bias * phi
}

fn coefficients(phi: f64, params: &MeasurementParams) -> ReservoirCoefficients {
    let (a, b) = rates_from_phi(phi, params);
    ReservoirCoefficients {
        a,
        b,
        c: params.c_rate,
        omega: effective_frequency(phi, params.mu, params.b_field),
    }
}

fn joint_rhs(phi: f64, rho: &Mat2, params: &MeasurementParams) -> (f64, Mat2) {
    let bias = params.mu * params.b_field * (rho[0][0].re - rho[1][1].re) / 2.0;
    let dphi = drift(phi, &params.langevin) + bias;
    (dphi, generator(rho, &coefficients(phi, params)))
}

/// One step of the coupled dynamics.
///
/// The deterministic pair is advanced with RK4 (rates re-evaluated at every
/// stage); the noise kick `√(ε·dt)·n` is then added to φ only.
pub fn coupled_step(
    state: &CoupledState,
    params: &MeasurementParams,
    n: f64,
) -> Result<CoupledState> {
    let h = params.dt;
    let load = params.base_rate
        + params.c_rate
        + effective_frequency(state.phi, params.mu, params.b_field).abs();
    if !(h * load < STABILITY_LIMIT) {
        return Err(config(format!(
            "step size {h} violates dt·(Γ + c + |μφB|) < {STABILITY_LIMIT} at φ = {}",
            state.phi
        )));
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let m0 = state.rho.to_matrix();
    let phi0 = state.phi;

    let (p1, k1) = joint_rhs(phi0, &m0, params);
    let (p2, k2) = joint_rhs(
        phi0 + 0.5 * h * p1,
        &add(&m0, &scale(c(0.5 * h), &k1)),
        params,
    );
    let (p3, k3) = joint_rhs(
        phi0 + 0.5 * h * p2,
        &add(&m0, &scale(c(0.5 * h), &k2)),
        params,
    );
    let (p4, k4) = joint_rhs(phi0 + h * p3, &add(&m0, &scale(c(h), &k3)), params);

    let phi = phi0 + h / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
    let incr = add(
        &add(&k1, &scale(c(2.0), &k2)),
        &add(&scale(c(2.0), &k3), &k4),
    );
    let m = add(&m0, &scale(c(h / 6.0), &incr));

    let kick = (params.langevin.epsilon * h).sqrt() * n;
    Ok(CoupledState {
        phi: phi + kick,
        rho: SpinDensityMatrix::from_matrix_unchecked(&m),
        t: state.t + h,
    })
}

/// Integrates from `(phi0, rho0)` to `t_end`, calling `observe` after every
/// step with the step index (starting at 1).
pub fn simulate(
    rho0: &SpinDensityMatrix,
    params: &MeasurementParams,
    noise: &mut NoiseSource,
    mut observe: impl FnMut(usize, &CoupledState),
) -> Result<CoupledState> {
    params.validate()?;
    let steps = params.steps();
    let mut state = CoupledState::new(params.phi0, *rho0);
    for i in 1..=steps {
        let n = noise.next_normal();
        state = coupled_step(&state, params, n)?;
        // Pin the time grid to i·dt so records are exactly uniform.
        state.t = i as f64 * params.dt;
        observe(i, &state);
    }
    Ok(state)
}

/// Uniformly sampled history of one measurement run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
    pub rho11: Vec<f64>,
    pub rho22: Vec<f64>,
    pub re_rho12: Vec<f64>,
    pub im_rho12: Vec<f64>,
    pub purity: Vec<f64>,
    /// `√(γ/g)` of the run, used for the phase dead-band.
    pub phi_scale: f64,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn push(&mut self, s: &CoupledState) {
        self.t.push(s.t);
        self.phi.push(s.phi);
        self.rho11.push(s.rho.rho11());
        self.rho22.push(s.rho.rho22());
        self.re_rho12.push(s.rho.rho12().re);
        self.im_rho12.push(s.rho.rho12().im);
        self.purity.push(purity(&s.rho));
    }

    pub fn final_purity(&self) -> Option<f64> {
        self.purity.last().copied()
    }

    pub fn min_purity(&self) -> Option<f64> {
        self.purity.iter().copied().reduce(f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut table = CsvTable::new(&[
            "t", "phi", "rho11", "rho22", "re_rho12", "im_rho12", "purity",
        ]);
        for i in 0..self.len() {
            table.push(&[
                self.t[i],
                self.phi[i],
                self.rho11[i],
                self.rho22[i],
                self.re_rho12[i],
                self.im_rho12[i],
                self.purity[i],
            ]);
        }
        table.into_string()
    }
}

/// Runs one measurement from `phi0` and records every `record_every`-th
/// step, plus the initial and final states.
pub fn run_trajectory(
    rho0: &SpinDensityMatrix,
    params: &MeasurementParams,
    seed: u64,
) -> Result<TrajectoryRecord> {
    params.validate()?;
    let mut rec = TrajectoryRecord {
        phi_scale: params.langevin.equilibrium(),
        ..Default::default()
    };
    rec.push(&CoupledState::new(params.phi0, *rho0));
    let steps = params.steps();
    let k = params.record_every;
    let mut noise = NoiseSource::new(seed);
    simulate(rho0, params, &mut noise, |i, s| {
        if i % k == 0 || i == steps {
            rec.push(s);
        }
    })?;
    Ok(rec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinLabel {
    Up,
    Down,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseLabel {
    PlusPhase,
    MinusPhase,
    NearZero,
}

/// Final spin and phase of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LockIn {
    pub spin: SpinLabel,
    pub phase: PhaseLabel,
}

impl LockIn {
    /// True when both labels are decided and point the same way.
    pub fn is_correlated(&self) -> bool {
        matches!(
            (self.spin, self.phase),
            (SpinLabel::Up, PhaseLabel::PlusPhase) | (SpinLabel::Down, PhaseLabel::MinusPhase)
        )
    }

    pub fn is_decided(&self) -> bool {
        self.spin != SpinLabel::Undecided && self.phase != PhaseLabel::NearZero
    }
}

/// Dead-band on `|rho11 − rho22|` below which the spin is undecided.
pub const SPIN_DEAD_BAND: f64 = 0.1;
/// Dead-band on `|φ|`, as a fraction of `√(γ/g)`.
pub const PHASE_DEAD_BAND: f64 = 0.1;

pub fn classify_spin(rho11: f64, rho22: f64) -> SpinLabel {
    let d = rho11 - rho22;
    if d.abs() < SPIN_DEAD_BAND {
        SpinLabel::Undecided
    } else if d > 0.0 {
        SpinLabel::Up
    } else {
        SpinLabel::Down
    }
}

pub fn classify_phase(phi: f64, phi_scale: f64) -> PhaseLabel {
    if !(phi.abs() >= PHASE_DEAD_BAND * phi_scale) {
        PhaseLabel::NearZero
    } else if phi > 0.0 {
        PhaseLabel::PlusPhase
    } else {
        PhaseLabel::MinusPhase
    }
}

/// Labels the final state of a trajectory; `None` for an empty record.
pub fn lockin_outcome(traj: &TrajectoryRecord) -> Option<LockIn> {
    let last = traj.len().checked_sub(1)?;
    Some(LockIn {
        spin: classify_spin(traj.rho11[last], traj.rho22[last]),
        phase: classify_phase(traj.phi[last], traj.phi_scale),
    })
}
