// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! Reduced order-parameter dynamics.
//!
//! The pointer variable φ obeys the overdamped Langevin equation
//!
//! ```text
//! dφ/dt = γφ − gφ³ + η(t),     ⟨η(t)η(t')⟩ = ε δ(t − t')
//! ```
//!
//! whose symmetric point φ = 0 is unstable for γ > 0. In the linear regime
//! (g = 0) the transition density is Gaussian with mean `e^{γt}·y`; its
//! variance is [`variance_profile`]. The sign statistics, onset time and the
//! bias-to-spread ratio `z` that characterise a measurement are built on top.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{config, domain, Error, Result};

/// Lower end of the noise-strength search in [`tune_noise_for_z`].
pub const EPSILON_FLOOR: f64 = 1e-12;

/// Parameters of the reduced Langevin equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinParams {
    /// Linear instability rate γ > 0.
    pub gamma: f64,
    /// Quartic saturation g ≥ 0; zero selects the linearized dynamics.
    pub g: f64,
    /// White-noise strength ε ≥ 0.
    pub epsilon: f64,
}

impl LangevinParams {
    pub fn new(gamma: f64, g: f64, epsilon: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(domain(format!("gamma must be positive, got {gamma}")));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(domain(format!("g must be non-negative, got {g}")));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(domain(format!(
                "epsilon must be non-negative, got {epsilon}"
            )));
        }
        Ok(Self { gamma, g, epsilon })
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(self.gamma, self.g, epsilon)
    }

    /// Magnitude of the broken-phase minima, `√(γ/g)`; infinite when g = 0.
    pub fn equilibrium(&self) -> f64 {
        (self.gamma / self.g).sqrt()
    }
}

/// Which variance law to use for the linear spread.
///
/// `Mc` is the Itô variance of the Langevin equation and is what the Monte
/// Carlo ensembles reproduce. `Paper` is twice as large,
/// `(ε/γ)(e^{2γt} − 1)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Convention {
    Paper,
    #[default]
    Mc,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Paper => "paper",
            Convention::Mc => "mc",
        })
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Convention::Paper),
            "mc" => Ok(Convention::Mc),
            other => Err(config(format!(
                "unknown convention {other:?}, expected paper or mc"
            ))),
        }
    }
}

/// Seeded stream of standard-normal deviates.
///
/// Equal seeds give bit-identical streams on every platform.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    seed: u64,
    drawn: u64,
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            drawn: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of deviates drawn so far.
    pub fn position(&self) -> u64 {
        self.drawn
    }

    pub fn next_normal(&mut self) -> f64 {
        self.drawn += 1;
        StandardNormal.sample(&mut self.rng)
    }
}

/// Deterministic force `γφ − gφ³`.
pub fn drift(phi: f64, params: &LangevinParams) -> f64 {
    params.gamma * phi - params.g * phi * phi * phi
}

/// One Euler–Maruyama step driven by the standard-normal deviate `n`.
pub fn em_step(phi: f64, params: &LangevinParams, dt: f64, n: f64) -> f64 {
    phi + drift(phi, params) * dt + (params.epsilon * dt).sqrt() * n
}

/// Variance of the linearized order parameter started from a sharp value.
pub fn variance_profile(t: f64, params: &LangevinParams, convention: Convention) -> f64 {
    let growth = (2.0 * params.gamma * t).exp_m1();
    match convention {
        Convention::Paper => params.epsilon / params.gamma * growth,
        Convention::Mc => params.epsilon / (2.0 * params.gamma) * growth,
    }
}

/// Probability density sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    /// Position of the first grid point.
    pub start: f64,
    /// Grid spacing.
    pub step: f64,
    pub values: Vec<f64>,
}

impl GridDensity {
    /// Uniform grid of `n ≥ 2` points covering `[lo, hi]`, all zero.
    pub fn zeros(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(domain("grid needs at least two points and hi > lo"));
        }
        Ok(Self {
            start: lo,
            step: (hi - lo) / (n - 1) as f64,
            values: vec![0.0; n],
        })
    }

    /// Unit mass concentrated on the grid point nearest to `x`.
    pub fn delta(lo: f64, hi: f64, n: usize, x: f64) -> Result<Self> {
        let mut d = Self::zeros(lo, hi, n)?;
        let idx = ((x - lo) / d.step).round();
        if idx < 1.0 || idx > (n - 2) as f64 {
            return Err(domain("delta location must be an interior grid point"));
        }
        d.values[idx as usize] = 1.0 / d.step;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Trapezoidal quadrature of `f(φ)·p(φ)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.len();
        let mut acc = 0.0;
        for (i, &p) in self.values.iter().enumerate() {
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            acc += w * p * f(self.point(i));
        }
        acc * self.step
    }

    pub fn mass(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    pub fn mean(&self) -> f64 {
        self.integrate(|x| x) / self.mass()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.integrate(|x| (x - m) * (x - m)) / self.mass()
    }
}

/// Default number of points of the output grid of [`gaussian_propagate`].
pub const PROPAGATION_GRID_POINTS: usize = 2048;

/// Evolves a density under the linearized Langevin equation.
///
/// Each input point `y` is transported to `e^{γt}·y` and smeared with the
/// Gaussian of variance [`variance_profile`]. The kernel is averaged over the
/// output cells, so arbitrarily narrow spreads (including ε = 0) are handled.
/// The quartic term is ignored. The output grid is symmetric about zero with
/// half-width `max(6σ + e^{γt}·max|y|, 3√(γ/g))`.
pub fn gaussian_propagate(
    p0: &GridDensity,
    t: f64,
    params: &LangevinParams,
    convention: Convention,
) -> Result<GridDensity> {
    if !(t >= 0.0) {
        return Err(domain(format!("time must be non-negative, got {t}")));
    }
    if p0.len() < 2 || p0.values.iter().any(|v| !(*v >= 0.0)) {
        return Err(domain(
            "initial density must be non-negative on at least two points",
        ));
    }
    if t == 0.0 {
        return Ok(p0.clone());
    }
    let growth = (params.gamma * t).exp();
    let sigma = variance_profile(t, params, convention).sqrt();
    let reach = p0
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, _)| p0.point(i).abs() + p0.step)
        .fold(0.0, f64::max);
    let mut half_width = 6.0 * sigma + growth * reach;
    if params.g > 0.0 {
        half_width = half_width.max(3.0 * params.equilibrium());
    }
    let out = GridDensity::zeros(-half_width, half_width, PROPAGATION_GRID_POINTS)?;
    gaussian_propagate_onto(p0, t, params, convention, out)
}

/// As [`gaussian_propagate`], onto a caller-supplied output grid.
pub fn gaussian_propagate_onto(
    p0: &GridDensity,
    t: f64,
    params: &LangevinParams,
    convention: Convention,
    mut out: GridDensity,
) -> Result<GridDensity> {
    if !(t >= 0.0) {
        return Err(domain(format!("time must be non-negative, got {t}")));
    }
    let growth = (params.gamma * t).exp();
    let sigma = variance_profile(t, params, convention).sqrt();
    let n_in = p0.len();
    let h = out.step;

    // Fraction of a unit mass centred at `mu` that lands in [lo, hi].
    let cell_fraction = |lo: f64, hi: f64, mu: f64| -> f64 {
        if sigma > 0.0 {
            let s = sigma * std::f64::consts::SQRT_2;
            0.5 * (libm::erf((hi - mu) / s) - libm::erf((lo - mu) / s))
        } else if mu >= lo && mu < hi {
            1.0
        } else {
            0.0
        }
    };

    out.values.iter_mut().for_each(|v| *v = 0.0);
    for j in 0..n_in {
        let w = if j == 0 || j + 1 == n_in { 0.5 } else { 1.0 };
        let mass = w * p0.values[j] * p0.step;
        if mass == 0.0 {
            continue;
        }
        let mu = growth * p0.point(j);
        for i in 0..out.values.len() {
            let x = out.start + h * i as f64;
            out.values[i] += mass * cell_fraction(x - 0.5 * h, x + 0.5 * h, mu) / h;
        }
    }
    let total = out.mass();
    if !(total > 0.0) {
        return Err(domain("propagated density has no mass on the output grid"));
    }
    out.values.iter_mut().for_each(|v| *v /= total);
    Ok(out)
}

/// Probability that the pointer ends on the positive side:
/// `(1 + erf(δ/√(2·var)))/2`.
pub fn p_plus(delta: f64, var: f64) -> Result<f64> {
    if !(var > 0.0 && var.is_finite()) {
        return Err(domain(format!("variance must be positive, got {var}")));
    }
    Ok(0.5 * (1.0 + libm::erf(delta / (2.0 * var).sqrt())))
}

/// Complement of [`p_plus`], `erfc(δ/√(2·var))/2`.
pub fn p_minus(delta: f64, var: f64) -> Result<f64> {
    if !(var > 0.0 && var.is_finite()) {
        return Err(domain(format!("variance must be positive, got {var}")));
    }
    Ok(0.5 * libm::erfc(delta / (2.0 * var).sqrt()))
}

/// Time for an initial displacement `√(ε/γ + δ²)` to roll out to the
/// inflection region of the potential.
pub fn onset_time(params: &LangevinParams, delta: f64) -> Result<f64> {
    let LangevinParams { gamma, g, epsilon } = *params;
    let q = g / gamma * (epsilon / gamma + delta * delta);
    if q > 1.0 {
        return Err(domain(format!(
            "already past onset: (g/γ)(ε/γ + δ²) = {q} exceeds 1"
        )));
    }
    if !(q > 0.0) {
        return Err(domain(
            "onset time is unbounded: needs g > 0 and a non-zero noise or bias",
        ));
    }
    Ok(-q.ln() / (2.0 * gamma))
}

/// Initial bias of a pure state aligned with the field, `μB/(2γ)`.
pub fn delta_max(params: &LangevinParams, mu: f64, b_field: f64) -> f64 {
    mu * b_field / (2.0 * params.gamma)
}

/// Ratio of the maximal bias to the spread at onset, `δmax/√(2·var(t0))`.
pub fn optimization_z(
    params: &LangevinParams,
    mu: f64,
    b_field: f64,
    convention: Convention,
) -> Result<f64> {
    let dmax = delta_max(params, mu, b_field);
    let t0 = onset_time(params, dmax)?;
    if dmax == 0.0 {
        return Ok(0.0);
    }
    let var = variance_profile(t0, params, convention);
    if !(var > 0.0) {
        return Err(domain("spread at onset is zero; z is unbounded"));
    }
    Ok(dmax / (2.0 * var).sqrt())
}

/// Noise strength at which `z(ε)` is smallest.
///
/// Below it `z` falls monotonically with ε; above it the onset time shrinks
/// faster than the variance grows and `z` rises again. Returns `None` when
/// the bias alone already violates the onset precondition.
pub fn epsilon_turning_point(params: &LangevinParams, mu: f64, b_field: f64) -> Option<f64> {
    let d = delta_max(params, mu, b_field).abs();
    let k = params.g / params.gamma;
    if !(k > 0.0) {
        return None;
    }
    let eps = params.gamma * (d / k.sqrt() - d * d);
    (eps > 0.0).then_some(eps)
}

/// Finds ε on the falling branch of `z(ε)` so that `|z| = target_z`.
///
/// Bisection in `ln ε` over `[EPSILON_FLOOR, epsilon_turning_point]`; the
/// epsilon already stored in `params` is ignored.
pub fn tune_noise_for_z(
    target_z: f64,
    params: &LangevinParams,
    mu: f64,
    b_field: f64,
    convention: Convention,
) -> Result<f64> {
    if !(target_z > 0.0 && target_z.is_finite()) {
        return Err(domain(format!("target z must be positive, got {target_z}")));
    }
    let hi = epsilon_turning_point(params, mu, b_field).ok_or_else(|| Error::Optimization {
        message: "no admissible noise strength: bias already past onset or μB = 0".into(),
        lo: EPSILON_FLOOR,
        hi: EPSILON_FLOOR,
    })?;
    let lo = EPSILON_FLOOR;
    if hi <= lo {
        return Err(Error::Optimization {
            message: "admissible interval is empty".into(),
            lo,
            hi,
        });
    }
    let z_at = |eps: f64| -> Result<f64> {
        Ok(optimization_z(&params.with_epsilon(eps)?, mu, b_field, convention)?.abs())
    };
    let (z_lo, z_hi) = (z_at(lo)?, z_at(hi)?);
    if !(target_z <= z_lo && target_z >= z_hi) {
        return Err(Error::Optimization {
            message: format!("target z = {target_z} outside reachable range [{z_hi}, {z_lo}]"),
            lo,
            hi,
        });
    }

    let tol = 1e-6 * target_z;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut best = (f64::INFINITY, lo);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let eps = mid.exp();
        let z = z_at(eps)?;
        if (z - target_z).abs() < best.0 {
            best = ((z - target_z).abs(), eps);
        }
        if (z - target_z).abs() < 0.1 * tol {
            break;
        }
        // z falls as ε grows on this branch.
        if z > target_z {
            a = mid;
        } else {
            b = mid;
        }
    }
    if best.0 < tol {
        Ok(best.1)
    } else {
        Err(Error::Optimization {
            message: format!(
                "bisection stalled {} away from target z = {target_z}",
                best.0
            ),
            lo,
            hi,
        })
    }
}
