// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! Statistics over identically prepared measurements.
//!
//! An ensemble is a set of independent runs, each with its own noise stream.
//! Run `i` of an ensemble with master seed `m` uses
//! `splitmix64(m + (i + 1)·0x9E3779B97F4A7C15)` as its seed, so counts do not
//! depend on how runs are scheduled across threads.

use rayon::prelude::*;

use crate::csv::CsvTable;
use crate::error::{domain, Error, Result};
use crate::measurement::{
    classify_phase, simulate, spin_projection, MeasurementParams, PhaseLabel,
};
use crate::order_parameter::{
    em_step, onset_time, optimization_z, p_plus, variance_profile, Convention, NoiseSource,
};
use crate::spin_dynamics::SpinDensityMatrix;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN_GAMMA);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of run `index` in an ensemble with the given master seed.
pub fn run_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// How the spin is prepared before each run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSpin {
    /// Pure state with the given `⟨S3⟩`.
    S3(f64),
    Matrix(SpinDensityMatrix),
}

impl InitialSpin {
    pub fn density_matrix(&self) -> Result<SpinDensityMatrix> {
        match *self {
            InitialSpin::S3(s) => SpinDensityMatrix::pure_with_s3(s),
            InitialSpin::Matrix(m) => Ok(m),
        }
    }
}

/// Which dynamics generate the empirical outcomes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EnsembleMode {
    /// Full spin + order-parameter model; outcome is the phase label at `t_end`.
    Coupled,
    /// Langevin equation with the bias frozen at its initial value; outcome is
    /// the sign of φ when `|φ|` first reaches `0.9·√(γ/g)`.
    #[default]
    Decoupled,
}

/// Fraction of `√(γ/g)` at which a decoupled run counts as decided.
pub const DECISION_LEVEL: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_runs: usize,
    pub master_seed: u64,
    pub params: MeasurementParams,
    pub initial_spin: InitialSpin,
    pub mode: EnsembleMode,
}

/// Outcome counts of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOutcome {
    pub count_plus: u64,
    pub count_minus: u64,
    pub count_undecided: u64,
    /// `count_plus / (count_plus + count_minus)`.
    pub freq_plus: f64,
    /// `√(f(1 − f)/N)` over the decided runs.
    pub stderr: f64,
}

impl EnsembleOutcome {
    pub fn decided(&self) -> u64 {
        self.count_plus + self.count_minus
    }

    /// Whether `p` lies within `k` standard errors of the observed frequency.
    ///
    /// When the observed frequency is 0 or 1 its standard error vanishes; the
    /// binomial error of `p` itself is used instead.
    pub fn agrees_with(&self, p: f64, k: f64) -> bool {
        let n = self.decided() as f64;
        let sigma = if self.stderr > 0.0 {
            self.stderr
        } else {
            (p * (1.0 - p) / n).sqrt()
        };
        (self.freq_plus - p).abs() <= k * sigma
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    plus: u64,
    minus: u64,
    undecided: u64,
}

impl Counts {
    fn record(mut self, label: PhaseLabel) -> Self {
        match label {
            PhaseLabel::PlusPhase => self.plus += 1,
            PhaseLabel::MinusPhase => self.minus += 1,
            PhaseLabel::NearZero => self.undecided += 1,
        }
        self
    }

    fn merge(self, other: Self) -> Self {
        Self {
            plus: self.plus + other.plus,
            minus: self.minus + other.minus,
            undecided: self.undecided + other.undecided,
        }
    }

    fn finish(self, n_runs: usize) -> Result<EnsembleOutcome> {
        let decided = self.plus + self.minus;
        if decided == 0 {
            return Err(Error::DegenerateEnsemble(n_runs));
        }
        let f = self.plus as f64 / decided as f64;
        Ok(EnsembleOutcome {
            count_plus: self.plus,
            count_minus: self.minus,
            count_undecided: self.undecided,
            freq_plus: f,
            stderr: (f * (1.0 - f) / decided as f64).sqrt(),
        })
    }
}

fn validate(config: &EnsembleConfig) -> Result<SpinDensityMatrix> {
    if config.n_runs == 0 {
        return Err(domain("ensemble needs at least one run"));
    }
    config.params.validate()?;
    if config.mode == EnsembleMode::Decoupled && !(config.params.langevin.g > 0.0) {
        return Err(domain(
            "decoupled mode needs g > 0 to define the decision level",
        ));
    }
    config.initial_spin.density_matrix()
}

/// Outcome of a single run of the ensemble.
pub fn run_outcome(
    config: &EnsembleConfig,
    rho0: &SpinDensityMatrix,
    index: u64,
) -> Result<PhaseLabel> {
    let mut noise = NoiseSource::new(run_seed(config.master_seed, index));
    let p = &config.params;
    let scale = p.langevin.equilibrium();
    match config.mode {
        EnsembleMode::Coupled => {
            let last = simulate(rho0, p, &mut noise, |_, _| {})?;
            Ok(classify_phase(last.phi, scale))
        }
        EnsembleMode::Decoupled => {
            let bias = p.mu * spin_projection(rho0, p.b_field);
            let level = DECISION_LEVEL * scale;
            let mut phi = p.phi0;
            for _ in 0..p.steps() {
                phi = em_step(phi, &p.langevin, p.dt, noise.next_normal()) + bias * p.dt;
                if phi.abs() >= level {
                    return Ok(if phi > 0.0 {
                        PhaseLabel::PlusPhase
                    } else {
                        PhaseLabel::MinusPhase
                    });
                }
            }
            Ok(PhaseLabel::NearZero)
        }
    }
}

/// Runs the ensemble on the rayon thread pool.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleOutcome> {
    let rho0 = validate(config)?;
    let counts = (0..config.n_runs as u64)
        .into_par_iter()
        .map(|i| run_outcome(config, &rho0, i))
        .try_fold(Counts::default, |acc, label| label.map(|l| acc.record(l)))
        .try_reduce(Counts::default, |a, b| Ok(a.merge(b)))?;
    counts.finish(config.n_runs)
}

/// Single-threaded reference schedule of [`run_ensemble`].
pub fn run_ensemble_sequential(config: &EnsembleConfig) -> Result<EnsembleOutcome> {
    let rho0 = validate(config)?;
    let mut counts = Counts::default();
    for i in 0..config.n_runs as u64 {
        counts = counts.record(run_outcome(config, &rho0, i)?);
    }
    counts.finish(config.n_runs)
}

/// Initial bias `δ = (μ/γ)·⟨S3⟩·B`.
pub fn initial_bias(s3_init: f64, params: &MeasurementParams) -> f64 {
    params.mu / params.langevin.gamma * s3_init * params.b_field
}

/// `P+` at the onset time belonging to the bias of `s3_init`.
pub fn analytic_p_plus_at_t0(
    s3_init: f64,
    params: &MeasurementParams,
    convention: Convention,
) -> Result<f64> {
    let delta = initial_bias(s3_init, params);
    let t0 = onset_time(&params.langevin, delta)?;
    p_plus(delta, variance_profile(t0, &params.langevin, convention))
}

/// Late-time `P+` of the linearized dynamics with the bias frozen.
///
/// `e^{−γt}·φ(t)` converges to a Gaussian of mean δ and variance `ε/(2γ)`,
/// which fixes the sign once φ has left the linear region. This is what the
/// decoupled ensembles measure; it differs from [`analytic_p_plus_at_t0`].
pub fn frozen_p_plus(s3_init: f64, params: &MeasurementParams) -> Result<f64> {
    let l = &params.langevin;
    p_plus(initial_bias(s3_init, params), l.epsilon / (2.0 * l.gamma))
}

/// One row of a calibration table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint {
    pub s3_init: f64,
    pub p_plus_analytic: f64,
    pub freq_empirical: Option<f64>,
    pub stderr: Option<f64>,
    pub outcome: Option<EnsembleOutcome>,
}

impl CalibrationPoint {
    /// Empirical/analytic agreement within `k` standard errors; `None` when
    /// no ensemble was run.
    pub fn agrees(&self, k: f64) -> Option<bool> {
        self.outcome.map(|o| o.agrees_with(self.p_plus_analytic, k))
    }
}

/// Settings for the empirical column of a calibration curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmpiricalSettings {
    pub n_runs: usize,
    pub master_seed: u64,
    pub mode: EnsembleMode,
}

/// Uniform grid of `n` values of `⟨S3⟩` over `[lo, hi]`.
pub fn s3_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Analytic `P+(t0)` and optionally an ensemble estimate for each grid value.
///
/// Grid point `j` uses `run_seed(master_seed, j)` as its own master seed.
pub fn calibration_curve(
    grid: &[f64],
    params: &MeasurementParams,
    convention: Convention,
    empirical: Option<EmpiricalSettings>,
) -> Result<Vec<CalibrationPoint>> {
    grid.iter()
        .enumerate()
        .map(|(j, &s)| {
            if !(-0.5..=0.5).contains(&s) {
                return Err(domain(format!("grid value {s} outside [-1/2, 1/2]")));
            }
            let analytic = analytic_p_plus_at_t0(s, params, convention)?;
            let outcome = match empirical {
                Some(e) => Some(run_ensemble(&EnsembleConfig {
                    n_runs: e.n_runs,
                    master_seed: run_seed(e.master_seed, j as u64),
                    params: *params,
                    initial_spin: InitialSpin::S3(s),
                    mode: e.mode,
                })?),
                None => None,
            };
            Ok(CalibrationPoint {
                s3_init: s,
                p_plus_analytic: analytic,
                freq_empirical: outcome.map(|o| o.freq_plus),
                stderr: outcome.map(|o| o.stderr),
                outcome,
            })
        })
        .collect()
}

/// CSV with columns `s3_init,p_plus_analytic,freq_empirical,stderr`.
///
/// Empirical cells are `NaN` when no ensemble was run.
pub fn calibration_csv(points: &[CalibrationPoint]) -> String {
    let mut table = CsvTable::new(&["s3_init", "p_plus_analytic", "freq_empirical", "stderr"]);
    for p in points {
        table.push(&[
            p.s3_init,
            p.p_plus_analytic,
            p.freq_empirical.unwrap_or(f64::NAN),
            p.stderr.unwrap_or(f64::NAN),
        ]);
    }
    table.into_string()
}

/// Time at which `P+` is evaluated by [`born_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BornEvaluation {
    /// Each grid value at the onset time of its own bias.
    OnsetPerPoint,
    /// All grid values at one fixed time; valid for g = 0.
    FixedTime(f64),
}

/// Linear fit of `P+` against `2‖P+ψ‖² − 1 = 2⟨S3⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct BornFit {
    /// Slope of the fit constrained through `(0, 1/2)`.
    pub alpha_fitted: f64,
    /// `z/√π` from the first-order expansion of erf.
    pub alpha_predicted: f64,
    /// Largest deviation of `P+` from the constrained fit on the grid.
    pub max_residual: f64,
    /// Intercept of an unconstrained least-squares line.
    pub intercept: f64,
    /// The `z` used for the prediction.
    pub z: f64,
    /// Empty when the linear-regime conditions hold.
    pub warnings: Vec<String>,
}

impl BornFit {
    pub fn regime_ok(&self) -> bool {
        self.warnings.is_empty()
    }

    /// `key = value` report.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let f = crate::csv::fmt_f64;
        out.push_str(&format!("alpha_fitted = {}\n", f(self.alpha_fitted)));
        out.push_str(&format!("alpha_predicted = {}\n", f(self.alpha_predicted)));
        out.push_str(&format!("max_residual = {}\n", f(self.max_residual)));
        out.push_str(&format!("intercept = {}\n", f(self.intercept)));
        out.push_str(&format!("z = {}\n", f(self.z)));
        out.push_str(&format!("regime_ok = {}\n", self.regime_ok()));
        for w in &self.warnings {
            out.push_str(&format!("warning = {w}\n"));
        }
        out
    }
}

/// Factor read as "much greater than" in the regime check.
pub const REGIME_MARGIN: f64 = 10.0;

/// Fits the linear relation `P+ = 1/2 + α(2p_up − 1)` on a grid near `⟨S3⟩ = 0`.
pub fn born_check(
    params: &MeasurementParams,
    grid: &[f64],
    convention: Convention,
    evaluation: BornEvaluation,
) -> Result<BornFit> {
    if grid.len() < 2 {
        return Err(domain("born check needs at least two grid values"));
    }
    let l = &params.langevin;
    let dmax = params.mu * params.b_field / (2.0 * l.gamma);
    let (probs, z) = match evaluation {
        BornEvaluation::OnsetPerPoint => {
            let probs = grid
                .iter()
                .map(|&s| analytic_p_plus_at_t0(s, params, convention))
                .collect::<Result<Vec<_>>>()?;
            (
                probs,
                optimization_z(l, params.mu, params.b_field, convention)?,
            )
        }
        BornEvaluation::FixedTime(t) => {
            if !(t > 0.0) {
                return Err(domain(format!("evaluation time must be positive, got {t}")));
            }
            let var = variance_profile(t, l, convention);
            let probs = grid
                .iter()
                .map(|&s| p_plus(initial_bias(s, params), var))
                .collect::<Result<Vec<_>>>()?;
            (probs, dmax / (2.0 * var).sqrt())
        }
    };

    let xs: Vec<f64> = grid.iter().map(|s| 2.0 * s).collect();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    if !(sxx > 0.0) {
        return Err(domain("born check grid must contain a non-zero value"));
    }
    let alpha = xs
        .iter()
        .zip(&probs)
        .map(|(x, p)| x * (p - 0.5))
        .sum::<f64>()
        / sxx;
    let max_residual = xs
        .iter()
        .zip(&probs)
        .map(|(x, p)| (p - 0.5 - alpha * x).abs())
        .fold(0.0, f64::max);

    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let mp = probs.iter().sum::<f64>() / n;
    let cov: f64 = xs
        .iter()
        .zip(&probs)
        .map(|(x, p)| (x - mx) * (p - mp))
        .sum();
    let var_x: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let intercept = mp - cov / var_x * mx;

    let mut warnings = Vec::new();
    let delta_edge = grid
        .iter()
        .map(|&s| initial_bias(s, params).abs())
        .fold(0.0, f64::max);
    let strong_friction = l.gamma >= REGIME_MARGIN * (l.g * l.epsilon).sqrt();
    let strong_noise = l.epsilon >= REGIME_MARGIN * l.gamma * delta_edge * delta_edge;
    if !(strong_friction || strong_noise) {
        warnings.push(format!(
            "outside linear regime: gamma = {}, sqrt(g*eps) = {}, eps = {}, gamma*delta^2 = {}",
            l.gamma,
            (l.g * l.epsilon).sqrt(),
            l.epsilon,
            l.gamma * delta_edge * delta_edge
        ));
    }

    Ok(BornFit {
        alpha_fitted: alpha,
        alpha_predicted: z / std::f64::consts::PI.sqrt(),
        max_residual,
        intercept,
        z,
        warnings,
    })
}

/// Time at which the linear spread makes `δmax/√(2·var) = z`.
pub fn time_for_z(params: &MeasurementParams, z: f64, convention: Convention) -> Result<f64> {
    let l = &params.langevin;
    if !(z > 0.0) || !(l.epsilon > 0.0) {
        return Err(domain("time_for_z needs z > 0 and epsilon > 0"));
    }
    let dmax = params.mu * params.b_field / (2.0 * l.gamma);
    let var = dmax * dmax / (2.0 * z * z);
    let unit = match convention {
        Convention::Paper => l.epsilon / l.gamma,
        Convention::Mc => l.epsilon / (2.0 * l.gamma),
    };
    Ok((var / unit).ln_1p() / (2.0 * l.gamma))
}
