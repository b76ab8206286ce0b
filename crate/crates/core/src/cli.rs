// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! Configuration and commands behind the `ssb` binary.
//!
//! A configuration file is a flat list of `key = value` lines; `#` starts a
//! comment. Every key has a default and unknown keys are rejected. Command
//! line overrides are applied after the file.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use crate::csv::{fmt_f64, CsvTable};
use crate::ensemble::{
    born_check, calibration_csv, calibration_curve, run_seed, s3_grid, time_for_z, BornEvaluation,
    EmpiricalSettings, EnsembleMode,
};
use crate::error::Error;
use crate::measurement::{biased_potential, run_trajectory, spin_projection, MeasurementParams};
use crate::order_parameter::{
    em_step, gaussian_propagate_onto, tune_noise_for_z, Convention, GridDensity, LangevinParams,
    NoiseSource,
};
use crate::spin_dynamics::{
    evolve_analytic, evolve_numeric, purity, ReservoirCoefficients, SpinDensityMatrix,
};

/// Failure of a command, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Numerical(Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical or domain failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => CliError::Config(m),
            other => CliError::Numerical(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    S3,
    Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LangevinOutput {
    Trajectories,
    Histogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BornEval {
    Onset,
    Fixed,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub runs: usize,
    pub convention: Convention,
    pub z: Option<f64>,

    // spin state and reservoir
    pub rho11: f64,
    pub rho12_re: f64,
    pub rho12_im: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub omega: f64,
    pub spin_t_end: f64,
    pub spin_dt: f64,
    pub samples: usize,

    // order parameter
    pub gamma: f64,
    pub g: f64,
    pub epsilon: f64,
    pub phi0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub trajectories: usize,
    pub langevin_output: LangevinOutput,
    pub histogram_bins: usize,

    // device
    pub mu: f64,
    pub b_field: f64,
    pub base_rate: f64,
    pub c_rate: f64,
    pub theta: f64,
    pub initial: InitialKind,
    pub s3: f64,
    pub potential_out: String,
    pub potential_points: usize,

    // calibration and Born check
    pub grid_points: usize,
    pub empirical: bool,
    pub mode: EnsembleMode,
    pub born_half_width: f64,
    pub born_points: usize,
    pub born_eval: BornEval,
    pub born_time: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            runs: 1000,
            convention: Convention::Mc,
            z: None,
            rho11: 0.5,
            rho12_re: 0.5,
            rho12_im: 0.0,
            a: 0.99,
            b: 0.01,
            c: 1.0,
            omega: 10.0,
            spin_t_end: 10.0,
            spin_dt: 1e-3,
            samples: 1001,
            gamma: 1.0,
            g: 1.0,
            epsilon: 1e-4,
            phi0: 0.0,
            dt: 0.01,
            t_end: 30.0,
            record_every: 10,
            trajectories: 1,
            langevin_output: LangevinOutput::Trajectories,
            histogram_bins: 50,
            mu: 1.0,
            b_field: 0.1,
            base_rate: 0.1,
            c_rate: 0.5,
            theta: 10.0,
            initial: InitialKind::S3,
            s3: 0.5,
            potential_out: String::new(),
            potential_points: 201,
            grid_points: 11,
            empirical: true,
            mode: EnsembleMode::Decoupled,
            born_half_width: 0.05,
            born_points: 11,
            born_eval: BornEval::Fixed,
            born_time: 1.0,
        }
    }
}

/// Every accepted configuration key, in echo order.
pub const KEYS: &[&str] = &[
    "seed",
    "runs",
    "convention",
    "z",
    "rho11",
    "rho12_re",
    "rho12_im",
    "a",
    "b",
    "c",
    "omega",
    "spin_t_end",
    "spin_dt",
    "samples",
    "gamma",
    "g",
    "epsilon",
    "phi0",
    "dt",
    "t_end",
    "record_every",
    "trajectories",
    "langevin_output",
    "histogram_bins",
    "mu",
    "b_field",
    "base_rate",
    "c_rate",
    "theta",
    "initial",
    "s3",
    "potential_out",
    "potential_points",
    "grid_points",
    "empirical",
    "mode",
    "born_half_width",
    "born_points",
    "born_eval",
    "born_time",
];

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value {value:?} for key `{key}`")))
}

fn bad(key: &str, value: &str, expected: &str) -> CliError {
    CliError::Config(format!(
        "invalid value {value:?} for key `{key}`, expected {expected}"
    ))
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let v = value.trim();
        match key {
            "seed" => self.seed = parse(key, v)?,
            "runs" => self.runs = parse(key, v)?,
            "convention" => self.convention = v.parse().map_err(|_| bad(key, v, "paper or mc"))?,
            "z" => {
                self.z = match v {
                    "none" | "" => None,
                    _ => Some(parse(key, v)?),
                }
            }
            "rho11" => self.rho11 = parse(key, v)?,
            "rho12_re" => self.rho12_re = parse(key, v)?,
            "rho12_im" => self.rho12_im = parse(key, v)?,
            "a" => self.a = parse(key, v)?,
            "b" => self.b = parse(key, v)?,
            "c" => self.c = parse(key, v)?,
            "omega" => self.omega = parse(key, v)?,
            "spin_t_end" => self.spin_t_end = parse(key, v)?,
            "spin_dt" => self.spin_dt = parse(key, v)?,
            "samples" => self.samples = parse(key, v)?,
            "gamma" => self.gamma = parse(key, v)?,
            "g" => self.g = parse(key, v)?,
            "epsilon" => self.epsilon = parse(key, v)?,
            "phi0" => self.phi0 = parse(key, v)?,
            "dt" => self.dt = parse(key, v)?,
            "t_end" => self.t_end = parse(key, v)?,
            "record_every" => self.record_every = parse(key, v)?,
            "trajectories" => self.trajectories = parse(key, v)?,
            "langevin_output" => {
                self.langevin_output = match v {
                    "trajectories" => LangevinOutput::Trajectories,
                    "histogram" => LangevinOutput::Histogram,
                    _ => return Err(bad(key, v, "trajectories or histogram")),
                }
            }
            "histogram_bins" => self.histogram_bins = parse(key, v)?,
            "mu" => self.mu = parse(key, v)?,
            "b_field" => self.b_field = parse(key, v)?,
            "base_rate" => self.base_rate = parse(key, v)?,
            "c_rate" => self.c_rate = parse(key, v)?,
            "theta" => self.theta = parse(key, v)?,
            "initial" => {
                self.initial = match v {
                    "s3" => InitialKind::S3,
                    "matrix" => InitialKind::Matrix,
                    _ => return Err(bad(key, v, "s3 or matrix")),
                }
            }
            "s3" => self.s3 = parse(key, v)?,
            "potential_out" => self.potential_out = v.to_string(),
            "potential_points" => self.potential_points = parse(key, v)?,
            "grid_points" => self.grid_points = parse(key, v)?,
            "empirical" => self.empirical = parse(key, v)?,
            "mode" => {
                self.mode = match v {
                    "decoupled" => EnsembleMode::Decoupled,
                    "coupled" => EnsembleMode::Coupled,
                    _ => return Err(bad(key, v, "decoupled or coupled")),
                }
            }
            "born_half_width" => self.born_half_width = parse(key, v)?,
            "born_points" => self.born_points = parse(key, v)?,
            "born_eval" => {
                self.born_eval = match v {
                    "onset" => BornEval::Onset,
                    "fixed" => BornEval::Fixed,
                    _ => return Err(bad(key, v, "onset or fixed")),
                }
            }
            "born_time" => self.born_time = parse(key, v)?,
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Textual value of a key, as it would appear in a config file.
    pub fn get(&self, key: &str) -> Option<String> {
        let f = |x: f64| fmt_f64(x);
        Some(match key {
            "seed" => self.seed.to_string(),
            "runs" => self.runs.to_string(),
            "convention" => self.convention.to_string(),
            "z" => self.z.map(f).unwrap_or_else(|| "none".into()),
            "rho11" => f(self.rho11),
            "rho12_re" => f(self.rho12_re),
            "rho12_im" => f(self.rho12_im),
            "a" => f(self.a),
            "b" => f(self.b),
            "c" => f(self.c),
            "omega" => f(self.omega),
            "spin_t_end" => f(self.spin_t_end),
            "spin_dt" => f(self.spin_dt),
            "samples" => self.samples.to_string(),
            "gamma" => f(self.gamma),
            "g" => f(self.g),
            "epsilon" => f(self.epsilon),
            "phi0" => f(self.phi0),
            "dt" => f(self.dt),
            "t_end" => f(self.t_end),
            "record_every" => self.record_every.to_string(),
            "trajectories" => self.trajectories.to_string(),
            "langevin_output" => match self.langevin_output {
                LangevinOutput::Trajectories => "trajectories".into(),
                LangevinOutput::Histogram => "histogram".into(),
            },
            "histogram_bins" => self.histogram_bins.to_string(),
            "mu" => f(self.mu),
            "b_field" => f(self.b_field),
            "base_rate" => f(self.base_rate),
            "c_rate" => f(self.c_rate),
            "theta" => f(self.theta),
            "initial" => match self.initial {
                InitialKind::S3 => "s3".into(),
                InitialKind::Matrix => "matrix".into(),
            },
            "s3" => f(self.s3),
            "potential_out" => self.potential_out.clone(),
            "potential_points" => self.potential_points.to_string(),
            "grid_points" => self.grid_points.to_string(),
            "empirical" => self.empirical.to_string(),
            "mode" => match self.mode {
                EnsembleMode::Decoupled => "decoupled".into(),
                EnsembleMode::Coupled => "coupled".into(),
            },
            "born_half_width" => f(self.born_half_width),
            "born_points" => self.born_points.to_string(),
            "born_eval" => match self.born_eval {
                BornEval::Onset => "onset".into(),
                BornEval::Fixed => "fixed".into(),
            },
            "born_time" => f(self.born_time),
            _ => return None,
        })
    }

    /// Applies the lines of a configuration file.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            self.set(k.trim(), v).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("line {}: {m}", lineno + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> CliResult<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override {assignment:?} is not key=value")))?;
        self.set(k.trim(), v)
    }

    /// Resolved configuration in config-file syntax; parses back to `self`.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key).unwrap_or_default());
        }
        out
    }

    pub fn langevin(&self) -> CliResult<LangevinParams> {
        Ok(LangevinParams::new(self.gamma, self.g, self.epsilon)?)
    }

    /// Device parameters, with epsilon tuned to `z` when a target is set.
    pub fn measurement(&self) -> CliResult<MeasurementParams> {
        let mut p = MeasurementParams::new(
            self.langevin()?,
            self.mu,
            self.b_field,
            self.base_rate,
            self.c_rate,
            self.theta,
            self.dt,
            self.t_end,
        )?;
        p.phi0 = self.phi0;
        p = p.with_record_every(self.record_every)?;
        if let Some(z) = self.z {
            let eps = tune_noise_for_z(z, &p.langevin, p.mu, p.b_field, self.convention)?;
            p = p.with_epsilon(eps)?;
        }
        Ok(p)
    }

    /// Initial spin: the matrix keys, or a pure state with `⟨S3⟩ = s3`.
    pub fn initial_state(&self) -> CliResult<SpinDensityMatrix> {
        Ok(match self.initial {
            InitialKind::S3 => SpinDensityMatrix::pure_with_s3(self.s3)?,
            InitialKind::Matrix => self.spin_matrix()?,
        })
    }

    fn spin_matrix(&self) -> CliResult<SpinDensityMatrix> {
        Ok(SpinDensityMatrix::from_population(
            self.rho11,
            Complex64::new(self.rho12_re, self.rho12_im),
        )?)
    }
}

/// Spin relaxation in a fixed field: closed-form and RK4 columns side by side.
pub fn cmd_spin_relax(cfg: &RunConfig) -> CliResult<String> {
    let rho0 = cfg.spin_matrix()?;
    let coeffs = ReservoirCoefficients::new(cfg.a, cfg.b, cfg.c, cfg.omega)?;
    if cfg.samples == 0 {
        return Err(CliError::Config("samples must be at least 1".into()));
    }
    if !(cfg.spin_t_end >= 0.0) {
        return Err(CliError::Config("spin_t_end must be non-negative".into()));
    }
    let mut table = CsvTable::new(&[
        "t",
        "rho11",
        "rho22",
        "re_rho12",
        "im_rho12",
        "purity",
        "rho11_num",
        "rho22_num",
        "re_rho12_num",
        "im_rho12_num",
        "purity_num",
    ]);
    let n = cfg.samples;
    let interval = if n > 1 {
        cfg.spin_t_end / (n - 1) as f64
    } else {
        0.0
    };
    let mut numeric = rho0;
    for i in 0..n {
        let t = interval * i as f64;
        if i > 0 {
            numeric = evolve_numeric(&numeric, &coeffs, interval, cfg.spin_dt.min(interval))?;
        }
        let exact = evolve_analytic(&rho0, &coeffs, t)?;
        table.push(&[
            t,
            exact.rho11(),
            exact.rho22(),
            exact.rho12().re,
            exact.rho12().im,
            purity(&exact),
            numeric.rho11(),
            numeric.rho22(),
            numeric.rho12().re,
            numeric.rho12().im,
            purity(&numeric),
        ]);
    }
    Ok(table.into_string())
}

/// Langevin trajectories (wide CSV, one column per run) or a histogram of
/// φ at `t_end` next to the linear Gaussian prediction.
pub fn cmd_langevin(cfg: &RunConfig) -> CliResult<String> {
    let params = cfg.langevin()?;
    if !(cfg.dt > 0.0) || !(cfg.t_end >= cfg.dt) {
        return Err(CliError::Config("need dt > 0 and t_end >= dt".into()));
    }
    if cfg.record_every == 0 || cfg.trajectories == 0 {
        return Err(CliError::Config(
            "record_every and trajectories must be at least 1".into(),
        ));
    }
    let steps = ((cfg.t_end / cfg.dt).round() as usize).max(1);
    match cfg.langevin_output {
        LangevinOutput::Trajectories => {
            let mut paths = Vec::with_capacity(cfg.trajectories);
            for j in 0..cfg.trajectories {
                let mut noise = NoiseSource::new(run_seed(cfg.seed, j as u64));
                let mut phi = cfg.phi0;
                let mut path = vec![phi];
                for i in 1..=steps {
                    phi = em_step(phi, &params, cfg.dt, noise.next_normal());
                    if i % cfg.record_every == 0 || i == steps {
                        path.push(phi);
                    }
                }
                paths.push(path);
            }
            let names: Vec<String> = std::iter::once("t".to_string())
                .chain((0..cfg.trajectories).map(|j| format!("phi_{j}")))
                .collect();
            let header: Vec<&str> = names.iter().map(String::as_str).collect();
            let mut table = CsvTable::new(&header);
            let mut times = vec![0.0];
            for i in 1..=steps {
                if i % cfg.record_every == 0 || i == steps {
                    times.push(i as f64 * cfg.dt);
                }
            }
            for (k, t) in times.iter().enumerate() {
                let mut row = vec![*t];
                row.extend(paths.iter().map(|p| p[k]));
                table.push(&row);
            }
            Ok(table.into_string())
        }
        LangevinOutput::Histogram => {
            if cfg.histogram_bins < 2 {
                return Err(CliError::Config("histogram_bins must be at least 2".into()));
            }
            let finals: Vec<f64> = (0..cfg.runs)
                .map(|j| {
                    let mut noise = NoiseSource::new(run_seed(cfg.seed, j as u64));
                    let mut phi = cfg.phi0;
                    for _ in 0..steps {
                        phi = em_step(phi, &params, cfg.dt, noise.next_normal());
                    }
                    phi
                })
                .collect();
            let lo = finals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = finals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(hi > lo) {
                return Err(CliError::Numerical(Error::Domain(
                    "histogram has zero width".into(),
                )));
            }
            let bins = cfg.histogram_bins;
            let width = (hi - lo) / bins as f64;
            let mut counts = vec![0u64; bins];
            for x in &finals {
                let k = (((x - lo) / width) as usize).min(bins - 1);
                counts[k] += 1;
            }
            let centers = GridDensity::zeros(lo + 0.5 * width, hi - 0.5 * width, bins)?;
            let half = 1.0f64.max(4.0 * cfg.phi0.abs());
            let start = GridDensity::delta(cfg.phi0 - half, cfg.phi0 + half, 2001, cfg.phi0)?;
            let gauss = gaussian_propagate_onto(
                &start,
                steps as f64 * cfg.dt,
                &params,
                cfg.convention,
                centers,
            )?;
            let mut table = CsvTable::new(&["phi", "density_empirical", "density_gaussian"]);
            for (k, c) in counts.iter().enumerate() {
                let x = gauss.point(k);
                table.push(&[
                    x,
                    *c as f64 / (finals.len() as f64 * width),
                    gauss.values[k],
                ]);
            }
            Ok(table.into_string())
        }
    }
}

/// One device trajectory, optionally with the biased potential.
pub fn cmd_measure(cfg: &RunConfig) -> CliResult<(String, Option<String>)> {
    let params = cfg.measurement()?;
    let rho0 = cfg.initial_state()?;
    let rec = run_trajectory(&rho0, &params, cfg.seed)?;
    let potential = if cfg.potential_out.is_empty() {
        None
    } else {
        Some(potential_csv(cfg, &params, &rho0)?)
    };
    Ok((rec.to_csv(), potential))
}

/// `V(φ)` with and without the spin bias over `±2√(γ/g)`.
pub fn potential_csv(
    cfg: &RunConfig,
    params: &MeasurementParams,
    rho0: &SpinDensityMatrix,
) -> CliResult<String> {
    if cfg.potential_points < 2 {
        return Err(CliError::Config(
            "potential_points must be at least 2".into(),
        ));
    }
    let reach = if params.langevin.g > 0.0 {
        2.0 * params.langevin.equilibrium()
    } else {
        2.0
    };
    let bias = spin_projection(rho0, params.b_field);
    let mut table = CsvTable::new(&["phi", "v_symmetric", "v_biased"]);
    let n = cfg.potential_points;
    for i in 0..n {
        let phi = -reach + 2.0 * reach * i as f64 / (n - 1) as f64;
        table.push(&[
            phi,
            biased_potential(phi, &params.langevin, params.mu, 0.0),
            biased_potential(phi, &params.langevin, params.mu, bias),
        ]);
    }
    Ok(table.into_string())
}

/// Calibration table over `grid_points` values of `⟨S3⟩` in `[-1/2, 1/2]`.
pub fn cmd_calibrate(cfg: &RunConfig) -> CliResult<String> {
    let params = cfg.measurement()?;
    let grid = s3_grid(-0.5, 0.5, cfg.grid_points);
    let empirical = cfg.empirical.then_some(EmpiricalSettings {
        n_runs: cfg.runs,
        master_seed: cfg.seed,
        mode: cfg.mode,
    });
    let points = calibration_curve(&grid, &params, cfg.convention, empirical)?;
    Ok(calibration_csv(&points))
}

/// Linear-regime fit report.
pub fn cmd_born(cfg: &RunConfig) -> CliResult<String> {
    let grid = s3_grid(-cfg.born_half_width, cfg.born_half_width, cfg.born_points);
    let fit = match cfg.born_eval {
        BornEval::Onset => {
            let params = cfg.measurement()?;
            born_check(
                &params,
                &grid,
                cfg.convention,
                BornEvaluation::OnsetPerPoint,
            )?
        }
        BornEval::Fixed => {
            // z selects the evaluation time here, not the noise strength.
            let mut plain = cfg.clone();
            plain.z = None;
            let params = plain.measurement()?;
            let t = match cfg.z {
                Some(z) => time_for_z(&params, z, cfg.convention)?,
                None => cfg.born_time,
            };
            born_check(&params, &grid, cfg.convention, BornEvaluation::FixedTime(t))?
        }
    };
    Ok(fit.report())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SpinRelax,
    Langevin,
    Measure,
    Calibrate,
    Born,
}

/// Runs a command and writes its output to `out` (stdout when `None`).
///
/// With an output path, the resolved configuration is written next to it
/// as `<out>.config`.
pub fn execute(command: Command, cfg: &RunConfig, out: Option<&Path>) -> CliResult<()> {
    let (body, extra) = match command {
        Command::SpinRelax => (cmd_spin_relax(cfg)?, None),
        Command::Langevin => (cmd_langevin(cfg)?, None),
        Command::Measure => cmd_measure(cfg)?,
        Command::Calibrate => (cmd_calibrate(cfg)?, None),
        Command::Born => (cmd_born(cfg)?, None),
    };
    let write = |path: &Path, text: &str| {
        std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
    };
    match out {
        Some(path) => {
            write(path, &body)?;
            let mut sidecar = path.as_os_str().to_owned();
            sidecar.push(".config");
            write(Path::new(&sidecar), &cfg.echo())?;
        }
        None => print!("{body}"),
    }
    if let Some(text) = extra {
        write(Path::new(&cfg.potential_out), &text)?;
    }
    Ok(())
}
