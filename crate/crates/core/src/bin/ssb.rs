// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ssb_measure::cli::{execute, CliResult, Command, RunConfig};

#[derive(Parser)]
#[command(
    name = "ssb",
    about = "Spin measurement by spontaneous symmetry breaking"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Target optimization parameter z.
    #[arg(long, global = true)]
    z: Option<f64>,
    #[arg(long, global = true)]
    convention: Option<Conv>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Spin relaxation in a fixed field (closed form and RK4).
    SpinRelax,
    /// Order-parameter Langevin trajectories or histogram.
    Langevin,
    /// One coupled measurement trajectory.
    Measure,
    /// Calibration curve of P+ against the initial spin.
    Calibrate,
    /// Linear-regime (Born rule) fit.
    Born,
}

#[derive(ValueEnum, Clone, Copy)]
enum Conv {
    Paper,
    Mc,
}

fn resolve(args: &Args) -> CliResult<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for s in &args.set {
        cfg.apply_override(s)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if let Some(z) = args.z {
        cfg.z = Some(z);
    }
    if let Some(c) = args.convention {
        cfg.set(
            "convention",
            match c {
                Conv::Paper => "paper",
                Conv::Mc => "mc",
            },
        )?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let command = match args.command {
        Cmd::SpinRelax => Command::SpinRelax,
        Cmd::Langevin => Command::Langevin,
        Cmd::Measure => Command::Measure,
        Cmd::Calibrate => Command::Calibrate,
        Cmd::Born => Command::Born,
    };
    match resolve(&args).and_then(|cfg| execute(command, &cfg, args.out.as_deref())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ssb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
