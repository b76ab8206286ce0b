// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantum measurement driven by spontaneous symmetry breaking.
//!
//! A spin in a cold reservoir is coupled to a bistable order parameter φ.
//! The spin tilts the double-well potential, φ rolls into one of the two
//! minima under the influence of noise, and the sign of φ then selects the
//! spin state that the reservoir purifies towards.
//!
//! - [`spin_dynamics`]: two-level master equation, closed form and RK4.
//! - [`order_parameter`]: Langevin dynamics of φ, Gaussian propagation,
//!   outcome probabilities, onset time and noise tuning.
//! - [`measurement`]: the coupled device and its trajectories.
//! - [`ensemble`]: outcome frequencies, calibration curves and the linear
//!   (Born-rule) regime.
//! - [`cli`]: configuration files and the commands behind the `ssb` binary.
//!
//! Runnable walkthroughs live in `examples/`.

// Negated comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod csv;
pub mod ensemble;
pub mod error;
pub mod measurement;
pub mod order_parameter;
pub mod spin_dynamics;

pub use error::{Error, Result};
