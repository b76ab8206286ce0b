// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by the simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter set or step size is not usable.
    #[error("configuration error: {0}")]
    Config(String),

    /// Root search for a noise strength did not bracket the target.
    #[error("optimization failure: {message} (searched epsilon in [{lo:e}, {hi:e}])")]
    Optimization { message: String, lo: f64, hi: f64 },

    /// Every run of an ensemble ended without a decided outcome.
    #[error("degenerate ensemble: all {0} runs undecided")]
    DegenerateEnsemble(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
