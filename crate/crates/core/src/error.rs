// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised while building or running a simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode {index} has complex rate {gamma} with no conjugate partner")]
    UnpairableMode { index: usize, gamma: String },

    #[error("mode {index} has two equally close conjugate candidates ({first}, {second})")]
    AmbiguousPairing { index: usize, first: usize, second: usize },

    #[error("fermionic mode set has {plus} sigma=+ modes and {minus} sigma=- modes")]
    UnpairedSigma { plus: usize, minus: usize },

    #[error("dissipaton coupling for mode {index} vanishes (|zeta|^2 = {magnitude:e})")]
    DegenerateZeta { index: usize, magnitude: f64 },

    #[error("Matsubara frequency {nu} coincides with a spectral pole at {pole}")]
    ResonantMatsubara { nu: f64, pole: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("coupling `{0}` has no mode set")]
    MissingModeSet(String),

    #[error("non-finite value at t = {time}")]
    NonFinite { time: f64 },

    #[error("reduced density matrix has vanishing trace ({0:e})")]
    ZeroTrace(f64),

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("state has zero norm")]
    ZeroState,

    #[error("ancilla success amplitude vanished at step {step} (norm {norm:e})")]
    VanishingProjection { step: usize, norm: f64 },

    #[error("pseudomode construction needs real modes; mode {index} has eta = {eta}, gamma = {gamma}")]
    ComplexModeRejected { index: usize, eta: String, gamma: String },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("unknown parameter `{parameter}` for model `{model}`")]
    UnknownParameter { model: String, parameter: String },

    #[error("no tabulated modes for model `{model}` in regime `{regime}`")]
    NoTableAvailable { model: String, regime: String },

    #[error("methods cannot be compared: {0}")]
    IncompatibleMethods(String),

    #[error("configuration error at `{field}`: {reason}")]
    Config { field: String, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
