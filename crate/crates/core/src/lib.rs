// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dissipaton-embedded quantum master equation in second quantization.
//!
//! The crate maps the hierarchical description of a system coupled to
//! Gaussian bosonic or fermionic environments onto a single linear equation
//! `d rho~/dt = -i Lambda rho~` on the joint system-plus-dissipaton space,
//! then propagates it classically or through a gate-level circuit simulation
//! built from a linear combination of two unitaries.

pub mod algebra;
pub mod config;
pub mod error;
pub mod generator;
pub mod heom;
pub mod linalg;
pub mod models;
pub mod modes;
pub mod observables;
pub mod propagate;
pub mod pseudomode;
pub mod qsim;
pub mod study;

pub use error::{Error, Result};
pub use num_complex::Complex64;
