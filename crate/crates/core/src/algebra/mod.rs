// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Sparse operators and second-quantized building blocks.

mod fock;
mod sparse;

pub use fock::{boson_ladder, jw_ladder, lift_system_superop, number_operator, FockLayout, Side};
pub use sparse::SparseOperator;
