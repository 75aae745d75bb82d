// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Observables read out of the reduced density tensor.

use ndarray::Array2;
use num_complex::Complex64;

use crate::algebra::SparseOperator;
use crate::error::{Error, Result};
use crate::generator::{JwOrdering, RdtLayout, SystemSpec};
use crate::modes::Statistics;
use crate::propagate::RdtState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug)]
pub enum ObservableKind {
    /// `tr(rho_S O)`, reported as a real number.
    Expectation(SparseOperator),
    /// Particle current out of the listed environments into the system,
    /// reported as a complex number.
    Current(Vec<String>),
}

#[derive(Clone, Debug)]
pub struct Observable {
    pub name: String,
    pub kind: ObservableKind,
}

impl Observable {
    pub fn expectation(name: &str, op: SparseOperator) -> Self {
        Self {
            name: name.to_string(),
            kind: ObservableKind::Expectation(op),
        }
    }

    pub fn current(name: &str, labels: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            kind: ObservableKind::Current(labels.iter().map(|s| s.to_string()).collect()),
        }
    }

    /// CSV column names: one for real observables, `_re`/`_im` for complex.
    pub fn columns(&self) -> Vec<String> {
        match self.kind {
            ObservableKind::Expectation(_) => vec![self.name.clone()],
            ObservableKind::Current(_) => vec![format!("{}_re", self.name), format!("{}_im", self.name)],
        }
    }
}

pub fn expectation(rho: &Array2<Complex64>, op: &SparseOperator) -> Complex64 {
    op.entries().map(|(r, c, v)| v * rho[[c, r]]).sum()
}

/// Looks up observables by name.
pub fn select(available: &[Observable], names: &[String]) -> Result<Vec<Observable>> {
    names
        .iter()
        .map(|n| {
            available
                .iter()
                .find(|o| &o.name == n)
                .cloned()
                .ok_or_else(|| Error::UnknownObservable(n.clone()))
        })
        .collect()
}

/// First-tier blocks `(bra-side, ket-side)` of fermionic mode `j`, with the
/// Jordan-Wigner parity factors removed and dissipaton normalization kept.
fn first_tier_blocks(
    layout: &RdtLayout,
    parity: &SparseOperator,
    state: &RdtState,
    j: usize,
) -> (Array2<Complex64>, Array2<Complex64>) {
    let d1 = layout.fock.dim();
    let mut occ = vec![0u8; layout.n_modes()];
    occ[j] = 1;
    let reg = layout.fock.index_of(&occ).expect("single occupation is in the basis");
    let mut bra = state.block(reg);
    let mut ket = state.block(reg * d1);
    if layout.ordering == JwOrdering::SystemFirst {
        let p = parity.to_dense();
        bra = bra.dot(&p);
        ket = p.dot(&ket);
    }
    (bra, ket)
}

/// Particle current from the environments `labels` into the system:
/// `I = i sum_k tr(zeta+_k c_k X_k - zeta-_k c_k^+ Y_k)` with `X_k`, `Y_k`
/// the normalized first-tier blocks of the `sigma = +` and `sigma = -`
/// registers.
pub fn current(layout: &RdtLayout, sys: &SystemSpec, state: &RdtState, labels: &[String]) -> Result<Complex64> {
    if layout.statistics != Statistics::Fermionic {
        return Err(Error::UnknownObservable(
            "current is defined for fermionic environments only".into(),
        ));
    }
    for l in labels {
        if sys.coupling(l).is_none() {
            return Err(Error::UnknownObservable(format!("current of `{l}`")));
        }
    }
    let parity = sys.parity.as_ref().ok_or_else(|| Error::invalid("parity", "missing"))?;
    let tr = state.trace();
    if tr.norm() < 1e-300 {
        return Err(Error::ZeroTrace(tr.norm()));
    }
    let mut total = ZERO;
    for (j, m) in layout.modes.iter().enumerate() {
        if !labels.contains(&m.label) {
            continue;
        }
        let c = sys.coupling(&m.label).expect("checked above");
        let (x, y) = first_tier_blocks(layout, parity, state, j);
        let zeta_m = m.minus.expect("fermionic mode").2;
        total += I * (m.zeta * expectation(&x, c) - zeta_m * expectation(&y, &c.adjoint()));
    }
    Ok(total / tr)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Real(f64),
    Complex(Complex64),
}

impl Value {
    pub fn push_to(&self, row: &mut Vec<f64>) {
        match *self {
            Value::Real(v) => row.push(v),
            Value::Complex(v) => {
                row.push(v.re);
                row.push(v.im);
            }
        }
    }
}

/// Evaluates observables on the renormalized vacuum block.
pub fn evaluate(
    observables: &[Observable],
    layout: &RdtLayout,
    sys: &SystemSpec,
    state: &RdtState,
) -> Result<Vec<Value>> {
    let rho = state.reduced_density()?;
    evaluate_on(observables, &rho, Some((layout, sys, state)))
}

/// Evaluates observables on a reduced density matrix; currents need the
/// full tensor.
pub fn evaluate_on(
    observables: &[Observable],
    rho: &Array2<Complex64>,
    full: Option<(&RdtLayout, &SystemSpec, &RdtState)>,
) -> Result<Vec<Value>> {
    observables
        .iter()
        .map(|o| match &o.kind {
            ObservableKind::Expectation(op) => {
                if op.dim() != rho.nrows() {
                    return Err(Error::DimensionMismatch {
                        expected: rho.nrows(),
                        found: op.dim(),
                    });
                }
                Ok(Value::Real(expectation(rho, op).re))
            }
            ObservableKind::Current(labels) => match full {
                Some((layout, sys, state)) => Ok(Value::Complex(current(layout, sys, state, labels)?)),
                None => Err(Error::UnknownObservable(format!(
                    "{} needs the dissipaton tensor",
                    o.name
                ))),
            },
        })
        .collect()
}
