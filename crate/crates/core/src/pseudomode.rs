// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pseudomode representation of real-mode bosonic environments.
//!
//! Every mode `(eta, gamma)` with real parameters becomes a damped harmonic
//! mode `a_k` coupled through `zeta_k Q (a_k + a_k^+)` with `zeta_k^2 = eta_k`:
//!
//! `rho' = -i[H_S + sum_k zeta_k Q_k (a_k + a_k^+), rho]
//!        + sum_k gamma_k (2 a_k rho a_k^+ - a_k^+ a_k rho - rho a_k^+ a_k)`.
//!
//! The reduced density tensor is recovered as
//! `rho~_n = tr_D(prod_k :(a_k + a_k^+)^{n_k}: rho) / sqrt(prod_k n_k!)`.

use num_complex::Complex64;

use crate::algebra::{boson_ladder, FockLayout, SparseOperator};
use crate::error::{Error, Result};
use crate::generator::{Environment, RdtLayout, SystemSpec};
use crate::modes::Statistics;
use crate::propagate::RdtState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative size of an imaginary part still treated as zero.
const REAL_TOL: f64 = 1e-12;

/// Lindblad superoperator on system plus pseudomodes, row-major vectorized.
#[derive(Clone, Debug)]
pub struct PseudomodeGenerator {
    pub system_dim: usize,
    pub fock: FockLayout,
    /// Rate operator `L` with `d vec(rho)/dt = L vec(rho)`.
    pub rate: SparseOperator,
}

impl PseudomodeGenerator {
    pub fn joint_dim(&self) -> usize {
        self.system_dim * self.fock.dim()
    }

    pub fn state_dim(&self) -> usize {
        self.joint_dim() * self.joint_dim()
    }

    /// `rho_S ⊗ |0><0|` vectorized.
    pub fn initial_state(&self, rho_s: &[Complex64]) -> Result<Vec<Complex64>> {
        let d = self.system_dim;
        if rho_s.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: rho_s.len(),
            });
        }
        let dp = self.fock.dim();
        let n = self.joint_dim();
        let mut out = vec![ZERO; self.state_dim()];
        for i in 0..d {
            for j in 0..d {
                out[(i * dp) * n + j * dp] = rho_s[i * d + j];
            }
        }
        Ok(out)
    }
}

/// Builds the pseudomode Lindblad generator with occupation cap `cap` per
/// pseudomode.
pub fn build_pseudomode_generator(sys: &SystemSpec, envs: &[Environment], cap: usize) -> Result<PseudomodeGenerator> {
    if sys.statistics != Statistics::Bosonic {
        return Err(Error::invalid(
            "statistics",
            "pseudomodes represent bosonic environments",
        ));
    }
    let mut couplings = Vec::new();
    let mut index = 0;
    for env in envs {
        let q = sys
            .coupling(&env.label)
            .ok_or_else(|| Error::MissingModeSet(env.label.clone()))?;
        for m in env.modes.modes() {
            if m.eta.im.abs() > REAL_TOL * m.eta.norm() || m.gamma.im.abs() > REAL_TOL * m.gamma.norm() {
                return Err(Error::ComplexModeRejected {
                    index,
                    eta: format!("{}", m.eta),
                    gamma: format!("{}", m.gamma),
                });
            }
            couplings.push((q.clone(), Complex64::new(m.eta.re, 0.0).sqrt(), m.gamma.re));
            index += 1;
        }
    }
    let d = sys.dim();
    let fock = FockLayout::new(vec![cap; couplings.len()], None)?;
    let dp = fock.dim();
    let n = d * dp;
    let id_s = SparseOperator::identity(d);
    let id_p = SparseOperator::identity(dp);
    let id_n = SparseOperator::identity(n);
    let (a_loc, ad_loc) = boson_ladder(cap);

    let mut h = sys.hamiltonian.kron(&id_p);
    let mut jumps = Vec::new();
    for (k, (q, zeta, gamma)) in couplings.iter().enumerate() {
        let a = fock.embed_operator(&a_loc, k)?;
        let ad = fock.embed_operator(&ad_loc, k)?;
        h = h.add(&q.kron(&a.add(&ad)?).scale(*zeta))?;
        jumps.push((id_s.kron(&a), *gamma));
    }
    // -i (H ⊗ I - I ⊗ H^T)
    let mut rate = h.kron(&id_n).sub(&id_n.kron(&h.transpose()))?.scale(-I);
    for (a, gamma) in jumps {
        let ad = a.adjoint();
        let n_op = ad.matmul(&a)?;
        let g = Complex64::new(gamma, 0.0);
        rate = rate
            .lin_comb(ONE, &a.kron(&ad.transpose()), 2.0 * g)?
            .lin_comb(ONE, &n_op.kron(&id_n), -g)?
            .lin_comb(ONE, &id_n.kron(&n_op.transpose()), -g)?;
    }
    Ok(PseudomodeGenerator {
        system_dim: d,
        fock,
        rate,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

/// Maps a pseudomode density matrix onto the reduced density tensor of a
/// bosonic `layout` with the same number of modes.
pub fn extract_rdt(pg: &PseudomodeGenerator, rho_p: &[Complex64], layout: &RdtLayout) -> Result<RdtState> {
    if layout.statistics != Statistics::Bosonic || layout.n_modes() != pg.fock.n_sites() {
        return Err(Error::invalid(
            "layout",
            "layout must be bosonic with one mode per pseudomode",
        ));
    }
    if rho_p.len() != pg.state_dim() {
        return Err(Error::DimensionMismatch {
            expected: pg.state_dim(),
            found: rho_p.len(),
        });
    }
    let d = pg.system_dim;
    let dp = pg.fock.dim();
    let n = pg.joint_dim();
    let cap = pg.fock.caps().first().copied().unwrap_or(0);
    let (a_loc, ad_loc) = boson_ladder(cap);
    let local_powers = |op: &SparseOperator| -> Result<Vec<SparseOperator>> {
        let mut p = vec![SparseOperator::identity(cap + 1)];
        for u in 1..=cap {
            p.push(p[u - 1].matmul(op)?);
        }
        Ok(p)
    };
    let a_pow = local_powers(&a_loc)?;
    let ad_pow = local_powers(&ad_loc)?;
    // :(a + a^+)^n: for n = 0..=cap on one pseudomode
    let mut normal = Vec::with_capacity(cap + 1);
    for nn in 0..=cap {
        let mut o = SparseOperator::zeros(cap + 1);
        for u in 0..=nn {
            let term = ad_pow[u].matmul(&a_pow[nn - u])?;
            o = o.lin_comb(ONE, &term, Complex64::new(binomial(nn, u), 0.0))?;
        }
        normal.push(o);
    }

    let mut data = vec![ZERO; layout.dim()];
    let big_d = layout.dissipaton_dim();
    for c in 0..big_d {
        let occ = layout.fock.config(c);
        if occ.iter().any(|&x| x as usize > cap) {
            return Err(Error::invalid("cap", "pseudomode cap below the dissipaton cap"));
        }
        let mut op = SparseOperator::identity(dp);
        let mut norm = 1.0;
        for (k, &nk) in occ.iter().enumerate() {
            op = op.matmul(&pg.fock.embed_operator(&normal[nk as usize], k)?)?;
            norm *= factorial(nk as usize);
        }
        let scale = 1.0 / norm.sqrt();
        // tr_D(O rho)_{ij} = sum_{alpha beta} O_{alpha beta} rho_{(i beta),(j alpha)}
        for i in 0..d {
            for j in 0..d {
                let mut acc = ZERO;
                for (alpha, beta, v) in op.entries() {
                    acc += v * rho_p[(i * dp + beta) * n + j * dp + alpha];
                }
                data[layout.index(i, j, c)] = acc * scale;
            }
        }
    }
    RdtState::from_data(layout, data)
}
