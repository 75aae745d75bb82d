// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Hierarchical equations of motion over dense auxiliary density operators.
//!
//! This is the reference solver the second-quantized generator is checked
//! against. It works directly on `d x d` blocks addressed by hashed
//! occupation multi-indices and shares no operator construction with
//! [`crate::generator`].

use std::collections::HashMap;

use num_complex::Complex64;

use crate::algebra::SparseOperator;
use crate::error::{Error, Result};
use crate::generator::{Environment, JwOrdering, RdtLayout, SystemSpec, Truncation};
use crate::modes::{dissipaton_coefficients, Statistics};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `out += alpha * op * rho` for a sparse `op` and dense row-major `rho`.
fn left_acc(out: &mut [Complex64], alpha: Complex64, op: &SparseOperator, rho: &[Complex64], d: usize) {
    for (r, c, v) in op.entries() {
        let w = alpha * v;
        let src = &rho[c * d..(c + 1) * d];
        let dst = &mut out[r * d..(r + 1) * d];
        for (o, s) in dst.iter_mut().zip(src) {
            *o += w * s;
        }
    }
}

/// `out += alpha * rho * op`.
fn right_acc(out: &mut [Complex64], alpha: Complex64, op: &SparseOperator, rho: &[Complex64], d: usize) {
    for (r, c, v) in op.entries() {
        let w = alpha * v;
        for i in 0..d {
            out[i * d + c] += w * rho[i * d + r];
        }
    }
}

struct BosonicMode {
    q: SparseOperator,
    eta: Complex64,
    eta_bar_conj: Complex64,
    gamma: Complex64,
    zeta: Complex64,
}

/// Bosonic hierarchy `rho_n` with per-mode caps and optional tier cap.
///
/// `rho_n' = -i[H, rho_n] - sum_k n_k gamma_k rho_n - i sum_k [Q_k, rho_{n+1_k}]
///           - i sum_k n_k (eta_k Q_k rho_{n-1_k} - conj(eta_kbar) rho_{n-1_k} Q_k)`
///
/// With `scaled = true` the hierarchy holds
/// `rho_n / prod_k (zeta_k^{n_k} sqrt(n_k!))` instead.
pub struct BosonicHeom {
    d: usize,
    h: SparseOperator,
    modes: Vec<BosonicMode>,
    indices: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    up: Vec<usize>,
    down: Vec<usize>,
    scaled: bool,
}

const NONE: usize = usize::MAX;

impl BosonicHeom {
    pub fn new(sys: &SystemSpec, envs: &[Environment], trunc: Truncation, scaled: bool) -> Result<Self> {
        if sys.statistics != Statistics::Bosonic {
            return Err(Error::invalid("statistics", "expected a bosonic system"));
        }
        let mut modes = Vec::new();
        for env in envs {
            let q = sys
                .coupling(&env.label)
                .ok_or_else(|| Error::MissingModeSet(env.label.clone()))?;
            let coeffs = dissipaton_coefficients(&env.modes)?;
            for (k, m) in env.modes.modes().iter().enumerate() {
                modes.push(BosonicMode {
                    q: q.clone(),
                    eta: m.eta,
                    eta_bar_conj: env.modes.modes()[env.modes.partner(k)].eta.conj(),
                    gamma: m.gamma,
                    zeta: coeffs[k].zeta,
                });
            }
        }
        for (label, _) in &sys.couplings {
            if !envs.iter().any(|e| &e.label == label) {
                return Err(Error::MissingModeSet(label.clone()));
            }
        }
        let k = modes.len();
        let mut indices = Vec::new();
        let mut stack = vec![(Vec::<u8>::new(), 0usize)];
        while let Some((prefix, used)) = stack.pop() {
            if prefix.len() == k {
                indices.push(prefix);
                continue;
            }
            let room = trunc.tier_cap.map_or(trunc.n_max, |l| trunc.n_max.min(l - used));
            for n in (0..=room).rev() {
                let mut next = prefix.clone();
                next.push(n as u8);
                stack.push((next, used + n));
            }
        }
        let lookup: HashMap<Vec<u8>, usize> = indices.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let mut up = vec![NONE; indices.len() * k];
        let mut down = vec![NONE; indices.len() * k];
        for (a, n) in indices.iter().enumerate() {
            for j in 0..k {
                let mut m = n.clone();
                m[j] += 1;
                if let Some(&b) = lookup.get(&m) {
                    up[a * k + j] = b;
                }
                if n[j] > 0 {
                    let mut m = n.clone();
                    m[j] -= 1;
                    down[a * k + j] = lookup[&m];
                }
            }
        }
        Ok(Self {
            d: sys.dim(),
            h: sys.hamiltonian.clone(),
            modes,
            indices,
            lookup,
            up,
            down,
            scaled,
        })
    }

    pub fn n_ados(&self) -> usize {
        self.indices.len()
    }

    pub fn system_dim(&self) -> usize {
        self.d
    }

    pub fn state_len(&self) -> usize {
        self.n_ados() * self.d * self.d
    }

    pub fn index_of(&self, n: &[u8]) -> Option<usize> {
        self.lookup.get(n).copied()
    }

    /// All-zero hierarchy except `rho_0 = rho_s` (row-major).
    pub fn initial_state(&self, rho_s: &[Complex64]) -> Result<Vec<Complex64>> {
        let dd = self.d * self.d;
        if rho_s.len() != dd {
            return Err(Error::DimensionMismatch {
                expected: dd,
                found: rho_s.len(),
            });
        }
        let mut s = vec![ZERO; self.state_len()];
        let zero = self.index_of(&vec![0; self.modes.len()]).expect("vacuum index exists");
        s[zero * dd..(zero + 1) * dd].copy_from_slice(rho_s);
        Ok(s)
    }

    pub fn rhs(&self, state: &[Complex64], out: &mut [Complex64]) {
        let d = self.d;
        let dd = d * d;
        let k = self.modes.len();
        out.iter_mut().for_each(|v| *v = ZERO);
        for (a, n) in self.indices.iter().enumerate() {
            let rho = &state[a * dd..(a + 1) * dd];
            let o = &mut out[a * dd..(a + 1) * dd];
            left_acc(o, -I, &self.h, rho, d);
            right_acc(o, I, &self.h, rho, d);
            let mut damp = ZERO;
            for (j, m) in self.modes.iter().enumerate() {
                damp += m.gamma * n[j] as f64;
            }
            for (x, r) in o.iter_mut().zip(rho) {
                *x -= damp * r;
            }
            for (j, m) in self.modes.iter().enumerate() {
                let nj = n[j] as f64;
                let b = self.up[a * k + j];
                if b != NONE {
                    let w = if self.scaled { m.zeta * (nj + 1.0).sqrt() } else { ONE };
                    let src = &state[b * dd..(b + 1) * dd];
                    left_acc(o, -I * w, &m.q, src, d);
                    right_acc(o, I * w, &m.q, src, d);
                }
                let b = self.down[a * k + j];
                if b != NONE {
                    let w = if self.scaled {
                        nj.sqrt() / m.zeta
                    } else {
                        Complex64::new(nj, 0.0)
                    };
                    let src = &state[b * dd..(b + 1) * dd];
                    left_acc(o, -I * w * m.eta, &m.q, src, d);
                    right_acc(o, I * w * m.eta_bar_conj, &m.q, src, d);
                }
            }
        }
    }

    /// Maps the hierarchy onto the reduced density tensor of `layout`.
    pub fn to_rdt(&self, state: &[Complex64], layout: &RdtLayout) -> Result<Vec<Complex64>> {
        if layout.statistics != Statistics::Bosonic || layout.n_modes() != self.modes.len() {
            return Err(Error::invalid("layout", "layout does not describe this hierarchy"));
        }
        let d = self.d;
        let dd = d * d;
        let mut out = vec![ZERO; layout.dim()];
        for (a, n) in self.indices.iter().enumerate() {
            let c = layout.fock.index_of(n).ok_or(Error::IndexOutOfRange {
                index: a,
                dim: layout.fock.dim(),
            })?;
            let mut scale = ONE;
            if !self.scaled {
                for (j, &nj) in n.iter().enumerate() {
                    for q in 1..=nj {
                        scale *= self.modes[j].zeta * (q as f64).sqrt();
                    }
                }
            }
            for i in 0..d {
                for jj in 0..d {
                    out[layout.index(i, jj, c)] = state[a * dd + i * d + jj] / scale;
                }
            }
        }
        Ok(out)
    }

    /// Reduced system density matrix (the `n = 0` block).
    pub fn system_block<'a>(&self, state: &'a [Complex64]) -> &'a [Complex64] {
        let dd = self.d * self.d;
        let zero = self.index_of(&vec![0; self.modes.len()]).expect("vacuum index exists");
        &state[zero * dd..(zero + 1) * dd]
    }
}

struct FermionicMode {
    c: SparseOperator,
    cd: SparseOperator,
    eta_p: Complex64,
    eta_m: Complex64,
    gamma_p: Complex64,
    gamma_m: Complex64,
    zeta_p: Complex64,
    zeta_m: Complex64,
}

/// Fermionic hierarchy `rho_{n,m}` with `n` the `sigma = +` and `m` the
/// `sigma = -` occupation bit-strings (bit `k` is mode `k`).
///
/// Grassmann signs follow the canonical index order in which every
/// `sigma = +` index precedes every `sigma = -` index, with modes ordered
/// by `k` inside each group.
pub struct FermionicHeom {
    d: usize,
    h: SparseOperator,
    modes: Vec<FermionicMode>,
    indices: Vec<(u64, u64)>,
    lookup: HashMap<(u64, u64), usize>,
}

fn sign(p: u32) -> f64 {
    if p % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl FermionicHeom {
    pub fn new(sys: &SystemSpec, envs: &[Environment]) -> Result<Self> {
        if sys.statistics != Statistics::Fermionic {
            return Err(Error::invalid("statistics", "expected a fermionic system"));
        }
        for (label, _) in &sys.couplings {
            if !envs.iter().any(|e| &e.label == label) {
                return Err(Error::MissingModeSet(label.clone()));
            }
        }
        let mut modes = Vec::new();
        for env in envs {
            let c = sys
                .coupling(&env.label)
                .ok_or_else(|| Error::MissingModeSet(env.label.clone()))?;
            let coeffs = dissipaton_coefficients(&env.modes)?;
            for &(p, m) in env.modes.fermionic_pairs() {
                let (mp, mm) = (env.modes.modes()[p], env.modes.modes()[m]);
                modes.push(FermionicMode {
                    c: c.clone(),
                    cd: c.adjoint(),
                    eta_p: mp.eta,
                    eta_m: mm.eta,
                    gamma_p: mp.gamma,
                    gamma_m: mm.gamma,
                    zeta_p: coeffs[p].zeta,
                    zeta_m: coeffs[m].zeta,
                });
            }
        }
        if modes.len() > 24 {
            return Err(Error::invalid("modes", "too many fermionic modes for the hierarchy"));
        }
        let full = 1u64 << modes.len();
        let mut indices = Vec::with_capacity((full * full) as usize);
        for n in 0..full {
            for m in 0..full {
                indices.push((n, m));
            }
        }
        let lookup = indices.iter().enumerate().map(|(i, &nm)| (nm, i)).collect();
        Ok(Self {
            d: sys.dim(),
            h: sys.hamiltonian.clone(),
            modes,
            indices,
            lookup,
        })
    }

    pub fn n_ados(&self) -> usize {
        self.indices.len()
    }

    pub fn state_len(&self) -> usize {
        self.n_ados() * self.d * self.d
    }

    pub fn index_of(&self, n: u64, m: u64) -> Option<usize> {
        self.lookup.get(&(n, m)).copied()
    }

    pub fn initial_state(&self, rho_s: &[Complex64]) -> Result<Vec<Complex64>> {
        let dd = self.d * self.d;
        if rho_s.len() != dd {
            return Err(Error::DimensionMismatch {
                expected: dd,
                found: rho_s.len(),
            });
        }
        let mut s = vec![ZERO; self.state_len()];
        let zero = self.index_of(0, 0).expect("vacuum index exists");
        s[zero * dd..(zero + 1) * dd].copy_from_slice(rho_s);
        Ok(s)
    }

    pub fn rhs(&self, state: &[Complex64], out: &mut [Complex64]) {
        let d = self.d;
        let dd = d * d;
        out.iter_mut().for_each(|v| *v = ZERO);
        for (a, &(n, m)) in self.indices.iter().enumerate() {
            let rho = &state[a * dd..(a + 1) * dd];
            let o = &mut out[a * dd..(a + 1) * dd];
            left_acc(o, -I, &self.h, rho, d);
            right_acc(o, I, &self.h, rho, d);
            let big_n = n.count_ones();
            let big_m = m.count_ones();
            let mut damp = ZERO;
            for (k, md) in self.modes.iter().enumerate() {
                if n >> k & 1 == 1 {
                    damp += md.gamma_p;
                }
                if m >> k & 1 == 1 {
                    damp += md.gamma_m;
                }
            }
            for (x, r) in o.iter_mut().zip(rho) {
                *x -= damp * r;
            }
            for (k, md) in self.modes.iter().enumerate() {
                let bit = 1u64 << k;
                let upto = (bit << 1) - 1;
                let theta_p = (n & upto).count_ones();
                let theta_m = (m & upto).count_ones();
                if n & bit == 0 {
                    let b = self.index_of(n | bit, m).expect("full hierarchy");
                    let src = &state[b * dd..(b + 1) * dd];
                    let sl = sign(big_m + big_n + 2 - theta_p);
                    let sr = sign(theta_p);
                    left_acc(o, -I * sl, &md.c, src, d);
                    right_acc(o, I * sr, &md.c, src, d);
                } else {
                    let b = self.index_of(n & !bit, m).expect("full hierarchy");
                    let src = &state[b * dd..(b + 1) * dd];
                    let sl = sign(big_m + big_n + 2 - theta_p);
                    let sr = sign(theta_p + 1);
                    left_acc(o, -I * sl * md.eta_p, &md.cd, src, d);
                    right_acc(o, I * sr * md.eta_m.conj(), &md.cd, src, d);
                }
                if m & bit == 0 {
                    let b = self.index_of(n, m | bit).expect("full hierarchy");
                    let src = &state[b * dd..(b + 1) * dd];
                    let sl = sign(big_m + 2 - theta_m);
                    let sr = sign(big_n + theta_m);
                    left_acc(o, -I * sl, &md.cd, src, d);
                    right_acc(o, I * sr, &md.cd, src, d);
                } else {
                    let b = self.index_of(n, m & !bit).expect("full hierarchy");
                    let src = &state[b * dd..(b + 1) * dd];
                    let sl = sign(big_m + 2 - theta_m);
                    let sr = sign(big_n + 1 + theta_m);
                    left_acc(o, -I * sl * md.eta_m, &md.c, src, d);
                    right_acc(o, I * sr * md.eta_p.conj(), &md.c, src, d);
                }
            }
        }
    }

    /// Maps the hierarchy onto the reduced density tensor of `layout`,
    /// including the Jordan-Wigner parity factors of its ordering.
    pub fn to_rdt(&self, state: &[Complex64], layout: &RdtLayout, parity: &SparseOperator) -> Result<Vec<Complex64>> {
        let k = self.modes.len();
        if layout.statistics != Statistics::Fermionic || layout.n_modes() != k {
            return Err(Error::invalid("layout", "layout does not describe this hierarchy"));
        }
        let d = self.d;
        let dd = d * d;
        let d1 = layout.fock.dim();
        let p: Vec<f64> = (0..d).map(|i| parity.get(i, i).re).collect();
        let register = |bits: u64| -> usize { (0..k).fold(0usize, |acc, j| (acc << 1) | ((bits >> j) & 1) as usize) };
        let mut out = vec![ZERO; layout.dim()];
        for (a, &(n, m)) in self.indices.iter().enumerate() {
            let big_n = n.count_ones();
            let big_m = m.count_ones();
            let mut scale = ONE;
            for (j, md) in self.modes.iter().enumerate() {
                if n >> j & 1 == 1 {
                    scale *= md.zeta_p;
                }
                if m >> j & 1 == 1 {
                    scale *= md.zeta_m;
                }
            }
            let s_n = sign(big_n * big_n.saturating_sub(1) / 2);
            let c = register(m) * d1 + register(n);
            for i in 0..d {
                for j in 0..d {
                    let mut v = state[a * dd + i * d + j] / scale * s_n;
                    if layout.ordering == JwOrdering::SystemFirst {
                        if big_m % 2 == 1 {
                            v *= p[i];
                        }
                        if big_n % 2 == 1 {
                            v *= p[j];
                        }
                    }
                    out[layout.index(i, j, c)] = v;
                }
            }
        }
        Ok(out)
    }

    pub fn system_block<'a>(&self, state: &'a [Complex64]) -> &'a [Complex64] {
        let dd = self.d * self.d;
        let zero = self.index_of(0, 0).expect("vacuum index exists");
        &state[zero * dd..(zero + 1) * dd]
    }
}
