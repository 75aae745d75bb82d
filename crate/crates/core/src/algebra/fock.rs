// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Truncated Fock spaces, ladder operators and Jordan-Wigner strings.

use std::collections::HashMap;

use num_complex::Complex64;

use super::sparse::SparseOperator;
use crate::error::{Error, Result};

/// Occupation-number basis of a set of modes with per-mode caps and an
/// optional cap on the total occupation.
///
/// Configurations are enumerated in mixed-radix order with site 0 as the
/// most significant digit; the vacuum always has index 0.
#[derive(Clone, Debug)]
pub struct FockLayout {
    caps: Vec<usize>,
    tier_cap: Option<usize>,
    configs: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
}

impl FockLayout {
    pub fn new(caps: Vec<usize>, tier_cap: Option<usize>) -> Result<Self> {
        if caps.iter().any(|&c| c > u8::MAX as usize) {
            return Err(Error::invalid("caps", "occupation cap above 255"));
        }
        let mut configs = Vec::new();
        let mut current = vec![0u8; caps.len()];
        enumerate(&caps, tier_cap, 0, 0, &mut current, &mut configs);
        let lookup = configs.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Ok(Self {
            caps,
            tier_cap,
            configs,
            lookup,
        })
    }

    /// Every mode capped at one occupation, no global cap.
    pub fn fermionic(n_modes: usize) -> Self {
        Self::new(vec![1; n_modes], None).expect("caps of one are valid")
    }

    pub fn caps(&self) -> &[usize] {
        &self.caps
    }

    pub fn tier_cap(&self) -> Option<usize> {
        self.tier_cap
    }

    pub fn n_sites(&self) -> usize {
        self.caps.len()
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn config(&self, index: usize) -> &[u8] {
        &self.configs[index]
    }

    pub fn configs(&self) -> &[Vec<u8>] {
        &self.configs
    }

    pub fn index_of(&self, config: &[u8]) -> Option<usize> {
        self.lookup.get(config).copied()
    }

    /// Lifts a single-site operator to the full space. Matrix elements that
    /// would leave the basis (tier cap) are dropped.
    pub fn embed_operator(&self, op: &SparseOperator, site: usize) -> Result<SparseOperator> {
        if site >= self.caps.len() {
            return Err(Error::IndexOutOfRange {
                index: site,
                dim: self.caps.len(),
            });
        }
        let local = self.caps[site] + 1;
        if op.dim() != local {
            return Err(Error::DimensionMismatch {
                expected: local,
                found: op.dim(),
            });
        }
        let mut triplets = Vec::new();
        let mut scratch = vec![0u8; self.caps.len()];
        for (col, config) in self.configs.iter().enumerate() {
            let s = config[site] as usize;
            for (r, c, v) in op.entries() {
                if c != s {
                    continue;
                }
                scratch.copy_from_slice(config);
                scratch[site] = r as u8;
                if let Some(row) = self.index_of(&scratch) {
                    triplets.push((row, col, v));
                }
            }
        }
        SparseOperator::from_triplets(self.dim(), triplets)
    }

    /// `(-1)^(n_0 + ... + n_{site-1})` as a diagonal operator.
    pub fn parity_before(&self, site: usize) -> SparseOperator {
        let diag: Vec<Complex64> = self
            .configs
            .iter()
            .map(|c| {
                let n: usize = c[..site].iter().map(|&x| x as usize).sum();
                Complex64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
            })
            .collect();
        SparseOperator::diagonal(&diag)
    }

    /// Total parity `(-1)^N`.
    pub fn parity(&self) -> SparseOperator {
        self.parity_before(self.caps.len())
    }

    pub fn total_occupation(&self, index: usize) -> usize {
        self.configs[index].iter().map(|&x| x as usize).sum()
    }
}

fn enumerate(
    caps: &[usize],
    tier_cap: Option<usize>,
    site: usize,
    used: usize,
    current: &mut Vec<u8>,
    out: &mut Vec<Vec<u8>>,
) {
    if site == caps.len() {
        out.push(current.clone());
        return;
    }
    let room = tier_cap.map_or(caps[site], |l| caps[site].min(l - used));
    for n in 0..=room {
        current[site] = n as u8;
        enumerate(caps, tier_cap, site + 1, used + n, current, out);
    }
    current[site] = 0;
}

/// Bosonic annihilation and creation operators truncated at `n_max`.
/// Creation on `|n_max>` gives zero.
pub fn boson_ladder(n_max: usize) -> (SparseOperator, SparseOperator) {
    let dim = n_max + 1;
    let lower: Vec<_> = (1..dim)
        .map(|n| (n - 1, n, Complex64::new((n as f64).sqrt(), 0.0)))
        .collect();
    let b = SparseOperator::from_triplets(dim, lower).expect("indices in range");
    let bd = b.transpose();
    (b, bd)
}

/// Local number operator `diag(0, 1, ..., n_max)`.
pub fn number_operator(n_max: usize) -> SparseOperator {
    let diag: Vec<_> = (0..=n_max).map(|n| Complex64::new(n as f64, 0.0)).collect();
    SparseOperator::diagonal(&diag)
}

/// Jordan-Wigner annihilator for `site` of a fermionic layout:
/// `(-1)^(n_0 + ... + n_{site-1}) a_site`.
pub fn jw_ladder(layout: &FockLayout, site: usize) -> Result<SparseOperator> {
    if site >= layout.n_sites() {
        return Err(Error::IndexOutOfRange {
            index: site,
            dim: layout.n_sites(),
        });
    }
    if layout.caps()[site] != 1 {
        return Err(Error::invalid("caps", "Jordan-Wigner sites must have cap 1"));
    }
    let (a, _) = boson_ladder(1);
    let local = layout.embed_operator(&a, site)?;
    layout.parity_before(site).matmul(&local)
}

/// Which side of the density matrix a system operator multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Row-major vectorization: `vec(A rho) = (A ⊗ I) vec(rho)` and
/// `vec(rho A) = (I ⊗ A^T) vec(rho)`.
pub fn lift_system_superop(op: &SparseOperator, side: Side) -> SparseOperator {
    let id = SparseOperator::identity(op.dim());
    match side {
        Side::Left => op.kron(&id),
        Side::Right => id.kron(&op.transpose()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_counts_and_vacuum() {
        let full = FockLayout::new(vec![3, 3, 3], None).unwrap();
        assert_eq!(full.dim(), 64);
        assert_eq!(full.config(0), &[0, 0, 0]);
        assert_eq!(full.index_of(&[0, 0, 1]), Some(1));
        assert_eq!(full.index_of(&[1, 0, 0]), Some(16));
        let capped = FockLayout::new(vec![3, 3, 3], Some(2)).unwrap();
        // configurations with total occupation <= 2 among 3 modes: C(5,3) = 10
        assert_eq!(capped.dim(), 10);
        assert!(capped
            .configs()
            .iter()
            .all(|c| c.iter().map(|&x| x as usize).sum::<usize>() <= 2));
    }

    #[test]
    fn boson_commutator_off_the_edge() {
        let (b, bd) = boson_ladder(4);
        let comm = b.matmul(&bd).unwrap().sub(&bd.matmul(&b).unwrap()).unwrap();
        for n in 0..4 {
            assert!((comm.get(n, n) - 1.0).norm() < 1e-14);
        }
        assert!((comm.get(4, 4) + 4.0).norm() < 1e-14);
    }

    #[test]
    fn embedded_ladders_on_capped_layout() {
        let layout = FockLayout::new(vec![2, 2], Some(2)).unwrap();
        let (_, bd) = boson_ladder(2);
        let bd0 = layout.embed_operator(&bd, 0).unwrap();
        let from = layout.index_of(&[1, 1]).unwrap();
        // raising mode 0 from |1,1> leaves the tier-capped basis
        assert!(bd0.entries().all(|(_, c, _)| c != from));
        let to = layout.index_of(&[2, 0]).unwrap();
        let src = layout.index_of(&[1, 0]).unwrap();
        assert!((bd0.get(to, src) - 2f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn jw_anticommutation() {
        let layout = FockLayout::fermionic(3);
        let ops: Vec<_> = (0..3).map(|k| jw_ladder(&layout, k).unwrap()).collect();
        let id = SparseOperator::identity(8);
        for i in 0..3 {
            for j in 0..3 {
                let a = &ops[i];
                let bd = ops[j].adjoint();
                let anti = a.matmul(&bd).unwrap().add(&bd.matmul(a).unwrap()).unwrap();
                let expected = if i == j { id.clone() } else { SparseOperator::zeros(8) };
                assert!(anti.max_abs_diff(&expected).unwrap() < 1e-15);
                let b = &ops[j];
                let aa = a.matmul(b).unwrap().add(&b.matmul(a).unwrap()).unwrap();
                assert!(aa.max_abs() < 1e-15);
            }
        }
    }

    #[test]
    fn superop_lift_matches_products() {
        let a = SparseOperator::from_triplets(
            2,
            vec![(0, 1, Complex64::new(1.0, 2.0)), (1, 1, Complex64::new(-0.5, 0.0))],
        )
        .unwrap();
        let rho = [
            Complex64::new(0.3, 0.0),
            Complex64::new(0.1, 0.2),
            Complex64::new(0.1, -0.2),
            Complex64::new(0.7, 0.0),
        ];
        let left = lift_system_superop(&a, Side::Left).apply(&rho);
        let right = lift_system_superop(&a, Side::Right).apply(&rho);
        let ad = a.to_dense();
        let r = ndarray::Array2::from_shape_vec((2, 2), rho.to_vec()).unwrap();
        let l_ref = ad.dot(&r);
        let r_ref = r.dot(&ad);
        for i in 0..2 {
            for j in 0..2 {
                assert!((left[i * 2 + j] - l_ref[[i, j]]).norm() < 1e-15);
                assert!((right[i * 2 + j] - r_ref[[i, j]]).norm() < 1e-15);
            }
        }
    }
}
