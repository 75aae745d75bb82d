// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Compressed-sparse-row complex operators.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex operator in CSR form.
///
/// Entries within a row are stored with strictly increasing column index and
/// explicit zeros are dropped, so two operators with the same action compare
/// equal.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![ONE; dim])
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            if v != ZERO {
                op.col_idx.push(i);
                op.values.push(v);
            }
            op.row_ptr[i + 1] = op.col_idx.len();
        }
        op
    }

    /// Builds an operator from `(row, col, value)` triplets. Duplicates are
    /// summed.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut t: Vec<(usize, usize, Complex64)> = triplets.into_iter().collect();
        for &(r, c, _) in &t {
            if r >= dim {
                return Err(Error::IndexOutOfRange { index: r, dim });
            }
            if c >= dim {
                return Err(Error::IndexOutOfRange { index: c, dim });
            }
        }
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut op = Self::zeros(dim);
        let mut i = 0;
        while i < t.len() {
            let (r, c, mut v) = t[i];
            i += 1;
            while i < t.len() && t[i].0 == r && t[i].1 == c {
                v += t[i].2;
                i += 1;
            }
            if v != ZERO {
                op.col_idx.push(c);
                op.values.push(v);
                op.row_ptr[r + 1] += 1;
            }
        }
        for r in 0..dim {
            op.row_ptr[r + 1] += op.row_ptr[r];
        }
        Ok(op)
    }

    pub fn from_dense(m: &Array2<Complex64>) -> Result<Self> {
        let (r, c) = m.dim();
        if r != c {
            return Err(Error::DimensionMismatch { expected: r, found: c });
        }
        let mut op = Self::zeros(r);
        for i in 0..r {
            for j in 0..c {
                let v = m[[i, j]];
                if v != ZERO {
                    op.col_idx.push(j);
                    op.values.push(v);
                }
            }
            op.row_ptr[i + 1] = op.col_idx.len();
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (r, self.col_idx[p], self.values[p]))
        })
    }

    /// Entries of one row as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (self.col_idx[p], self.values[p]))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let cols = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        match cols.binary_search(&c) {
            Ok(p) => self.values[self.row_ptr[r] + p],
            Err(_) => ZERO,
        }
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for (r, c, v) in self.entries() {
            m[[r, c]] = v;
        }
        m
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yr = acc;
        }
    }

    /// `y += alpha A x`.
    pub fn matvec_acc(&self, alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yr += alpha * acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.dim];
        self.matvec(x, &mut y);
        y
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        if alpha == ZERO {
            return Self::zeros(self.dim);
        }
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= alpha;
        }
        out
    }

    /// `alpha A + beta B`.
    pub fn lin_comb(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            let (mut p, pe) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let (mut q, qe) = (other.row_ptr[r], other.row_ptr[r + 1]);
            while p < pe || q < qe {
                let cp = if p < pe { self.col_idx[p] } else { usize::MAX };
                let cq = if q < qe { other.col_idx[q] } else { usize::MAX };
                let (c, v) = if cp == cq {
                    let v = alpha * self.values[p] + beta * other.values[q];
                    p += 1;
                    q += 1;
                    (cp, v)
                } else if cp < cq {
                    p += 1;
                    (cp, alpha * self.values[p - 1])
                } else {
                    q += 1;
                    (cq, beta * other.values[q - 1])
                };
                if v != ZERO {
                    out.col_idx.push(c);
                    out.values.push(v);
                }
            }
            out.row_ptr[r + 1] = out.col_idx.len();
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(ONE, other, ONE)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(ONE, other, -ONE)
    }

    /// Matrix product `A B`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        let mut acc = vec![ZERO; n];
        let mut mark = vec![usize::MAX; n];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..n {
            touched.clear();
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                let k = self.col_idx[p];
                let a = self.values[p];
                for q in other.row_ptr[k]..other.row_ptr[k + 1] {
                    let c = other.col_idx[q];
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = ZERO;
                        touched.push(c);
                    }
                    acc[c] += a * other.values[q];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != ZERO {
                    out.col_idx.push(c);
                    out.values.push(acc[c]);
                }
            }
            out.row_ptr[r + 1] = out.col_idx.len();
        }
        Ok(out)
    }

    /// Kronecker product `A ⊗ B`; the index of `A` is the slow one.
    pub fn kron(&self, other: &Self) -> Self {
        let n = self.dim * other.dim;
        let mut out = Self::zeros(n);
        out.col_idx.reserve(self.nnz() * other.nnz());
        out.values.reserve(self.nnz() * other.nnz());
        for ra in 0..self.dim {
            for rb in 0..other.dim {
                for p in self.row_ptr[ra]..self.row_ptr[ra + 1] {
                    let (ca, va) = (self.col_idx[p], self.values[p]);
                    for q in other.row_ptr[rb]..other.row_ptr[rb + 1] {
                        let v = va * other.values[q];
                        if v != ZERO {
                            out.col_idx.push(ca * other.dim + other.col_idx[q]);
                            out.values.push(v);
                        }
                    }
                }
                out.row_ptr[ra * other.dim + rb + 1] = out.col_idx.len();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.entries().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.dim, triplets).expect("transpose keeps indices in range")
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = v.conj();
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    /// Largest absolute entry of `A - B`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.values.iter().fold(0.0, |m, v| m.max(v.norm())))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Induced 1-norm (largest column sum of moduli).
    pub fn norm1(&self) -> f64 {
        let mut cols = vec![0.0; self.dim];
        for (_, c, v) in self.entries() {
            cols[c] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()).map(|d| d <= tol).unwrap_or(false)
    }

    /// Submatrix on the listed indices, in the listed order.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let mut pos = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            if old >= self.dim {
                return Err(Error::IndexOutOfRange {
                    index: old,
                    dim: self.dim,
                });
            }
            pos[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_r, &old_r) in keep.iter().enumerate() {
            for (c, v) in self.row(old_r) {
                if pos[c] != usize::MAX {
                    triplets.push((new_r, pos[c], v));
                }
            }
        }
        Self::from_triplets(keep.len(), triplets)
    }

    /// Places the operator into a larger space: index `i` maps to `map[i]`.
    /// Rows and columns outside the image are zero.
    pub fn embed(&self, new_dim: usize, map: &[usize]) -> Result<Self> {
        if map.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: map.len(),
            });
        }
        let triplets: Vec<_> = self.entries().map(|(r, c, v)| (map[r], map[c], v)).collect();
        Self::from_triplets(new_dim, triplets)
    }

    /// Splits `A = A0 - i A1` with both parts Hermitian:
    /// `A0 = (A + A†)/2`, `A1 = i (A - A†)/2`.
    pub fn hermitian_split(&self) -> (Self, Self) {
        let adj = self.adjoint();
        let half = Complex64::new(0.5, 0.0);
        let a0 = self.lin_comb(half, &adj, half).expect("same dimension");
        let a1 = self
            .lin_comb(Complex64::new(0.0, 0.5), &adj, Complex64::new(0.0, -0.5))
            .expect("same dimension");
        (a0, a1)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}
