// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Matrix exponentials: dense Padé scaling-and-squaring and a truncated
//! Taylor action for sparse operators.

use ndarray::Array2;
use num_complex::Complex64;

use crate::algebra::SparseOperator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Padé(13) coefficients for the scaling-and-squaring method.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(a: &Array2<Complex64>) -> f64 {
    let (n, m) = a.dim();
    (0..m)
        .map(|j| (0..n).map(|i| a[[i, j]].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(A)` for a dense square matrix.
pub fn expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    let nrm = norm1(a);
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a.mapv(|v| v / 2f64.powi(s));
    let id = Array2::<Complex64>::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let b = |k: usize| Complex64::new(PADE13[k], 0.0);
    let u_inner = &a6.mapv(|v| v * b(13)) + &a4.mapv(|v| v * b(11)) + &a2.mapv(|v| v * b(9));
    let u_tail = &a6.mapv(|v| v * b(7)) + &a4.mapv(|v| v * b(5)) + &a2.mapv(|v| v * b(3)) + &id.mapv(|v| v * b(1));
    let u = a.dot(&(a6.dot(&u_inner) + u_tail));
    let v_inner = &a6.mapv(|v| v * b(12)) + &a4.mapv(|v| v * b(10)) + &a2.mapv(|v| v * b(8));
    let v = a6.dot(&v_inner)
        + a6.mapv(|v| v * b(6))
        + a4.mapv(|v| v * b(4))
        + a2.mapv(|v| v * b(2))
        + id.mapv(|v| v * b(0));
    let p = &v + &u;
    let q = &v - &u;
    let mut r = solve(q, p);
    for _ in 0..s {
        r = r.dot(&r);
    }
    r
}

/// Solves `A X = B` by LU decomposition with partial pivoting.
fn solve(mut a: Array2<Complex64>, mut b: Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    let m = b.ncols();
    for k in 0..n {
        let mut piv = k;
        let mut best = a[[k, k]].norm();
        for i in k + 1..n {
            let v = a[[i, k]].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if piv != k {
            for j in 0..n {
                a.swap([k, j], [piv, j]);
            }
            for j in 0..m {
                b.swap([k, j], [piv, j]);
            }
        }
        let d = a[[k, k]];
        for i in k + 1..n {
            let f = a[[i, k]] / d;
            if f == ZERO {
                continue;
            }
            a[[i, k]] = f;
            for j in k + 1..n {
                let akj = a[[k, j]];
                a[[i, j]] -= f * akj;
            }
            for j in 0..m {
                let bkj = b[[k, j]];
                b[[i, j]] -= f * bkj;
            }
        }
    }
    for k in (0..n).rev() {
        let d = a[[k, k]];
        for j in 0..m {
            let mut acc = b[[k, j]];
            for i in k + 1..n {
                acc -= a[[k, i]] * b[[i, j]];
            }
            b[[k, j]] = acc / d;
        }
    }
    b
}

/// Dense matrix-vector product.
pub fn dense_matvec(m: &Array2<Complex64>, x: &[Complex64], y: &mut [Complex64]) {
    for (i, row) in m.rows().into_iter().enumerate() {
        let mut acc = ZERO;
        for (a, b) in row.iter().zip(x) {
            acc += a * b;
        }
        y[i] = acc;
    }
}

/// Action `v -> exp(t A) v` of a sparse operator, evaluated by a truncated
/// Taylor series on sub-steps whose scaled norm is at most one.
#[derive(Clone, Debug)]
pub struct ExpmAction {
    op: SparseOperator,
    norm1: f64,
}

impl ExpmAction {
    pub fn new(op: SparseOperator) -> Self {
        let norm1 = op.norm1();
        Self { op, norm1 }
    }

    pub fn operator(&self) -> &SparseOperator {
        &self.op
    }

    pub fn apply(&self, t: Complex64, v: &mut Vec<Complex64>) {
        let scaled = self.norm1 * t.norm();
        if scaled == 0.0 {
            return;
        }
        let substeps = scaled.ceil().max(1.0) as usize;
        let h = t / substeps as f64;
        let n = v.len();
        let mut term = vec![ZERO; n];
        let mut next = vec![ZERO; n];
        for _ in 0..substeps {
            term.copy_from_slice(v);
            let mut k = 1.0;
            loop {
                self.op.matvec(&term, &mut next);
                let f = h / k;
                let mut tnorm = 0.0f64;
                let mut vnorm = 0.0f64;
                for i in 0..n {
                    term[i] = next[i] * f;
                    v[i] += term[i];
                    tnorm = tnorm.max(term[i].norm());
                    vnorm = vnorm.max(v[i].norm());
                }
                if tnorm <= 1e-17 * vnorm || k >= 80.0 {
                    break;
                }
                k += 1.0;
            }
        }
    }
}

/// `exp(t A)` for a sparse operator, as a dense matrix.
pub fn expm_sparse(op: &SparseOperator, t: Complex64) -> Array2<Complex64> {
    expm(&op.to_dense().mapv(|v| v * t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(θ [[0, -1], [1, 0]]) = [[cos θ, -sin θ], [sin θ, cos θ]]
        for &theta in &[0.1, 1.0, 7.5, 40.0] {
            let a = array![[c(0.0, 0.0), c(-theta, 0.0)], [c(theta, 0.0), c(0.0, 0.0)]];
            let e = expm(&a);
            assert!((e[[0, 0]] - theta.cos()).norm() < 1e-12);
            assert!((e[[0, 1]] + theta.sin()).norm() < 1e-12);
            assert!((e[[1, 0]] - theta.sin()).norm() < 1e-12);
        }
    }

    #[test]
    fn expm_of_jordan_block() {
        // exp([[a, 1], [0, a]]) = e^a [[1, 1], [0, 1]]
        let a = c(-0.3, 2.0);
        let m = array![[a, c(1.0, 0.0)], [c(0.0, 0.0), a]];
        let e = expm(&m);
        let ea = a.exp();
        assert!((e[[0, 0]] - ea).norm() < 1e-13);
        assert!((e[[0, 1]] - ea).norm() < 1e-13);
        assert!(e[[1, 0]].norm() < 1e-13);
    }

    #[test]
    fn action_matches_dense() {
        let op = SparseOperator::from_triplets(
            3,
            vec![
                (0, 1, c(1.0, 0.5)),
                (1, 0, c(-2.0, 0.0)),
                (1, 2, c(0.0, 3.0)),
                (2, 2, c(-1.0, 0.0)),
                (2, 0, c(0.2, 0.0)),
            ],
        )
        .unwrap();
        let t = c(0.0, -0.7);
        let dense = expm_sparse(&op, t);
        let x = vec![c(1.0, 0.0), c(0.0, 1.0), c(0.5, -0.5)];
        let mut y = vec![ZERO; 3];
        dense_matvec(&dense, &x, &mut y);
        let mut v = x.clone();
        ExpmAction::new(op).apply(t, &mut v);
        for i in 0..3 {
            assert!((v[i] - y[i]).norm() < 1e-12);
        }
    }
}
