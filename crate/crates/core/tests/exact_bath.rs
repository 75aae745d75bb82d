// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! A single discrete bath level has the exponential correlation
//! `eta exp(-i w t)`, so the hierarchy is exact for it. These tests compare
//! the hierarchy against brute-force evolution of system plus bath level.

use dissipaton::algebra::{boson_ladder, SparseOperator};
use dissipaton::generator::{fermion_annihilators, Environment, SystemSpec, Truncation};
use dissipaton::heom::{BosonicHeom, FermionicHeom};
use dissipaton::linalg::expm;
use dissipaton::modes::{pair_conjugates, ExpMode, Sigma, PAIRING_TOLERANCE};
use dissipaton::propagate::{Rk4, Stepper};
use dissipaton::Complex64;
use ndarray::Array2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Evolves `rho` under `h` for time `t` and traces out the trailing factor
/// of dimension `db`.
fn exact_reduced(h: &SparseOperator, rho: &Array2<Complex64>, t: f64, db: usize) -> Array2<Complex64> {
    let u = expm(&h.to_dense().mapv(|v| v * c(0.0, -t)));
    let ud = u.t().mapv(|v| v.conj());
    let r = u.dot(rho).dot(&ud);
    let ds = rho.nrows() / db;
    Array2::from_shape_fn((ds, ds), |(i, j)| (0..db).map(|b| r[[i * db + b, j * db + b]]).sum())
}

fn run<F: Fn(&[Complex64], &mut [Complex64])>(rhs: F, mut y: Vec<Complex64>, dt: f64, steps: usize) -> Vec<Complex64> {
    let mut st = Rk4::new(rhs, y.len(), dt);
    for _ in 0..steps {
        st.step(&mut y);
    }
    y
}

#[test]
fn bosonic_hierarchy_matches_discrete_oscillator() {
    let (w, g, nbar) = (1.3, 0.35, 0.25);
    let sz = SparseOperator::diagonal(&[c(-1.0, 0.0), c(1.0, 0.0)]);
    let sx = SparseOperator::from_triplets(2, vec![(0, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))]).unwrap();
    let hs = sz.scale(c(0.5, 0.0)).add(&sx.scale(c(0.7, 0.0))).unwrap();

    let modes = pair_conjugates(
        vec![
            ExpMode::boson(c(g * g * (nbar + 1.0), 0.0), c(0.0, w)),
            ExpMode::boson(c(g * g * nbar, 0.0), c(0.0, -w)),
        ],
        PAIRING_TOLERANCE,
    )
    .unwrap();
    let sys = SystemSpec::bosonic(hs.clone(), vec![("b".into(), sz.clone())]);
    let envs = vec![Environment {
        label: "b".into(),
        modes,
    }];
    let heom = BosonicHeom::new(
        &sys,
        &envs,
        Truncation {
            n_max: 12,
            tier_cap: Some(12),
        },
        true,
    )
    .unwrap();
    let rho_s = [c(0.2, 0.0), c(0.1, 0.3), c(0.1, -0.3), c(0.8, 0.0)];
    let (t, dt) = (3.0, 0.005);
    let y = run(
        |x, o| heom.rhs(x, o),
        heom.initial_state(&rho_s).unwrap(),
        dt,
        (t / dt) as usize,
    );
    let got = heom.system_block(&y);

    let nb = 30;
    let (a, ad) = boson_ladder(nb - 1);
    let id_s = SparseOperator::identity(2);
    let id_b = SparseOperator::identity(nb);
    let h = hs
        .kron(&id_b)
        .add(&id_s.kron(&ad.matmul(&a).unwrap().scale(c(w, 0.0))))
        .unwrap()
        .add(&sz.kron(&a.add(&ad).unwrap()).scale(c(g, 0.0)))
        .unwrap();
    let q = nbar / (nbar + 1.0);
    let thermal = Array2::from_shape_fn((nb, nb), |(i, j)| {
        if i == j {
            c((1.0 - q) * q.powi(i as i32), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let rs = Array2::from_shape_vec((2, 2), rho_s.to_vec()).unwrap();
    let mut rho = Array2::zeros((2 * nb, 2 * nb));
    for i in 0..2 {
        for j in 0..2 {
            for b in 0..nb {
                rho[[i * nb + b, j * nb + b]] = rs[[i, j]] * thermal[[b, b]];
            }
        }
    }
    let want = exact_reduced(&h, &rho, t, nb);
    for i in 0..2 {
        for j in 0..2 {
            let diff = (got[i * 2 + j] - want[[i, j]]).norm();
            assert!(diff < 1e-6, "({i},{j}) {} vs {} ", got[i * 2 + j], want[[i, j]]);
        }
    }
}

#[test]
fn fermionic_hierarchy_matches_discrete_levels() {
    // Two system spin orbitals with on-site repulsion, each hybridized with
    // its own bath level of energy eb and thermal occupation f.
    let (e0, u, eb, v, f) = (-0.4, 1.1, 0.6, 0.45, 0.3);
    let cs = fermion_annihilators(2);
    let n: Vec<_> = cs.iter().map(|a| a.adjoint().matmul(a).unwrap()).collect();
    let hs = n[0]
        .add(&n[1])
        .unwrap()
        .scale(c(e0, 0.0))
        .add(&n[0].matmul(&n[1]).unwrap().scale(c(u, 0.0)))
        .unwrap()
        // a spin-flip term makes the test sensitive to cross-orbital signs
        .add(
            &cs[0]
                .adjoint()
                .matmul(&cs[1])
                .unwrap()
                .add(&cs[1].adjoint().matmul(&cs[0]).unwrap())
                .unwrap()
                .scale(c(0.3, 0.0)),
        )
        .unwrap();
    let modes = pair_conjugates(
        vec![
            ExpMode::fermion(c(v * v * f, 0.0), c(0.0, -eb), Sigma::Plus),
            ExpMode::fermion(c(v * v * (1.0 - f), 0.0), c(0.0, eb), Sigma::Minus),
        ],
        PAIRING_TOLERANCE,
    )
    .unwrap();
    let sys = SystemSpec::fermionic(2, hs, vec![("up".into(), cs[0].clone()), ("dn".into(), cs[1].clone())]);
    let envs = vec![
        Environment {
            label: "up".into(),
            modes: modes.clone(),
        },
        Environment {
            label: "dn".into(),
            modes,
        },
    ];
    let heom = FermionicHeom::new(&sys, &envs).unwrap();
    // initial state: mixture of |10> and |11> (even and odd parity sectors)
    let mut rho_s = vec![c(0.0, 0.0); 16];
    rho_s[2 * 4 + 2] = c(0.4, 0.0);
    rho_s[3 * 4 + 3] = c(0.6, 0.0);
    let (t, dt) = (2.5, 0.005);
    let y = run(
        |x, o| heom.rhs(x, o),
        heom.initial_state(&rho_s).unwrap(),
        dt,
        (t / dt) as usize,
    );
    let got = heom.system_block(&y);

    // full space orbitals: (s_up, s_dn, b_up, b_dn)
    let all = fermion_annihilators(4);
    let num = |a: &SparseOperator| a.adjoint().matmul(a).unwrap();
    let hop = |s: &SparseOperator, b: &SparseOperator| {
        s.adjoint()
            .matmul(b)
            .unwrap()
            .add(&b.adjoint().matmul(s).unwrap())
            .unwrap()
    };
    let h = num(&all[0])
        .add(&num(&all[1]))
        .unwrap()
        .scale(c(e0, 0.0))
        .add(&num(&all[0]).matmul(&num(&all[1])).unwrap().scale(c(u, 0.0)))
        .unwrap()
        .add(&hop(&all[0], &all[1]).scale(c(0.3, 0.0)))
        .unwrap()
        .add(&num(&all[2]).add(&num(&all[3])).unwrap().scale(c(eb, 0.0)))
        .unwrap()
        .add(
            &hop(&all[0], &all[2])
                .add(&hop(&all[1], &all[3]))
                .unwrap()
                .scale(c(v, 0.0)),
        )
        .unwrap();
    let bath = [c(1.0 - f, 0.0), c(f, 0.0)];
    let mut rho = Array2::zeros((16, 16));
    for s in 0..4 {
        for b in 0..4 {
            let p = bath[b >> 1] * bath[b & 1];
            rho[[s * 4 + b, s * 4 + b]] = rho_s[s * 4 + s] * p;
        }
    }
    let want = exact_reduced(&h, &rho, t, 4);
    for i in 0..4 {
        for j in 0..4 {
            let diff = (got[i * 4 + j] - want[[i, j]]).norm();
            assert!(diff < 1e-8, "({i},{j}) {} vs {}", got[i * 4 + j], want[[i, j]]);
        }
    }
}
