// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

use dissipaton::algebra::SparseOperator;
use dissipaton::generator::{
    build_lambda_bosonic, build_lambda_fermionic, fermion_annihilators, Environment, Generator, JwOrdering, SystemSpec,
    Truncation,
};
use dissipaton::heom::{BosonicHeom, FermionicHeom};
use dissipaton::modes::{pair_conjugates, ExpMode, Sigma, PAIRING_TOLERANCE};
use dissipaton::propagate::{Rk4, Stepper};
use dissipaton::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn run_generator(gen: &Generator, y0: Vec<Complex64>, dt: f64, steps: usize) -> Vec<Complex64> {
    let rate = gen.rate();
    let mut st = Rk4::new(|x: &[Complex64], y: &mut [Complex64]| rate.matvec(x, y), y0.len(), dt);
    let mut y = y0;
    for _ in 0..steps {
        st.step(&mut y);
    }
    y
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

fn spin_boson() -> (SystemSpec, Vec<Environment>) {
    let sz = SparseOperator::diagonal(&[c(-1.0, 0.0), c(1.0, 0.0)]);
    let sx = SparseOperator::from_triplets(2, vec![(0, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))]).unwrap();
    let modes = pair_conjugates(
        vec![
            ExpMode::boson(c(0.497, 0.082), c(0.5, 0.866)),
            ExpMode::boson(c(0.035, -0.082), c(0.5, -0.866)),
            ExpMode::boson(c(-0.032, 0.0), c(3.873, 0.0)),
        ],
        PAIRING_TOLERANCE,
    )
    .unwrap();
    (
        SystemSpec::bosonic(sz.add(&sx).unwrap(), vec![("bath".into(), sz)]),
        vec![Environment {
            label: "bath".into(),
            modes,
        }],
    )
}

#[test]
fn bosonic_generator_matches_hierarchy() {
    let (sys, envs) = spin_boson();
    for trunc in [
        Truncation::per_mode(3),
        Truncation {
            n_max: 3,
            tier_cap: Some(4),
        },
    ] {
        let gen = build_lambda_bosonic(&sys, &envs, trunc).unwrap();
        for scaled in [false, true] {
            let heom = BosonicHeom::new(&sys, &envs, trunc, scaled).unwrap();
            let rho0 = [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
            let mut h = heom.initial_state(&rho0).unwrap();
            let mut st = Rk4::new(|x: &[Complex64], y: &mut [Complex64]| heom.rhs(x, y), h.len(), 0.01);
            for _ in 0..100 {
                st.step(&mut h);
            }
            let mapped = heom.to_rdt(&h, &gen.layout).unwrap();
            let mut y0 = vec![c(0.0, 0.0); gen.layout.dim()];
            y0[gen.layout.index(1, 1, 0)] = c(1.0, 0.0);
            let y = run_generator(&gen, y0, 0.01, 100);
            let diff = max_diff(&mapped, &y);
            assert!(diff < 1e-11, "scaled={scaled} trunc={trunc:?} diff={diff}");
        }
    }
}

fn siam() -> (SystemSpec, Vec<Environment>, SparseOperator) {
    let cs = fermion_annihilators(2);
    let n: Vec<_> = cs.iter().map(|a| a.adjoint().matmul(a).unwrap()).collect();
    let h = n[0]
        .add(&n[1])
        .unwrap()
        .scale(c(-0.5, 0.0))
        .add(&n[0].matmul(&n[1]).unwrap())
        .unwrap();
    let table = |sigma| {
        vec![
            ExpMode::fermion(c(0.062, -0.038), c(1.0, 0.0), sigma),
            ExpMode::fermion(c(0.0, -0.037), c(0.393, 0.0), sigma),
            ExpMode::fermion(c(0.0, 0.075), c(1.630, 0.0), sigma),
        ]
    };
    let mut modes = table(Sigma::Plus);
    modes.extend(table(Sigma::Minus));
    let set = pair_conjugates(modes, PAIRING_TOLERANCE).unwrap();
    let sys = SystemSpec::fermionic(2, h, vec![("up".into(), cs[0].clone()), ("down".into(), cs[1].clone())]);
    let parity = sys.parity.clone().unwrap();
    (
        sys,
        vec![
            Environment {
                label: "up".into(),
                modes: set.clone(),
            },
            Environment {
                label: "down".into(),
                modes: set,
            },
        ],
        parity,
    )
}

#[test]
fn fermionic_generator_matches_hierarchy() {
    let (sys, envs, parity) = siam();
    let heom = FermionicHeom::new(&sys, &envs).unwrap();
    let mut rho0 = vec![c(0.0, 0.0); 16];
    rho0[15] = c(1.0, 0.0);
    let mut h = heom.initial_state(&rho0).unwrap();
    let mut st = Rk4::new(|x: &[Complex64], y: &mut [Complex64]| heom.rhs(x, y), h.len(), 0.01);
    for _ in 0..50 {
        st.step(&mut h);
    }
    for ordering in [JwOrdering::SystemFirst, JwOrdering::ModesFirst] {
        let gen = build_lambda_fermionic(&sys, &envs, ordering).unwrap();
        let mapped = heom.to_rdt(&h, &gen.layout, &parity).unwrap();
        let mut y0 = vec![c(0.0, 0.0); gen.layout.dim()];
        y0[gen.layout.index(3, 3, 0)] = c(1.0, 0.0);
        let y = run_generator(&gen, y0, 0.01, 50);
        let diff = max_diff(&mapped, &y);
        assert!(diff < 1e-11, "{ordering:?} diff={diff}");
    }
}

#[test]
fn pseudomode_path_matches_generator() {
    use dissipaton::pseudomode::{build_pseudomode_generator, extract_rdt};
    let sz = SparseOperator::diagonal(&[c(-1.0, 0.0), c(1.0, 0.0)]);
    let sx = SparseOperator::from_triplets(2, vec![(0, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))]).unwrap();
    let modes = pair_conjugates(
        vec![
            ExpMode::boson(c(0.04, 0.0), c(1.0, 0.0)),
            ExpMode::boson(c(0.02, 0.0), c(2.5, 0.0)),
        ],
        PAIRING_TOLERANCE,
    )
    .unwrap();
    let sys = SystemSpec::bosonic(sz.add(&sx).unwrap(), vec![("b".into(), sz)]);
    let envs = vec![Environment {
        label: "b".into(),
        modes,
    }];
    let gen = build_lambda_bosonic(&sys, &envs, Truncation::per_mode(6)).unwrap();
    let pg = build_pseudomode_generator(&sys, &envs, 8).unwrap();
    let rho0 = [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
    let p = run_generic(&pg.rate, pg.initial_state(&rho0).unwrap(), 0.005, 400);
    let mapped = extract_rdt(&pg, &p, &gen.layout).unwrap();
    let mut y0 = vec![c(0.0, 0.0); gen.layout.dim()];
    y0[gen.layout.index(1, 1, 0)] = c(1.0, 0.0);
    let y = run_generator(&gen, y0, 0.005, 400);
    let diff = max_diff(&mapped.data[..], &y);
    eprintln!("pseudomode diff {diff:e}");
    assert!(diff < 1e-6);
}

fn run_generic(rate: &SparseOperator, mut y: Vec<Complex64>, dt: f64, steps: usize) -> Vec<Complex64> {
    let mut st = Rk4::new(|x: &[Complex64], o: &mut [Complex64]| rate.matvec(x, o), y.len(), dt);
    for _ in 0..steps {
        st.step(&mut y);
    }
    y
}
