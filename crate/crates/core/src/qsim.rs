// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Statevector simulation of the dissipaton dynamics as a quantum circuit.
//!
//! The reduced density tensor is stored as amplitudes of a data register
//! plus one ancilla. Each step splits `Lambda = Lambda0 + Lambda1` into
//! Hermitian and anti-Hermitian parts, applies `U0 = exp(-i Lambda0 dt)`,
//! and realizes the non-unitary `exp(-i Lambda1 dt)` as the combination
//! `(U+ + U-) / (2 eps)` of the two unitaries
//! `U± = ±i exp(∓i eps (I - i Lambda1 dt))` selected by the ancilla.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::SparseOperator;
use crate::error::{Error, Result};
use crate::generator::{Generator, RdtLayout};
use crate::linalg::{dense_matvec, expm_sparse, ExpmAction};
use crate::modes::Statistics;
use crate::propagate::{check_finite, RdtState, DENSE_LIMIT};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn bits_for(levels: usize) -> usize {
    if levels <= 1 {
        0
    } else {
        (usize::BITS - (levels - 1).leading_zeros()) as usize
    }
}

/// Qubit registers of a layout and the map from tensor index to the data
/// register basis index. Qubit `q` is bit `q` of the basis index; the ket
/// system register is most significant, then the bra register, then the
/// dissipaton fields in mode order. The ancilla sits above the data qubits.
#[derive(Clone, Debug)]
pub struct RegisterLayout {
    /// Qubits for each side of the system density matrix.
    pub system_qubits: usize,
    /// Qubits per dissipaton field (bosonic: one field per mode;
    /// fermionic: `sigma = -` modes then `sigma = +` modes, one qubit each).
    pub fields: Vec<usize>,
    pub data_qubits: usize,
    map: Vec<usize>,
}

impl RegisterLayout {
    pub fn new(layout: &RdtLayout) -> Self {
        let d = layout.system_dim;
        let sq = bits_for(d);
        let (fields, field_bits): (Vec<usize>, usize) = match layout.statistics {
            Statistics::Bosonic => {
                let f: Vec<usize> = layout.fock.caps().iter().map(|&c| bits_for(c + 1)).collect();
                let total = f.iter().sum();
                (f, total)
            }
            Statistics::Fermionic => {
                let k = layout.n_modes();
                (vec![1; 2 * k], 2 * k)
            }
        };
        let encode_config = |c: usize| -> usize {
            match layout.statistics {
                Statistics::Bosonic => {
                    let occ = layout.fock.config(c);
                    occ.iter()
                        .zip(&fields)
                        .fold(0usize, |acc, (&n, &b)| (acc << b) | n as usize)
                }
                // m * 2^K + n is already the concatenation of the two registers
                Statistics::Fermionic => c,
            }
        };
        let big_d = layout.dissipaton_dim();
        let mut map = Vec::with_capacity(layout.dim());
        for i in 0..d {
            for j in 0..d {
                for c in 0..big_d {
                    map.push((((i << sq) | j) << field_bits) | encode_config(c));
                }
            }
        }
        Self {
            system_qubits: sq,
            fields,
            data_qubits: 2 * sq + field_bits,
            map,
        }
    }

    /// Data qubits plus the ancilla.
    pub fn total_qubits(&self) -> usize {
        self.data_qubits + 1
    }

    pub fn data_dim(&self) -> usize {
        1 << self.data_qubits
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Places a tensor-space operator on the data register.
    pub fn pad(&self, op: &SparseOperator) -> Result<SparseOperator> {
        op.embed(self.data_dim(), &self.map)
    }
}

/// Normalized amplitudes over data qubits plus ancilla, with the norm
/// `z` of the encoded tensor kept separately.
#[derive(Clone, Debug)]
pub struct QubitState {
    pub amps: Vec<Complex64>,
    pub z: f64,
    pub data_qubits: usize,
}

impl QubitState {
    pub fn ancilla_zero(&self) -> &[Complex64] {
        &self.amps[..1 << self.data_qubits]
    }
}

pub fn encode_rdt(reg: &RegisterLayout, state: &RdtState) -> Result<QubitState> {
    if state.dim() != reg.map.len() {
        return Err(Error::DimensionMismatch {
            expected: reg.map.len(),
            found: state.dim(),
        });
    }
    let z = state.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if z == 0.0 || !z.is_finite() {
        return Err(Error::ZeroState);
    }
    let mut amps = vec![ZERO; 2 << reg.data_qubits];
    for (i, &v) in state.data.iter().enumerate() {
        amps[reg.map[i]] = v / z;
    }
    Ok(QubitState {
        amps,
        z,
        data_qubits: reg.data_qubits,
    })
}

pub fn decode_rdt(reg: &RegisterLayout, layout: &RdtLayout, qs: &QubitState) -> Result<RdtState> {
    let data: Vec<Complex64> = reg.map.iter().map(|&k| qs.amps[k] * qs.z).collect();
    RdtState::from_data(layout, data)
}

/// `(Lambda0, Lambda1)` with `Lambda0 = (Lambda + Lambda^+)/2` Hermitian and
/// `Lambda1 = (Lambda - Lambda^+)/2` anti-Hermitian.
pub fn split_generator(lambda: &SparseOperator) -> (SparseOperator, SparseOperator) {
    let adj = lambda.adjoint();
    let half = Complex64::new(0.5, 0.0);
    (
        lambda.lin_comb(half, &adj, half).expect("same dimension"),
        lambda.lin_comb(half, &adj, -half).expect("same dimension"),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// `U0` and `exp(∓eps Lambda1 dt)` evaluated exactly.
    #[default]
    Exact,
    /// First-order product over the generator's per-mode terms.
    Trotter,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcuConfig {
    pub epsilon: f64,
    pub dt: f64,
    #[serde(default)]
    pub backend: Backend,
    /// Sample ancilla outcomes and count repetitions until success.
    #[serde(default)]
    pub sampled: bool,
    #[serde(default)]
    pub seed: u64,
}

impl LcuConfig {
    pub fn new(epsilon: f64, dt: f64) -> Self {
        Self {
            epsilon,
            dt,
            backend: Backend::Exact,
            sampled: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < std::f64::consts::FRAC_PI_2) {
            return Err(Error::invalid("epsilon", "must lie in (0, pi/2)"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        Ok(())
    }
}

/// A unitary on the data register.
enum DataUnitary {
    Dense(Array2<Complex64>),
    /// `phase * exp(t A)` applied through the Taylor action.
    Action {
        action: ExpmAction,
        t: Complex64,
        phase: Complex64,
    },
    /// Ordered product of exponentials, the first entry applied first.
    Product {
        factors: Vec<(ExpmAction, Complex64)>,
        phase: Complex64,
    },
}

impl DataUnitary {
    fn exp(op: &SparseOperator, t: Complex64, phase: Complex64) -> Self {
        if op.dim() <= DENSE_LIMIT {
            DataUnitary::Dense(expm_sparse(op, t).mapv(|v| v * phase))
        } else {
            DataUnitary::Action {
                action: ExpmAction::new(op.clone()),
                t,
                phase,
            }
        }
    }

    fn apply(&self, v: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        match self {
            DataUnitary::Dense(m) => {
                scratch.resize(v.len(), ZERO);
                dense_matvec(m, v, scratch);
                v.copy_from_slice(scratch);
            }
            DataUnitary::Action { action, t, phase } => {
                scratch.clear();
                scratch.extend_from_slice(v);
                action.apply(*t, scratch);
                for (o, s) in v.iter_mut().zip(scratch.iter()) {
                    *o = s * phase;
                }
            }
            DataUnitary::Product { factors, phase } => {
                scratch.clear();
                scratch.extend_from_slice(v);
                for (a, t) in factors {
                    a.apply(*t, scratch);
                }
                for (o, s) in v.iter_mut().zip(scratch.iter()) {
                    *o = s * phase;
                }
            }
        }
    }
}

/// Compiled single-step circuit.
pub struct LcuCircuit {
    pub registers: RegisterLayout,
    pub config: LcuConfig,
    u0: DataUnitary,
    u_plus: DataUnitary,
    u_minus: DataUnitary,
    term_names: Vec<String>,
}

impl LcuCircuit {
    pub fn new(gen: &Generator, config: LcuConfig) -> Result<Self> {
        config.validate()?;
        let registers = RegisterLayout::new(&gen.layout);
        let (eps, dt) = (config.epsilon, config.dt);
        let p_plus = I * Complex64::new(0.0, -eps).exp();
        let p_minus = -I * Complex64::new(0.0, eps).exp();
        let (u0, u_plus, u_minus, term_names) = match config.backend {
            Backend::Exact => {
                let (l0, l1) = split_generator(&gen.lambda);
                let (l0, l1) = (registers.pad(&l0)?, registers.pad(&l1)?);
                (
                    DataUnitary::exp(&l0, Complex64::new(0.0, -dt), Complex64::new(1.0, 0.0)),
                    DataUnitary::exp(&l1, Complex64::new(-eps * dt, 0.0), p_plus),
                    DataUnitary::exp(&l1, Complex64::new(eps * dt, 0.0), p_minus),
                    vec!["Lambda".to_string()],
                )
            }
            Backend::Trotter => {
                let mut f0 = Vec::new();
                let mut fp = Vec::new();
                let mut fm = Vec::new();
                let mut names = Vec::new();
                for term in &gen.terms {
                    let (h, a) = split_generator(&term.op);
                    names.push(term.name.clone());
                    if h.nnz() > 0 {
                        f0.push((ExpmAction::new(registers.pad(&h)?), Complex64::new(0.0, -dt)));
                    }
                    if a.nnz() > 0 {
                        let a = ExpmAction::new(registers.pad(&a)?);
                        fp.push((a.clone(), Complex64::new(-eps * dt, 0.0)));
                        fm.push((a, Complex64::new(eps * dt, 0.0)));
                    }
                }
                (
                    DataUnitary::Product {
                        factors: f0,
                        phase: Complex64::new(1.0, 0.0),
                    },
                    DataUnitary::Product {
                        factors: fp,
                        phase: p_plus,
                    },
                    DataUnitary::Product {
                        factors: fm,
                        phase: p_minus,
                    },
                    names,
                )
            }
        };
        Ok(Self {
            registers,
            config,
            u0,
            u_plus,
            u_minus,
            term_names,
        })
    }

    /// Applies one step. Returns the probability of the ancilla reading 0.
    pub fn step(&self, qs: &mut QubitState, step: usize, scratch: &mut Vec<Complex64>) -> Result<f64> {
        let half = 1usize << qs.data_qubits;
        // Hadamard on the ancilla
        apply_ancilla(
            &mut qs.amps,
            half,
            [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]],
        );
        let (zero, one) = qs.amps.split_at_mut(half);
        self.u0.apply(zero, scratch);
        self.u0.apply(one, scratch);
        self.u_plus.apply(zero, scratch);
        self.u_minus.apply(one, scratch);
        // RY(-pi/2) = [[c, s], [-s, c]]
        apply_ancilla(
            &mut qs.amps,
            half,
            [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [-FRAC_1_SQRT_2, FRAC_1_SQRT_2]],
        );
        let (zero, one) = qs.amps.split_at_mut(half);
        let p0: f64 = zero.iter().map(|v| v.norm_sqr()).sum();
        let norm = p0.sqrt();
        if !(norm > 1e-12) {
            return Err(Error::VanishingProjection { step, norm });
        }
        for v in zero.iter_mut() {
            *v /= norm;
        }
        one.iter_mut().for_each(|v| *v = ZERO);
        qs.z *= norm / self.config.epsilon;
        check_finite(zero, step as f64 * self.config.dt)?;
        Ok(p0)
    }

    /// Human-readable gate list of one step.
    pub fn describe(&self, steps: usize) -> String {
        let reg = &self.registers;
        let anc = reg.data_qubits;
        let data = format!("q[0..{}]", reg.data_qubits.saturating_sub(1));
        let mut out = String::new();
        let _ = writeln!(out, "# qubits: {} data + 1 ancilla (q[{anc}])", reg.data_qubits);
        let _ = writeln!(
            out,
            "# registers: system {} + {} qubits, dissipaton fields {:?}",
            reg.system_qubits, reg.system_qubits, reg.fields
        );
        let _ = writeln!(
            out,
            "# epsilon = {}, dt = {}, backend = {:?}",
            self.config.epsilon, self.config.dt, self.config.backend
        );
        let _ = writeln!(out, "# one step, repeated {steps} times");
        let _ = writeln!(out, "H q[{anc}]");
        match self.config.backend {
            Backend::Exact => {
                let _ = writeln!(out, "U0 {data} = exp(-i Lambda0 dt)");
                let _ = writeln!(
                    out,
                    "C0-Uplus ctrl=q[{anc}]==0 {data} = +i exp(-i eps (I - i Lambda1 dt))"
                );
                let _ = writeln!(
                    out,
                    "C1-Uminus ctrl=q[{anc}]==1 {data} = -i exp(+i eps (I - i Lambda1 dt))"
                );
            }
            Backend::Trotter => {
                for name in &self.term_names {
                    let _ = writeln!(out, "U0[{name}] {data} = exp(-i Lambda0[{name}] dt)");
                }
                for name in &self.term_names {
                    let _ = writeln!(
                        out,
                        "C0-Uplus[{name}] ctrl=q[{anc}]==0 {data} = exp(-eps Lambda1[{name}] dt)"
                    );
                }
                let _ = writeln!(out, "C0-PHASE ctrl=q[{anc}]==0 = +i exp(-i eps)");
                for name in &self.term_names {
                    let _ = writeln!(
                        out,
                        "C1-Uminus[{name}] ctrl=q[{anc}]==1 {data} = exp(+eps Lambda1[{name}] dt)"
                    );
                }
                let _ = writeln!(out, "C1-PHASE ctrl=q[{anc}]==1 = -i exp(+i eps)");
            }
        }
        let _ = writeln!(out, "RY(-pi/2) q[{anc}]");
        let _ = writeln!(out, "MEASURE q[{anc}] -> postselect 0");
        out
    }
}

fn apply_ancilla(amps: &mut [Complex64], half: usize, g: [[f64; 2]; 2]) {
    let (zero, one) = amps.split_at_mut(half);
    for (a, b) in zero.iter_mut().zip(one.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = x * g[0][0] + y * g[0][1];
        *b = x * g[1][0] + y * g[1][1];
    }
}

/// One LCU step on an encoded state.
pub fn lcu_step(circuit: &LcuCircuit, qs: &mut QubitState) -> Result<f64> {
    let mut scratch = Vec::new();
    circuit.step(qs, 0, &mut scratch)
}

/// Bookkeeping of a circuit run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LcuStats {
    pub steps: usize,
    /// Smallest per-step success probability.
    pub min_success: f64,
    /// Total circuit repetitions in sampled mode.
    pub shots: u64,
}

/// Propagates `state` for `t_final` with the compiled circuit, calling
/// `observe` with the decoded tensor at `t = 0` and every `stride` steps.
pub fn run_lcu_with<O>(
    gen: &Generator,
    state: &RdtState,
    config: LcuConfig,
    t_final: f64,
    stride: usize,
    mut observe: O,
) -> Result<LcuStats>
where
    O: FnMut(f64, &RdtState) -> Result<()>,
{
    if stride == 0 {
        return Err(Error::invalid("stride", "must be at least 1"));
    }
    if !(t_final >= 0.0) {
        return Err(Error::invalid("t_final", "must be non-negative"));
    }
    let circuit = LcuCircuit::new(gen, config)?;
    let mut qs = encode_rdt(&circuit.registers, state)?;
    observe(0.0, &decode_rdt(&circuit.registers, &gen.layout, &qs)?)?;
    let n_steps = (t_final / config.dt).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut stats = LcuStats {
        steps: n_steps,
        min_success: 1.0,
        shots: 0,
    };
    let mut scratch = Vec::new();
    for s in 1..=n_steps {
        let p0 = circuit.step(&mut qs, s, &mut scratch)?;
        stats.min_success = stats.min_success.min(p0);
        if config.sampled {
            // repetitions until the ancilla first reads 0
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let reps = if p0 >= 1.0 {
                1.0
            } else {
                (u.ln() / (1.0 - p0).ln()).ceil().max(1.0)
            };
            stats.shots += reps as u64;
        } else {
            stats.shots += 1;
        }
        if s % stride == 0 {
            observe(s as f64 * config.dt, &decode_rdt(&circuit.registers, &gen.layout, &qs)?)?;
        }
    }
    Ok(stats)
}

/// Decoded trajectory of a circuit run.
pub fn run_lcu(
    gen: &Generator,
    state: &RdtState,
    config: LcuConfig,
    t_final: f64,
    stride: usize,
) -> Result<(Vec<f64>, Vec<RdtState>, LcuStats)> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let stats = run_lcu_with(gen, state, config, t_final, stride, |t, s| {
        times.push(t);
        states.push(s.clone());
        Ok(())
    })?;
    Ok((times, states, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{build_lambda_bosonic, Environment, SystemSpec, Truncation};
    use crate::modes::{pair_conjugates, ExpMode, PAIRING_TOLERANCE};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small_generator(eta: Complex64) -> Generator {
        let sz = SparseOperator::diagonal(&[c(-1.0, 0.0), c(1.0, 0.0)]);
        let sx = SparseOperator::from_triplets(2, vec![(0, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))]).unwrap();
        let modes = pair_conjugates(vec![ExpMode::boson(eta, c(1.0, 0.0))], PAIRING_TOLERANCE).unwrap();
        let sys = SystemSpec::bosonic(sz.add(&sx).unwrap(), vec![("b".into(), sz)]);
        build_lambda_bosonic(
            &sys,
            &[Environment {
                label: "b".into(),
                modes,
            }],
            Truncation::per_mode(2),
        )
        .unwrap()
    }

    #[test]
    fn register_counts() {
        let gen = small_generator(c(0.5, 0.0));
        let reg = RegisterLayout::new(&gen.layout);
        assert_eq!(reg.system_qubits, 1);
        assert_eq!(reg.fields, vec![2]);
        assert_eq!(reg.total_qubits(), 5);
        let mut seen = reg.map().to_vec();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), gen.layout.dim());
    }

    #[test]
    fn encode_decode_round_trip() {
        let gen = small_generator(c(0.5, 0.0));
        let reg = RegisterLayout::new(&gen.layout);
        let data: Vec<_> = (0..gen.layout.dim())
            .map(|i| c(i as f64 * 0.1, 1.0 - i as f64 * 0.05))
            .collect();
        let st = RdtState::from_data(&gen.layout, data).unwrap();
        let qs = encode_rdt(&reg, &st).unwrap();
        let norm: f64 = qs.amps.iter().map(|v| v.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-14);
        let back = decode_rdt(&reg, &gen.layout, &qs).unwrap();
        assert!(back.max_abs_diff(&st) < 1e-14);
        let zero = RdtState::from_data(&gen.layout, vec![ZERO; gen.layout.dim()]).unwrap();
        assert_eq!(encode_rdt(&reg, &zero).unwrap_err(), Error::ZeroState);
    }

    #[test]
    fn split_parts() {
        let gen = small_generator(c(0.5, 0.2));
        let (l0, l1) = split_generator(&gen.lambda);
        assert!(l0.is_hermitian(1e-14));
        assert!(l1.adjoint().lin_comb(c(1.0, 0.0), &l1, c(1.0, 0.0)).unwrap().max_abs() < 1e-14);
        assert!(l0.add(&l1).unwrap().max_abs_diff(&gen.lambda).unwrap() < 1e-14);
        let diag = SparseOperator::diagonal(&[c(0.0, -1.0), c(0.0, -2.0)]);
        let (d0, d1) = split_generator(&diag);
        assert_eq!(d0.nnz(), 0);
        assert!(d1.max_abs_diff(&diag).unwrap() < 1e-15);
    }

    #[test]
    fn closed_system_step_is_unitary_evolution() {
        // With only the Hamiltonian term, the LCU branch is (sin eps / eps) I.
        let mut gen = small_generator(c(0.5, 0.0));
        gen.lambda = gen.terms[0].op.clone();
        gen.terms.truncate(1);
        let cfg = LcuConfig::new(0.1, 0.05);
        let circuit = LcuCircuit::new(&gen, cfg).unwrap();
        let mut rho = Array2::zeros((2, 2));
        rho[[1, 1]] = c(1.0, 0.0);
        let st = RdtState::product(&gen.layout, &rho).unwrap();
        let mut qs = encode_rdt(&circuit.registers, &st).unwrap();
        let z0 = qs.z;
        lcu_step(&circuit, &mut qs).unwrap();
        assert!((qs.z / z0 - (0.1f64).sin() / 0.1).abs() < 1e-13);
        let got = decode_rdt(&circuit.registers, &gen.layout, &qs).unwrap();
        let mut want = st.data.clone();
        ExpmAction::new(gen.rate()).apply(c(0.05, 0.0), &mut want);
        let scale = (0.1f64).sin() / 0.1;
        for (g, w) in got.data.iter().zip(&want) {
            assert!((g - w * scale).norm() < 1e-13);
        }
    }

    #[test]
    fn sampled_mode_is_reproducible() {
        let gen = small_generator(c(0.5, 0.1));
        let mut rho = Array2::zeros((2, 2));
        rho[[1, 1]] = c(1.0, 0.0);
        let st = RdtState::product(&gen.layout, &rho).unwrap();
        let cfg = LcuConfig {
            sampled: true,
            seed: 7,
            ..LcuConfig::new(0.05, 0.01)
        };
        let (_, a, sa) = run_lcu(&gen, &st, cfg, 0.2, 5).unwrap();
        let (_, b, sb) = run_lcu(&gen, &st, cfg, 0.2, 5).unwrap();
        assert_eq!(sa, sb);
        assert!(sa.shots > 20);
        assert_eq!(a, b);
        let (times, states, _) = run_lcu(&gen, &st, cfg, 0.0, 5).unwrap();
        assert_eq!(times, vec![0.0]);
        assert!(states[0].max_abs_diff(&st) < 1e-15);
    }
}
