// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Construction of the joint generator `Lambda` acting on the reduced
//! density tensor, for bosonic and fermionic environments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{boson_ladder, jw_ladder, lift_system_superop, number_operator, FockLayout, Side, SparseOperator};
use crate::error::{Error, Result};
use crate::modes::{dissipaton_coefficients, ModeSet, Statistics};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// System Hamiltonian plus the operators through which it couples to each
/// environment. Bosonic couplings are Hermitian operators `Q_u`; fermionic
/// couplings are the annihilators `c_u` of the coupled orbitals.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    pub hamiltonian: SparseOperator,
    pub couplings: Vec<(String, SparseOperator)>,
    pub statistics: Statistics,
    /// Fermion parity of the system Fock space; fermionic systems only.
    pub parity: Option<SparseOperator>,
}

impl SystemSpec {
    pub fn bosonic(hamiltonian: SparseOperator, couplings: Vec<(String, SparseOperator)>) -> Self {
        Self {
            hamiltonian,
            couplings,
            statistics: Statistics::Bosonic,
            parity: None,
        }
    }

    /// Fermionic system of `n_orbitals` orbitals in the occupation basis,
    /// orbital 0 being the most significant bit.
    pub fn fermionic(n_orbitals: usize, hamiltonian: SparseOperator, couplings: Vec<(String, SparseOperator)>) -> Self {
        Self {
            hamiltonian,
            couplings,
            statistics: Statistics::Fermionic,
            parity: Some(FockLayout::fermionic(n_orbitals).parity()),
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn coupling(&self, label: &str) -> Option<&SparseOperator> {
        self.couplings.iter().find(|(l, _)| l == label).map(|(_, op)| op)
    }
}

/// Jordan-Wigner annihilators `c_0, ..., c_{n-1}` on `n` orbitals.
pub fn fermion_annihilators(n_orbitals: usize) -> Vec<SparseOperator> {
    let layout = FockLayout::fermionic(n_orbitals);
    (0..n_orbitals)
        .map(|u| jw_ladder(&layout, u).expect("site in range"))
        .collect()
}

/// Exponential modes of the environment attached to coupling `label`.
#[derive(Clone, Debug)]
pub struct Environment {
    pub label: String,
    pub modes: ModeSet,
}

/// Order of the fermionic Jordan-Wigner string over the joint space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JwOrdering {
    /// System orbitals precede the dissipaton modes.
    #[default]
    SystemFirst,
    ModesFirst,
}

/// One flattened dissipaton mode.
#[derive(Clone, Debug)]
pub struct FlatMode {
    pub environment: usize,
    pub label: String,
    /// Index of the (bosonic) mode or (fermionic) mode pair within its set.
    pub index: usize,
    pub eta: Complex64,
    pub gamma: Complex64,
    pub zeta: Complex64,
    pub xi: Complex64,
    /// `conj(eta_kbar)` for bosons.
    pub eta_bar_conj: Complex64,
    /// Fermionic `sigma = -` branch: `(eta, gamma, zeta, xi)`.
    pub minus: Option<(Complex64, Complex64, Complex64, Complex64)>,
}

/// Index structure of the reduced density tensor.
///
/// Components are addressed as `(i * d + j) * D + c`, with `i`/`j` the
/// ket/bra system indices and `c` the dissipaton configuration. For
/// fermions `c = m * D1 + n` with `m` the `sigma = -` register (acting on
/// the ket) and `n` the `sigma = +` register (acting on the bra).
#[derive(Clone, Debug)]
pub struct RdtLayout {
    pub system_dim: usize,
    pub statistics: Statistics,
    pub fock: FockLayout,
    pub ordering: JwOrdering,
    pub modes: Vec<FlatMode>,
}

impl RdtLayout {
    pub fn dissipaton_dim(&self) -> usize {
        match self.statistics {
            Statistics::Bosonic => self.fock.dim(),
            Statistics::Fermionic => self.fock.dim() * self.fock.dim(),
        }
    }

    pub fn dim(&self) -> usize {
        self.system_dim * self.system_dim * self.dissipaton_dim()
    }

    pub fn index(&self, i: usize, j: usize, config: usize) -> usize {
        (i * self.system_dim + j) * self.dissipaton_dim() + config
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }
}

/// A named additive piece of `Lambda`.
#[derive(Clone, Debug)]
pub struct GeneratorTerm {
    pub name: String,
    pub op: SparseOperator,
}

/// `Lambda` with the additive pieces it was assembled from.
#[derive(Clone, Debug)]
pub struct Generator {
    pub layout: RdtLayout,
    pub lambda: SparseOperator,
    pub terms: Vec<GeneratorTerm>,
}

impl Generator {
    /// Rate operator `-i Lambda`, so that `d rho~/dt = rate rho~`.
    pub fn rate(&self) -> SparseOperator {
        self.lambda.scale(-I)
    }
}

/// Dissipaton space truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Truncation {
    /// Per-mode occupation cap for bosons; ignored for fermions.
    pub n_max: usize,
    /// Optional cap on the total bosonic occupation.
    pub tier_cap: Option<usize>,
}

impl Truncation {
    pub fn per_mode(n_max: usize) -> Self {
        Self { n_max, tier_cap: None }
    }
}

fn flatten(sys: &SystemSpec, envs: &[Environment]) -> Result<Vec<(usize, SparseOperator)>> {
    for (label, op) in &sys.couplings {
        if op.dim() != sys.dim() {
            return Err(Error::DimensionMismatch {
                expected: sys.dim(),
                found: op.dim(),
            });
        }
        if !envs.iter().any(|e| &e.label == label) {
            return Err(Error::MissingModeSet(label.clone()));
        }
    }
    let mut out = Vec::new();
    for (e, env) in envs.iter().enumerate() {
        let op = sys
            .coupling(&env.label)
            .ok_or_else(|| Error::MissingModeSet(env.label.clone()))?;
        if env.modes.statistics() != sys.statistics {
            return Err(Error::invalid(
                "statistics",
                format!("environment `{}` does not match the system statistics", env.label),
            ));
        }
        out.push((e, op.clone()));
    }
    Ok(out)
}

fn flat_modes(envs: &[Environment]) -> Result<Vec<FlatMode>> {
    let mut flat = Vec::new();
    for (e, env) in envs.iter().enumerate() {
        let set = &env.modes;
        let coeffs = dissipaton_coefficients(set)?;
        match set.statistics() {
            Statistics::Bosonic => {
                for (k, m) in set.modes().iter().enumerate() {
                    flat.push(FlatMode {
                        environment: e,
                        label: env.label.clone(),
                        index: k,
                        eta: m.eta,
                        gamma: m.gamma,
                        zeta: coeffs[k].zeta,
                        xi: coeffs[k].xi,
                        eta_bar_conj: set.modes()[set.partner(k)].eta.conj(),
                        minus: None,
                    });
                }
            }
            Statistics::Fermionic => {
                for (k, &(p, m)) in set.fermionic_pairs().iter().enumerate() {
                    let (mp, mm) = (set.modes()[p], set.modes()[m]);
                    flat.push(FlatMode {
                        environment: e,
                        label: env.label.clone(),
                        index: k,
                        eta: mp.eta,
                        gamma: mp.gamma,
                        zeta: coeffs[p].zeta,
                        xi: coeffs[p].xi,
                        eta_bar_conj: mm.eta.conj(),
                        minus: Some((mm.eta, mm.gamma, coeffs[m].zeta, coeffs[m].xi)),
                    });
                }
            }
        }
    }
    Ok(flat)
}

/// Builds `Lambda` for a bosonic system:
///
/// `Lambda = (H x I - I x H^T) x 1 - i sum_k gamma_k N_k
///   + sum_k (Q x I - I x Q^T) x zeta_k (b_k + b_k^+)
///   + i sum_k (Q x I + I x Q^T) x xi_k b_k^+`.
pub fn build_lambda_bosonic(sys: &SystemSpec, envs: &[Environment], trunc: Truncation) -> Result<Generator> {
    if sys.statistics != Statistics::Bosonic {
        return Err(Error::invalid("statistics", "expected a bosonic system"));
    }
    let couplings = flatten(sys, envs)?;
    let modes = flat_modes(envs)?;
    let fock = FockLayout::new(vec![trunc.n_max; modes.len()], trunc.tier_cap)?;
    let d = sys.dim();
    let big_d = fock.dim();
    let id_d = SparseOperator::identity(big_d);

    let h_left = lift_system_superop(&sys.hamiltonian, Side::Left);
    let h_right = lift_system_superop(&sys.hamiltonian, Side::Right);
    let mut terms = vec![GeneratorTerm {
        name: "system".to_string(),
        op: h_left.sub(&h_right)?.kron(&id_d),
    }];

    let (b_loc, bd_loc) = boson_ladder(trunc.n_max);
    let n_loc = number_operator(trunc.n_max);
    let id_sys2 = SparseOperator::identity(d * d);
    for (j, m) in modes.iter().enumerate() {
        let q = &couplings[m.environment].1;
        let ql = lift_system_superop(q, Side::Left);
        let qr = lift_system_superop(q, Side::Right);
        let b = fock.embed_operator(&b_loc, j)?;
        let bd = fock.embed_operator(&bd_loc, j)?;
        let n = fock.embed_operator(&n_loc, j)?;
        let decay = id_sys2.kron(&n.scale(-I * m.gamma));
        let comm = ql.sub(&qr)?.kron(&b.add(&bd)?.scale(m.zeta));
        let anti = ql.add(&qr)?.kron(&bd.scale(I * m.xi));
        terms.push(GeneratorTerm {
            name: format!("{}:{}", m.label, m.index),
            op: decay.add(&comm)?.add(&anti)?,
        });
    }
    let lambda = sum_terms(d * d * big_d, &terms)?;
    Ok(Generator {
        layout: RdtLayout {
            system_dim: d,
            statistics: Statistics::Bosonic,
            fock,
            ordering: JwOrdering::SystemFirst,
            modes,
        },
        lambda,
        terms,
    })
}

fn sum_terms(dim: usize, terms: &[GeneratorTerm]) -> Result<SparseOperator> {
    let mut acc = SparseOperator::zeros(dim);
    for t in terms {
        acc = acc.add(&t.op)?;
    }
    Ok(acc)
}

/// Operator `sys ⊗ modes` on the joint fermionic Fock space, stored as its
/// two factors.
#[derive(Clone, Debug)]
struct JointOp {
    sys: SparseOperator,
    modes: SparseOperator,
}

impl JointOp {
    fn mul(&self, other: &JointOp) -> Result<JointOp> {
        Ok(JointOp {
            sys: self.sys.matmul(&other.sys)?,
            modes: self.modes.matmul(&other.modes)?,
        })
    }

    fn adjoint(&self) -> JointOp {
        JointOp {
            sys: self.sys.adjoint(),
            modes: self.modes.adjoint(),
        }
    }
}

/// Superoperator `rho -> x rho y` in the `(i, j, m, n)` layout.
fn sandwich(x: &JointOp, y: &JointOp) -> SparseOperator {
    x.sys.kron(&y.sys.transpose()).kron(&x.modes).kron(&y.modes.transpose())
}

/// Builds `Lambda` for a fermionic system whose couplings are orbital
/// annihilators. Each mode pair `k` contributes
///
/// `-i (gamma-_k L(N_k) + gamma+_k R(N_k))
///  + zeta-_k (L(c+ b) - b . c+) + zeta+_k (c . b+ - R(b+ c))
///  + xi+_k c+ . b - conj(xi+_k) b+ . c - xi-_k L(c b+) + conj(xi-_k) R(b c+)`
///
/// where `x . y` denotes `rho -> x rho y`.
pub fn build_lambda_fermionic(sys: &SystemSpec, envs: &[Environment], ordering: JwOrdering) -> Result<Generator> {
    if sys.statistics != Statistics::Fermionic {
        return Err(Error::invalid("statistics", "expected a fermionic system"));
    }
    let parity = sys
        .parity
        .clone()
        .ok_or_else(|| Error::invalid("parity", "fermionic system needs a parity operator"))?;
    let couplings = flatten(sys, envs)?;
    let modes = flat_modes(envs)?;
    let fock = FockLayout::fermionic(modes.len());
    let d = sys.dim();
    let d1 = fock.dim();
    let id_s = SparseOperator::identity(d);
    let id_m = SparseOperator::identity(d1);
    let p_m = fock.parity();
    let ident = JointOp {
        sys: id_s.clone(),
        modes: id_m.clone(),
    };

    let h = JointOp {
        sys: sys.hamiltonian.clone(),
        modes: id_m.clone(),
    };
    let mut terms = vec![GeneratorTerm {
        name: "system".to_string(),
        op: sandwich(&h, &ident).sub(&sandwich(&ident, &h))?,
    }];

    for (j, m) in modes.iter().enumerate() {
        let c_sys = &couplings[m.environment].1;
        let beta = jw_ladder(&fock, j)?;
        let (c, b) = match ordering {
            JwOrdering::SystemFirst => (
                JointOp {
                    sys: c_sys.clone(),
                    modes: id_m.clone(),
                },
                JointOp {
                    sys: parity.clone(),
                    modes: beta,
                },
            ),
            JwOrdering::ModesFirst => (
                JointOp {
                    sys: c_sys.clone(),
                    modes: p_m.clone(),
                },
                JointOp {
                    sys: id_s.clone(),
                    modes: beta,
                },
            ),
        };
        let cd = c.adjoint();
        let bd = b.adjoint();
        let n = bd.mul(&b)?;
        let (_, gm, zm, xm) = m.minus.expect("fermionic modes carry both branches");
        let (gp, zp, xp) = (m.gamma, m.zeta, m.xi);

        let parts: [(Complex64, SparseOperator); 10] = [
            (-I * gm, sandwich(&n, &ident)),
            (-I * gp, sandwich(&ident, &n)),
            (zm, sandwich(&cd.mul(&b)?, &ident)),
            (-zm, sandwich(&b, &cd)),
            (zp, sandwich(&c, &bd)),
            (-zp, sandwich(&ident, &bd.mul(&c)?)),
            (xp, sandwich(&cd, &b)),
            (-xp.conj(), sandwich(&bd, &c)),
            (-xm, sandwich(&c.mul(&bd)?, &ident)),
            (xm.conj(), sandwich(&ident, &b.mul(&cd)?)),
        ];
        let mut op = SparseOperator::zeros(d * d * d1 * d1);
        for (w, part) in parts {
            op = op.lin_comb(ONE, &part, w)?;
        }
        terms.push(GeneratorTerm {
            name: format!("{}:{}", m.label, m.index),
            op,
        });
    }
    let lambda = sum_terms(d * d * d1 * d1, &terms)?;
    Ok(Generator {
        layout: RdtLayout {
            system_dim: d,
            statistics: Statistics::Fermionic,
            fock,
            ordering,
            modes,
        },
        lambda,
        terms,
    })
}

/// Dispatches on the system statistics.
pub fn build_lambda(
    sys: &SystemSpec,
    envs: &[Environment],
    trunc: Truncation,
    ordering: JwOrdering,
) -> Result<Generator> {
    match sys.statistics {
        Statistics::Bosonic => build_lambda_bosonic(sys, envs, trunc),
        Statistics::Fermionic => {
            if trunc.tier_cap.is_some() {
                return Err(Error::invalid(
                    "tier_cap",
                    "fermionic dissipaton spaces are not truncated",
                ));
            }
            build_lambda_fermionic(sys, envs, ordering)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{pair_conjugates, ExpMode, Sigma, PAIRING_TOLERANCE};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spin_boson() -> (SystemSpec, Vec<Environment>) {
        let sz = SparseOperator::diagonal(&[c(-1.0, 0.0), c(1.0, 0.0)]);
        let sx = SparseOperator::from_triplets(2, vec![(0, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))]).unwrap();
        let h = sz.add(&sx).unwrap();
        let modes = pair_conjugates(
            vec![
                ExpMode::boson(c(2.231, 1.155), c(0.5, 0.866)),
                ExpMode::boson(c(1.769, -1.155), c(0.5, -0.866)),
            ],
            PAIRING_TOLERANCE,
        )
        .unwrap();
        (
            SystemSpec::bosonic(h, vec![("bath".into(), sz)]),
            vec![Environment {
                label: "bath".into(),
                modes,
            }],
        )
    }

    #[test]
    fn bosonic_dimension_and_terms() {
        let (sys, envs) = spin_boson();
        let g = build_lambda_bosonic(&sys, &envs, Truncation::per_mode(3)).unwrap();
        assert_eq!(g.layout.dim(), 4 * 16);
        assert_eq!(g.terms.len(), 3);
        let capped = build_lambda_bosonic(
            &sys,
            &envs,
            Truncation {
                n_max: 3,
                tier_cap: Some(1),
            },
        )
        .unwrap();
        assert_eq!(capped.layout.dissipaton_dim(), 3);
    }

    #[test]
    fn missing_environment_is_reported() {
        let (sys, _) = spin_boson();
        assert_eq!(
            build_lambda_bosonic(&sys, &[], Truncation::per_mode(2)).unwrap_err(),
            Error::MissingModeSet("bath".into())
        );
    }

    #[test]
    fn decoupled_modes_reduce_to_liouvillian() {
        // With every zeta and xi zero the vacuum block evolves under -i[H, .]
        let (sys, envs) = spin_boson();
        let g = build_lambda_bosonic(&sys, &envs, Truncation::per_mode(2)).unwrap();
        let h_super = lift_system_superop(&sys.hamiltonian, Side::Left)
            .sub(&lift_system_superop(&sys.hamiltonian, Side::Right))
            .unwrap();
        let big_d = g.layout.dissipaton_dim();
        for (r, col, v) in h_super.entries() {
            assert_eq!(g.terms[0].op.get(r * big_d, col * big_d), v);
        }
    }

    #[test]
    fn fermionic_trace_is_conserved() {
        let cs = fermion_annihilators(1);
        let h = cs[0].adjoint().matmul(&cs[0]).unwrap().scale(c(0.3, 0.0));
        let sys = SystemSpec::fermionic(1, h, vec![("lead".into(), cs[0].clone())]);
        let modes = pair_conjugates(
            vec![
                ExpMode::fermion(c(0.06, -0.04), c(1.0, -0.2), Sigma::Plus),
                ExpMode::fermion(c(0.05, 0.03), c(1.0, 0.2), Sigma::Minus),
            ],
            PAIRING_TOLERANCE,
        )
        .unwrap();
        let envs = vec![Environment {
            label: "lead".into(),
            modes,
        }];
        for ordering in [JwOrdering::SystemFirst, JwOrdering::ModesFirst] {
            let g = build_lambda_fermionic(&sys, &envs, ordering).unwrap();
            assert_eq!(g.layout.dim(), 16);
            // tr rho_S is the sum of vacuum-block diagonal components; it must
            // be annihilated by Lambda from the left.
            let lt = g.lambda.transpose();
            let mut tr = vec![c(0.0, 0.0); 16];
            for i in 0..2 {
                tr[g.layout.index(i, i, 0)] = c(1.0, 0.0);
            }
            let out = lt.apply(&tr);
            assert!(out.iter().all(|v| v.norm() < 1e-14), "{ordering:?}");
        }
    }
}
