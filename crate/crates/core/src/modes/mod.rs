// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Exponential decompositions of bath correlation functions and the
//! dissipaton coupling coefficients derived from them.

mod spectral;

pub use spectral::{decompose_spectral_density, SpectralDensity, SpectralKind};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for matching conjugate rates.
pub const PAIRING_TOLERANCE: f64 = 1e-10;
/// Default relative floor on `|zeta|^2` below which a mode is rejected.
pub const ZETA_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Bosonic,
    Fermionic,
}

/// Fermionic creation (`Plus`) or annihilation (`Minus`) index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sigma {
    Plus,
    Minus,
}

impl Sigma {
    pub fn flip(self) -> Self {
        match self {
            Sigma::Plus => Sigma::Minus,
            Sigma::Minus => Sigma::Plus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeKind {
    Boson,
    Fermion(Sigma),
}

/// One exponential term `eta * exp(-gamma t)` of a correlation function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpMode {
    pub eta: Complex64,
    pub gamma: Complex64,
    pub kind: ModeKind,
}

impl ExpMode {
    pub fn boson(eta: Complex64, gamma: Complex64) -> Self {
        Self {
            eta,
            gamma,
            kind: ModeKind::Boson,
        }
    }

    pub fn fermion(eta: Complex64, gamma: Complex64, sigma: Sigma) -> Self {
        Self {
            eta,
            gamma,
            kind: ModeKind::Fermion(sigma),
        }
    }
}

/// A validated set of exponential modes with its conjugate pairing.
///
/// For bosons `partner[k]` is the mode whose rate is `conj(gamma_k)`. For
/// fermions `partner[k]` is the opposite-sigma mode with the same mode
/// index, and `fermionic_pairs` lists them as `(plus, minus)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet {
    modes: Vec<ExpMode>,
    statistics: Statistics,
    partner: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    generated: bool,
}

impl ModeSet {
    pub fn modes(&self) -> &[ExpMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn partner(&self, k: usize) -> usize {
        self.partner[k]
    }

    /// `(plus, minus)` index pairs in mode order; empty for bosonic sets.
    pub fn fermionic_pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// True when the modes came from a spectral-density decomposer rather
    /// than a table.
    pub fn generated(&self) -> bool {
        self.generated
    }

    pub(crate) fn mark_generated(mut self) -> Self {
        self.generated = true;
        self
    }

    /// Multiplies every `eta` by `factor`; the pairing is unchanged.
    pub fn scale_eta(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for m in &mut out.modes {
            m.eta *= factor;
        }
        out
    }

    /// Bosonic `C(t)`, or the `sigma = +` branch of a fermionic set.
    pub fn correlation(&self, t: f64) -> Complex64 {
        match self.statistics {
            Statistics::Bosonic => self.modes.iter().map(|m| m.eta * (-m.gamma * t).exp()).sum(),
            Statistics::Fermionic => self.correlation_sigma(Sigma::Plus, t),
        }
    }

    /// `C^sigma(t)` of a fermionic set.
    pub fn correlation_sigma(&self, sigma: Sigma, t: f64) -> Complex64 {
        self.modes
            .iter()
            .filter(|m| m.kind == ModeKind::Fermion(sigma))
            .map(|m| m.eta * (-m.gamma * t).exp())
            .sum()
    }
}

/// Evaluates `sum_k eta_k exp(-gamma_k t)`; fermionic sets give the
/// `sigma = +` branch.
pub fn eval_correlation(set: &ModeSet, t: f64) -> Complex64 {
    set.correlation(t)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

/// Validates a mode list and finds the conjugate partner of every mode.
///
/// Fermionic modes without an explicit sigma are not representable here:
/// callers duplicate them into both branches first.
pub fn pair_conjugates(modes: Vec<ExpMode>, tol: f64) -> Result<ModeSet> {
    let statistics = match modes.first().map(|m| m.kind) {
        Some(ModeKind::Fermion(_)) => Statistics::Fermionic,
        _ => Statistics::Bosonic,
    };
    for (i, m) in modes.iter().enumerate() {
        let ok = matches!(
            (statistics, m.kind),
            (Statistics::Bosonic, ModeKind::Boson) | (Statistics::Fermionic, ModeKind::Fermion(_))
        );
        if !ok {
            return Err(Error::invalid(
                "modes",
                format!("mode {i} mixes bosonic and fermionic kinds"),
            ));
        }
        if !(m.eta.re.is_finite() && m.eta.im.is_finite() && m.gamma.re.is_finite() && m.gamma.im.is_finite()) {
            return Err(Error::invalid("modes", format!("mode {i} is not finite")));
        }
        if m.gamma.re < 0.0 {
            return Err(Error::invalid(
                "modes",
                format!("mode {i} has Re(gamma) = {} < 0", m.gamma.re),
            ));
        }
    }
    match statistics {
        Statistics::Bosonic => pair_bosonic(modes, tol),
        Statistics::Fermionic => pair_fermionic(modes, tol),
    }
}

fn pair_bosonic(modes: Vec<ExpMode>, tol: f64) -> Result<ModeSet> {
    let n = modes.len();
    let mut partner = vec![usize::MAX; n];
    for i in 0..n {
        if partner[i] != usize::MAX {
            continue;
        }
        let g = modes[i].gamma;
        if g.im.abs() <= tol * g.norm() {
            partner[i] = i;
            continue;
        }
        let target = g.conj();
        let mut best: Option<(usize, f64)> = None;
        let mut tie: Option<usize> = None;
        for j in 0..n {
            if j == i || partner[j] != usize::MAX || !close(modes[j].gamma, target, tol) {
                continue;
            }
            let d = (modes[j].gamma - target).norm();
            match best {
                None => best = Some((j, d)),
                Some((_, bd)) if d < bd => {
                    best = Some((j, d));
                    tie = None;
                }
                Some((_, bd)) if d == bd => tie = Some(j),
                _ => {}
            }
        }
        match (best, tie) {
            (None, _) => {
                return Err(Error::UnpairableMode {
                    index: i,
                    gamma: format!("{g}"),
                })
            }
            (Some((j, _)), Some(t)) => {
                return Err(Error::AmbiguousPairing {
                    index: i,
                    first: j,
                    second: t,
                })
            }
            (Some((j, _)), None) => {
                partner[i] = j;
                partner[j] = i;
            }
        }
    }
    Ok(ModeSet {
        modes,
        statistics: Statistics::Bosonic,
        partner,
        pairs: Vec::new(),
        generated: false,
    })
}

fn pair_fermionic(modes: Vec<ExpMode>, tol: f64) -> Result<ModeSet> {
    let plus: Vec<usize> = (0..modes.len())
        .filter(|&i| modes[i].kind == ModeKind::Fermion(Sigma::Plus))
        .collect();
    let minus: Vec<usize> = (0..modes.len())
        .filter(|&i| modes[i].kind == ModeKind::Fermion(Sigma::Minus))
        .collect();
    if plus.len() != minus.len() {
        return Err(Error::UnpairedSigma {
            plus: plus.len(),
            minus: minus.len(),
        });
    }
    let mut partner = vec![0; modes.len()];
    let mut pairs = Vec::with_capacity(plus.len());
    for (&p, &m) in plus.iter().zip(&minus) {
        if !close(modes[p].gamma, modes[m].gamma.conj(), tol) {
            return Err(Error::UnpairableMode {
                index: p,
                gamma: format!("{}", modes[p].gamma),
            });
        }
        partner[p] = m;
        partner[m] = p;
        pairs.push((p, m));
    }
    Ok(ModeSet {
        modes,
        statistics: Statistics::Fermionic,
        partner,
        pairs,
        generated: false,
    })
}

/// Dissipaton coupling strengths of one mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficient {
    pub zeta: Complex64,
    pub xi: Complex64,
}

/// Computes `(zeta_k, xi_k)` for every mode of a set.
///
/// Bosons: `zeta_k^2 = (eta_k + conj(eta_kbar)) / 2` with the principal
/// root and `xi_k = (eta_k - conj(eta_kbar)) / (2i zeta_k)`.
/// Fermions: `zeta^sigma = (eta^sigma conj(eta^sigmabar))^(1/4)` and
/// `xi^sigma = eta^sigma / zeta^sigma`.
pub fn dissipaton_coefficients(set: &ModeSet) -> Result<Vec<Coefficient>> {
    dissipaton_coefficients_with_floor(set, ZETA_FLOOR)
}

pub fn dissipaton_coefficients_with_floor(set: &ModeSet, floor: f64) -> Result<Vec<Coefficient>> {
    let scale = set.modes.iter().map(|m| m.eta.norm()).fold(0.0, f64::max);
    let threshold = floor * scale;
    let i = Complex64::new(0.0, 1.0);
    if scale == 0.0 {
        // Decoupled environment.
        let zero = Complex64::new(0.0, 0.0);
        return Ok(vec![Coefficient { zeta: zero, xi: zero }; set.len()]);
    }
    let mut out = Vec::with_capacity(set.len());
    for (k, m) in set.modes.iter().enumerate() {
        let bar = set.modes[set.partner[k]];
        let c = match set.statistics {
            Statistics::Bosonic => {
                let z2 = (m.eta + bar.eta.conj()) / 2.0;
                if z2.norm() <= threshold {
                    return Err(Error::DegenerateZeta {
                        index: k,
                        magnitude: z2.norm(),
                    });
                }
                let zeta = z2.sqrt();
                let xi = (m.eta - bar.eta.conj()) / (2.0 * i * zeta);
                Coefficient { zeta, xi }
            }
            Statistics::Fermionic => {
                let z4 = m.eta * bar.eta.conj();
                if z4.norm().sqrt() <= threshold {
                    return Err(Error::DegenerateZeta {
                        index: k,
                        magnitude: z4.norm().sqrt(),
                    });
                }
                let zeta = z4.sqrt().sqrt();
                Coefficient { zeta, xi: m.eta / zeta }
            }
        };
        out.push(c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn conjugate_pairs_are_matched() {
        let set = pair_conjugates(
            vec![
                ExpMode::boson(c(0.497, 0.082), c(0.5, 0.866)),
                ExpMode::boson(c(-0.032, 0.0), c(3.873, 0.0)),
                ExpMode::boson(c(0.035, -0.082), c(0.5, -0.866)),
            ],
            PAIRING_TOLERANCE,
        )
        .unwrap();
        assert_eq!(set.partner(0), 2);
        assert_eq!(set.partner(2), 0);
        assert_eq!(set.partner(1), 1);
    }

    #[test]
    fn lone_complex_rate_is_rejected() {
        let err = pair_conjugates(vec![ExpMode::boson(c(1.0, 0.0), c(0.5, 0.866))], PAIRING_TOLERANCE).unwrap_err();
        assert!(matches!(err, Error::UnpairableMode { index: 0, .. }));
    }

    #[test]
    fn exact_tie_is_ambiguous() {
        let err = pair_conjugates(
            vec![
                ExpMode::boson(c(1.0, 0.0), c(0.5, 0.866)),
                ExpMode::boson(c(1.0, 0.0), c(0.5, -0.866)),
                ExpMode::boson(c(1.0, 0.0), c(0.5, -0.866)),
            ],
            PAIRING_TOLERANCE,
        )
        .unwrap_err();
        assert!(matches!(err, Error::AmbiguousPairing { index: 0, .. }));
    }

    #[test]
    fn fermionic_sigma_counts_must_agree() {
        let err = pair_conjugates(
            vec![
                ExpMode::fermion(c(1.0, 0.0), c(1.0, 0.0), Sigma::Plus),
                ExpMode::fermion(c(1.0, 0.0), c(1.0, 0.0), Sigma::Plus),
                ExpMode::fermion(c(1.0, 0.0), c(1.0, 0.0), Sigma::Minus),
            ],
            PAIRING_TOLERANCE,
        )
        .unwrap_err();
        assert_eq!(err, Error::UnpairedSigma { plus: 2, minus: 1 });
    }

    #[test]
    fn real_single_mode_coefficients() {
        let set = pair_conjugates(vec![ExpMode::boson(c(1.0, 0.0), c(1.0, 0.0))], PAIRING_TOLERANCE).unwrap();
        let co = dissipaton_coefficients(&set).unwrap();
        assert_eq!(co[0].zeta, c(1.0, 0.0));
        assert_eq!(co[0].xi, c(0.0, 0.0));
    }

    #[test]
    fn vanishing_zeta_is_degenerate() {
        let set = pair_conjugates(vec![ExpMode::boson(c(0.0, 1.0), c(1.0, 0.0))], PAIRING_TOLERANCE).unwrap();
        assert!(matches!(
            dissipaton_coefficients(&set),
            Err(Error::DegenerateZeta { index: 0, .. })
        ));
    }

    #[test]
    fn decoupled_set_has_zero_coefficients() {
        let modes = vec![
            ExpMode::fermion(c(0.0, 0.0), c(1.0, 0.0), Sigma::Plus),
            ExpMode::fermion(c(0.0, 0.0), c(1.0, 0.0), Sigma::Minus),
        ];
        let set = pair_conjugates(modes, PAIRING_TOLERANCE).unwrap();
        for co in dissipaton_coefficients(&set).unwrap() {
            assert_eq!((co.zeta, co.xi), (c(0.0, 0.0), c(0.0, 0.0)));
        }
    }

    fn conj_pair_strategy() -> impl Strategy<Value = Vec<ExpMode>> {
        (
            -2.0..2.0f64,
            -2.0..2.0f64,
            -2.0..2.0f64,
            -2.0..2.0f64,
            0.1..3.0f64,
            0.1..3.0f64,
            -1.0..1.0f64,
            0.1..4.0f64,
        )
            .prop_map(|(a, b, cc, d, gr, gi, e, g2)| {
                vec![
                    ExpMode::boson(c(a, b), c(gr, gi)),
                    ExpMode::boson(c(cc, d), c(gr, -gi)),
                    ExpMode::boson(c(e, 0.3 * e), c(g2, 0.0)),
                ]
            })
    }

    proptest! {
        #[test]
        fn bosonic_coefficients_reproduce_eta(modes in conj_pair_strategy()) {
            let set = pair_conjugates(modes, PAIRING_TOLERANCE).unwrap();
            let Ok(co) = dissipaton_coefficients(&set) else { return Ok(()); };
            let i = Complex64::new(0.0, 1.0);
            for k in 0..set.len() {
                let kb = set.partner(k);
                let z2 = co[k].zeta * co[k].zeta;
                let expected = (set.modes()[k].eta + set.modes()[kb].eta.conj()) / 2.0;
                prop_assert!((z2 - expected).norm() <= 1e-13 * (1.0 + expected.norm()));
                let lhs = 2.0 * i * co[k].zeta * co[k].xi;
                let rhs = set.modes()[k].eta - set.modes()[kb].eta.conj();
                prop_assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + rhs.norm()));
            }
        }

        #[test]
        fn fermionic_coefficients_reproduce_eta(
            a in -2.0..2.0f64, b in -2.0..2.0f64, cc in -2.0..2.0f64, d in -2.0..2.0f64,
            gr in 0.1..3.0f64, gi in -2.0..2.0f64,
        ) {
            prop_assume!(a.hypot(b) > 1e-3 && cc.hypot(d) > 1e-3);
            let set = pair_conjugates(vec![
                ExpMode::fermion(c(a, b), c(gr, gi), Sigma::Plus),
                ExpMode::fermion(c(cc, d), c(gr, -gi), Sigma::Minus),
            ], PAIRING_TOLERANCE).unwrap();
            let co = dissipaton_coefficients(&set).unwrap();
            for k in 0..2 {
                let kb = set.partner(k);
                let z4 = co[k].zeta.powi(4);
                let expected = set.modes()[k].eta * set.modes()[kb].eta.conj();
                prop_assert!((z4 - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
                prop_assert!((co[k].zeta * co[k].xi - set.modes()[k].eta).norm() <= 1e-13);
            }
        }
    }
}
