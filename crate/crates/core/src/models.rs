// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Built-in benchmark models: spin-boson, single-impurity Anderson model,
//! excitonic dimer and double-impurity Anderson model.
//!
//! Energies are dimensionless in each model's reference unit and times are
//! in the inverse unit.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::SparseOperator;
use crate::error::{Error, Result};
use crate::generator::{
    build_lambda, fermion_annihilators, Environment, Generator, JwOrdering, SystemSpec, Truncation,
};
use crate::modes::{
    decompose_spectral_density, pair_conjugates, ExpMode, ModeSet, Sigma, SpectralDensity, SpectralKind, Statistics,
    PAIRING_TOLERANCE,
};
use crate::observables::Observable;
use crate::propagate::{PropagationConfig, RdtState};
use crate::qsim::LcuConfig;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    SpinBoson,
    Siam,
    ExcitonicDimer,
    Diam,
}

impl ModelName {
    pub const ALL: [ModelName; 4] = [
        ModelName::SpinBoson,
        ModelName::Siam,
        ModelName::ExcitonicDimer,
        ModelName::Diam,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::SpinBoson => "spin_boson",
            ModelName::Siam => "siam",
            ModelName::ExcitonicDimer => "excitonic_dimer",
            ModelName::Diam => "diam",
        }
    }

    /// Parameter keys accepted as overrides, with their defaults.
    pub fn defaults(self, regime: Regime) -> BTreeMap<&'static str, f64> {
        let list: &[(&str, f64)] = match (self, regime) {
            (ModelName::SpinBoson, _) => &[
                ("omega", 1.0),
                ("v", 1.0),
                ("lambda", 0.4),
                ("omega0", 1.0),
                ("damping", 1.0),
                ("temperature", if regime == Regime::Low { 0.5 } else { 5.0 }),
                ("k", if regime == Regime::Low { 3.0 } else { 2.0 }),
                ("n_max", 3.0),
                ("dt", 0.01),
                ("t_final", 10.0),
                ("epsilon", 0.05),
            ],
            (ModelName::Siam, _) => &[
                ("e0", -0.5),
                ("u", 1.0),
                ("gamma", 0.125),
                ("width", 1.0),
                ("temperature", if regime == Regime::Low { 1.0 / 8.0 } else { 1.0 / 4.0 }),
                ("k", 3.0),
                ("dt", 0.01),
                ("t_final", 10.0),
                ("epsilon", 0.005),
            ],
            (ModelName::ExcitonicDimer, _) => &[
                ("e1", 1.0),
                ("e2", 1.0),
                ("v", 1.0),
                ("lambda", 0.5),
                ("gamma_d", 5.0),
                ("temperature", 1.0),
                ("k", 2.0),
                ("n_max", 3.0),
                ("dt", 0.01),
                ("t_final", 5.0),
                ("epsilon", 0.05),
            ],
            (ModelName::Diam, _) => &[
                ("u", 12.0),
                ("u_c", 12.0),
                ("hopping", 10.0),
                ("coupling", 1.0),
                ("width", 50.0),
                ("temperature", 5.0),
                ("k", 1.0),
                ("dt", 0.002),
                ("t_final", 2.0),
                ("epsilon", 0.005),
            ],
        };
        list.iter().copied().collect()
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelName::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Temperature regime selecting a tabulated mode set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    #[default]
    High,
    Low,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::High => "high",
            Regime::Low => "low",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(Regime::High),
            "low" => Ok(Regime::Low),
            other => Err(Error::invalid(
                "regime",
                format!("`{other}` is neither `low` nor `high`"),
            )),
        }
    }
}

/// A fully specified propagation problem.
#[derive(Clone, Debug)]
pub struct ModelJob {
    pub model: String,
    pub regime: Option<Regime>,
    /// Resolved parameter values, defaults included.
    pub parameters: BTreeMap<String, f64>,
    pub system: SystemSpec,
    pub environments: Vec<Environment>,
    pub truncation: Truncation,
    pub ordering: JwOrdering,
    pub rho0: Array2<Complex64>,
    pub observables: Vec<Observable>,
    pub propagation: PropagationConfig,
    pub lcu: LcuConfig,
}

impl ModelJob {
    pub fn generator(&self) -> Result<Generator> {
        build_lambda(&self.system, &self.environments, self.truncation, self.ordering)
    }

    pub fn initial_state(&self, gen: &Generator) -> Result<RdtState> {
        RdtState::product(&gen.layout, &self.rho0)
    }

    /// Row-major flattening of the initial reduced density matrix.
    pub fn rho0_flat(&self) -> Vec<Complex64> {
        self.rho0.iter().copied().collect()
    }

    pub fn statistics(&self) -> Statistics {
        self.system.statistics
    }
}

fn fermion_table(rows: &[(Complex64, Complex64)]) -> Result<ModeSet> {
    let mut modes = Vec::with_capacity(2 * rows.len());
    for sigma in [Sigma::Plus, Sigma::Minus] {
        modes.extend(rows.iter().map(|&(eta, gamma)| ExpMode::fermion(eta, gamma, sigma)));
    }
    pair_conjugates(modes, PAIRING_TOLERANCE)
}

fn boson_table(rows: &[(Complex64, Complex64)]) -> Result<ModeSet> {
    pair_conjugates(
        rows.iter().map(|&(eta, gamma)| ExpMode::boson(eta, gamma)).collect(),
        PAIRING_TOLERANCE,
    )
}

/// Tabulated mode set of a model: verbatim tables for the spin-boson and
/// single-impurity models, generated decompositions with default
/// parameters for the dimer and double-impurity models.
///
/// Spin-boson tables are in units of `Omega^2, Omega`; single-impurity
/// tables in `U^2, U` with identical entries for both sigma branches.
pub fn tabulated_modes(name: ModelName, regime: Regime) -> Result<ModeSet> {
    match (name, regime) {
        (ModelName::SpinBoson, Regime::High) => {
            boson_table(&[(c(2.231, 1.155), c(0.5, 0.866)), (c(1.769, -1.155), c(0.5, -0.866))])
        }
        (ModelName::SpinBoson, Regime::Low) => boson_table(&[
            (c(0.497, 0.082), c(0.5, 0.866)),
            (c(0.035, -0.082), c(0.5, -0.866)),
            (c(-0.032, 0.0), c(3.873, 0.0)),
        ]),
        (ModelName::Siam, Regime::Low) => fermion_table(&[
            (c(0.062, -0.038), c(1.0, 0.0)),
            (c(0.0, -0.037), c(0.393, 0.0)),
            (c(0.0, 0.075), c(1.630, 0.0)),
        ]),
        (ModelName::Siam, Regime::High) => fermion_table(&[
            (c(0.062, 0.138), c(1.0, 0.0)),
            (c(0.0, -0.164), c(0.786, 0.0)),
            (c(0.0, 0.026), c(3.261, 0.0)),
        ]),
        (ModelName::ExcitonicDimer, _) => {
            let p = ModelName::ExcitonicDimer.defaults(regime);
            decompose_spectral_density(
                &dimer_density(p["lambda"], p["gamma_d"], p["temperature"]),
                2,
                Statistics::Bosonic,
            )
        }
        (ModelName::Diam, _) => {
            let p = ModelName::Diam.defaults(regime);
            decompose_spectral_density(
                &lorentzian(p["coupling"], p["width"], p["temperature"]),
                1,
                Statistics::Fermionic,
            )
        }
    }
}

fn dimer_density(lambda: f64, gamma: f64, temperature: f64) -> SpectralDensity {
    SpectralDensity {
        kind: SpectralKind::Drude { lambda, gamma },
        temperature,
    }
}

fn lorentzian(coupling: f64, width: f64, temperature: f64) -> SpectralDensity {
    SpectralDensity {
        kind: SpectralKind::Lorentzian {
            coupling,
            width,
            mu: 0.0,
        },
        temperature,
    }
}

fn resolve(name: ModelName, regime: Regime, overrides: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    let defaults = name.defaults(regime);
    let mut out: BTreeMap<String, f64> = defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in overrides {
        if !defaults.contains_key(k.as_str()) {
            return Err(Error::UnknownParameter {
                model: name.to_string(),
                parameter: k.clone(),
            });
        }
        if !v.is_finite() {
            return Err(Error::invalid(k, "must be finite"));
        }
        out.insert(k.clone(), *v);
    }
    Ok(out)
}

fn count(p: &BTreeMap<String, f64>, key: &str) -> Result<usize> {
    let v = p[key];
    if v < 0.0 || v.fract() != 0.0 {
        return Err(Error::invalid(key, format!("must be a non-negative integer, got {v}")));
    }
    Ok(v as usize)
}

fn touched(overrides: &BTreeMap<String, f64>, keys: &[&str]) -> bool {
    keys.iter().any(|k| overrides.contains_key(*k))
}

fn projector(dim: usize, index: usize) -> SparseOperator {
    let mut d = vec![ZERO; dim];
    d[index] = real(1.0);
    SparseOperator::diagonal(&d)
}

fn pure_state(dim: usize, index: usize) -> Array2<Complex64> {
    let mut rho = Array2::zeros((dim, dim));
    rho[[index, index]] = real(1.0);
    rho
}

fn number(a: &SparseOperator) -> SparseOperator {
    a.adjoint().matmul(a).expect("square operators of equal size")
}

fn configs(p: &BTreeMap<String, f64>) -> Result<(PropagationConfig, LcuConfig)> {
    let prop = PropagationConfig {
        dt: p["dt"],
        t_final: p["t_final"],
        ..Default::default()
    };
    prop.validate()?;
    let lcu = LcuConfig::new(p["epsilon"], p["dt"]);
    lcu.validate()?;
    Ok((prop, lcu))
}

/// Builds a model with defaults replaced by `overrides`.
///
/// `regime` selects the tabulated mode set of the spin-boson and
/// single-impurity models; overriding any bath parameter switches them to a
/// generated decomposition (except the spin-boson `lambda`, which rescales
/// the table linearly).
pub fn instantiate_model(name: ModelName, regime: Regime, overrides: &BTreeMap<String, f64>) -> Result<ModelJob> {
    let p = resolve(name, regime, overrides)?;
    let (propagation, lcu) = configs(&p)?;
    let (system, environments, truncation, rho0, observables) = match name {
        ModelName::SpinBoson => spin_boson(&p, regime, overrides)?,
        ModelName::Siam => siam(&p, regime, overrides)?,
        ModelName::ExcitonicDimer => dimer(&p)?,
        ModelName::Diam => diam(&p)?,
    };
    Ok(ModelJob {
        model: name.to_string(),
        regime: matches!(name, ModelName::SpinBoson | ModelName::Siam).then_some(regime),
        parameters: p,
        system,
        environments,
        truncation,
        ordering: JwOrdering::default(),
        rho0,
        observables,
        propagation,
        lcu,
    })
}

type Parts = (
    SystemSpec,
    Vec<Environment>,
    Truncation,
    Array2<Complex64>,
    Vec<Observable>,
);

fn spin_boson(p: &BTreeMap<String, f64>, regime: Regime, overrides: &BTreeMap<String, f64>) -> Result<Parts> {
    // basis (|0>, |1>) with sigma_z = diag(-1, +1)
    let sz = SparseOperator::diagonal(&[real(-1.0), real(1.0)]);
    let sx = SparseOperator::from_triplets(2, vec![(0, 1, real(1.0)), (1, 0, real(1.0))])?;
    let h = sz.scale(real(p["omega"])).add(&sx.scale(real(p["v"])))?;
    let lambda = p["lambda"];
    let mut envs = Vec::new();
    if lambda != 0.0 {
        let modes = if touched(overrides, &["temperature", "omega0", "damping", "k"]) {
            let density = SpectralDensity {
                kind: SpectralKind::Brownian {
                    lambda,
                    omega0: p["omega0"],
                    damping: p["damping"],
                },
                temperature: p["temperature"],
            };
            decompose_spectral_density(&density, count(p, "k")?, Statistics::Bosonic)?
        } else {
            tabulated_modes(ModelName::SpinBoson, regime)?.scale_eta(lambda / 0.4)
        };
        envs.push(Environment {
            label: "bath".into(),
            modes,
        });
    }
    let couplings = if envs.is_empty() {
        Vec::new()
    } else {
        vec![("bath".into(), sz.clone())]
    };
    let sys = SystemSpec::bosonic(h, couplings);
    let obs = vec![
        Observable::expectation("P1_minus_P0", sz),
        Observable::expectation("P0", projector(2, 0)),
        Observable::expectation("P1", projector(2, 1)),
    ];
    Ok((
        sys,
        envs,
        Truncation::per_mode(count(p, "n_max")?),
        pure_state(2, 1),
        obs,
    ))
}

fn siam(p: &BTreeMap<String, f64>, regime: Regime, overrides: &BTreeMap<String, f64>) -> Result<Parts> {
    let cs = fermion_annihilators(2);
    let n: Vec<_> = cs.iter().map(number).collect();
    let h = n[0]
        .add(&n[1])?
        .scale(real(p["e0"]))
        .add(&n[0].matmul(&n[1])?.scale(real(p["u"])))?;
    let modes = if touched(overrides, &["gamma", "width", "temperature", "k"]) {
        decompose_spectral_density(
            &lorentzian(p["gamma"], p["width"], p["temperature"]),
            count(p, "k")?,
            Statistics::Fermionic,
        )?
    } else {
        tabulated_modes(ModelName::Siam, regime)?
    };
    let labels = ["up", "down"];
    let sys = SystemSpec::fermionic(
        2,
        h,
        labels.iter().map(|l| l.to_string()).zip(cs.iter().cloned()).collect(),
    );
    let envs = labels
        .iter()
        .map(|l| Environment {
            label: l.to_string(),
            modes: modes.clone(),
        })
        .collect();
    // occupation basis |n_up n_down>, index = 2 n_up + n_down
    let obs = vec![
        Observable::expectation("P0", projector(4, 0)),
        Observable::expectation("P_down", projector(4, 1)),
        Observable::expectation("P_up", projector(4, 2)),
        Observable::expectation("P_double", projector(4, 3)),
        Observable::current("current", &labels),
    ];
    Ok((sys, envs, Truncation::per_mode(1), pure_state(4, 3), obs))
}

fn dimer(p: &BTreeMap<String, f64>) -> Result<Parts> {
    // basis (ground, exciton 1, exciton 2)
    let mut trip = vec![(1, 1, real(p["e1"])), (2, 2, real(p["e2"]))];
    trip.extend([(1, 2, real(p["v"])), (2, 1, real(p["v"]))]);
    let h = SparseOperator::from_triplets(3, trip)?;
    let modes = decompose_spectral_density(
        &dimer_density(p["lambda"], p["gamma_d"], p["temperature"]),
        count(p, "k")?,
        Statistics::Bosonic,
    )?;
    let couplings: Vec<_> = (1..=2).map(|u| (format!("exciton{u}"), projector(3, u))).collect();
    let envs = couplings
        .iter()
        .map(|(l, _)| Environment {
            label: l.clone(),
            modes: modes.clone(),
        })
        .collect();
    let obs = vec![
        Observable::expectation("P1", projector(3, 1)),
        Observable::expectation("P2", projector(3, 2)),
    ];
    Ok((
        SystemSpec::bosonic(h, couplings),
        envs,
        Truncation::per_mode(count(p, "n_max")?),
        pure_state(3, 1),
        obs,
    ))
}

fn diam(p: &BTreeMap<String, f64>) -> Result<Parts> {
    // orbitals (1 up, 1 down, 2 up, 2 down), orbital 0 most significant
    let cs = fermion_annihilators(4);
    let n: Vec<_> = cs.iter().map(number).collect();
    let (u, uc, t) = (p["u"], p["u_c"], p["hopping"]);
    let eps = -(u + 2.0 * uc) / 2.0;
    let n1 = n[0].add(&n[1])?;
    let n2 = n[2].add(&n[3])?;
    let mut h = n1.add(&n2)?.scale(real(eps));
    h = h.add(&n[0].matmul(&n[1])?.scale(real(u)))?;
    h = h.add(&n[2].matmul(&n[3])?.scale(real(u)))?;
    h = h.add(&n1.matmul(&n2)?.scale(real(uc)))?;
    for s in 0..2 {
        let hop = cs[s].adjoint().matmul(&cs[2 + s])?;
        h = h.add(&hop.add(&hop.adjoint())?.scale(real(t)))?;
    }
    let modes = decompose_spectral_density(
        &lorentzian(p["coupling"], p["width"], p["temperature"]),
        count(p, "k")?,
        Statistics::Fermionic,
    )?;
    let labels = ["1up", "1down", "2up", "2down"];
    let sys = SystemSpec::fermionic(
        4,
        h,
        labels.iter().map(|l| l.to_string()).zip(cs.iter().cloned()).collect(),
    );
    let envs = labels
        .iter()
        .map(|l| Environment {
            label: l.to_string(),
            modes: modes.clone(),
        })
        .collect();
    let obs = vec![
        Observable::expectation("P1", projector(16, 0b1100)),
        Observable::expectation("P_double", projector(16, 0b1111)),
        Observable::current("current", &labels),
    ];
    Ok((sys, envs, Truncation::per_mode(1), pure_state(16, 0b1100), obs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::RegisterLayout;

    fn none() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn every_model_builds_with_defaults() {
        for name in ModelName::ALL {
            for regime in [Regime::Low, Regime::High] {
                let job = instantiate_model(name, regime, &none()).unwrap();
                let tr: Complex64 = job.rho0.diag().iter().sum();
                assert!((tr - 1.0).norm() < 1e-15);
                if name != ModelName::Diam {
                    let gen = job.generator().unwrap();
                    job.initial_state(&gen).unwrap();
                }
            }
        }
    }

    #[test]
    fn high_temperature_spin_boson_table_sums_to_four() {
        let t = tabulated_modes(ModelName::SpinBoson, Regime::High).unwrap();
        let c0: Complex64 = t.modes().iter().map(|m| m.eta).sum();
        assert!((c0 - 4.0).norm() < 1e-12);
        assert!(!t.generated());
        let low = tabulated_modes(ModelName::SpinBoson, Regime::Low).unwrap();
        assert_eq!(low.len(), 3);
        assert_eq!(low.modes()[2].gamma, c(3.873, 0.0));
    }

    #[test]
    fn siam_tables_and_generated_sets() {
        let low = tabulated_modes(ModelName::Siam, Regime::Low).unwrap();
        assert_eq!(low.modes()[0].eta, c(0.062, -0.038));
        let high = tabulated_modes(ModelName::Siam, Regime::High).unwrap();
        assert_eq!(high.modes()[2].eta, c(0.0, 0.026));
        assert_eq!(high.modes()[2].gamma, c(3.261, 0.0));
        assert!(tabulated_modes(ModelName::Diam, Regime::High).unwrap().generated());
        assert!(tabulated_modes(ModelName::ExcitonicDimer, Regime::High)
            .unwrap()
            .generated());
    }

    #[test]
    fn siam_register_has_seventeen_qubits() {
        let job = instantiate_model(ModelName::Siam, Regime::Low, &none()).unwrap();
        let gen = job.generator().unwrap();
        assert_eq!(RegisterLayout::new(&gen.layout).total_qubits(), 17);
        let sb = instantiate_model(ModelName::SpinBoson, Regime::Low, &none()).unwrap();
        let gen = sb.generator().unwrap();
        assert_eq!(RegisterLayout::new(&gen.layout).total_qubits(), 9);
    }

    #[test]
    fn unknown_names_and_parameters() {
        assert!(matches!("qubit".parse::<ModelName>(), Err(Error::UnknownModel(_))));
        let mut o = none();
        o.insert("mass".into(), 1.0);
        assert!(matches!(
            instantiate_model(ModelName::Siam, Regime::Low, &o),
            Err(Error::UnknownParameter { .. })
        ));
    }

    #[test]
    fn zero_coupling_spin_boson_precesses() {
        let mut o = none();
        o.insert("lambda".into(), 0.0);
        o.insert("t_final".into(), 2.0);
        let job = instantiate_model(ModelName::SpinBoson, Regime::High, &o).unwrap();
        assert!(job.environments.is_empty());
        let gen = job.generator().unwrap();
        let traj = crate::propagate::propagate(&gen, &job.initial_state(&gen).unwrap(), &job.propagation).unwrap();
        // H = sigma_z + sigma_x precesses about (1, 0, 1)/sqrt(2): <sigma_z> = (1 + cos(2 sqrt2 t)) / 2
        for (t, st) in traj.times.iter().zip(&traj.states) {
            let rho = st.reduced_density().unwrap();
            let sz = (rho[[1, 1]] - rho[[0, 0]]).re;
            let expect = 0.5 * (1.0 + (2.0 * 2f64.sqrt() * t).cos());
            assert!((sz - expect).abs() < 1e-6, "t={t}: {sz} vs {expect}");
        }
    }
}
