// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! JSON job description.
//!
//! A job names either a built-in model (`model`, `regime`, `parameters`) or
//! an inline `system`. Complex numbers are written as `[re, im]` pairs or
//! plain reals; matrices as arrays of rows. Every inline coupling takes its
//! modes from exactly one of `table`, `modes` or `spectral`.
//!
//! ```json
//! {
//!   "system": {
//!     "statistics": "bosonic",
//!     "hamiltonian": [[-1, 1], [1, 1]],
//!     "rho0": [[0, 0], [0, 1]],
//!     "n_max": 3,
//!     "couplings": [{
//!       "label": "bath",
//!       "operator": [[-1, 0], [0, 1]],
//!       "modes": [{"eta": [0.5, 0.1], "gamma": [1, 0.5]},
//!                 {"eta": [0.5, -0.1], "gamma": [1, -0.5]}]
//!     }],
//!     "observables": [{"name": "sz", "operator": [[-1, 0], [0, 1]]}]
//!   },
//!   "method": "classical",
//!   "propagation": {"dt": 0.01, "t_final": 5}
//! }
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::SparseOperator;
use crate::error::{Error, Result};
use crate::generator::{fermion_annihilators, Environment, JwOrdering, SystemSpec, Truncation};
use crate::models::{instantiate_model, tabulated_modes, ModelJob, ModelName, Regime};
use crate::modes::{
    decompose_spectral_density, pair_conjugates, ExpMode, ModeSet, Sigma, SpectralDensity, Statistics,
    PAIRING_TOLERANCE,
};
use crate::observables::{select, Observable};
use crate::propagate::{Integrator, PropagationConfig};
use crate::qsim::{Backend, LcuConfig};

/// Propagation method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Classical propagation of the dissipaton equation.
    Classical,
    /// Hierarchical equations of motion.
    Heom,
    /// Gate-level simulation of the two-unitary circuit.
    Qsim,
    /// Lindblad propagation of pseudomodes (real bosonic modes only).
    Pseudomode,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Classical, Method::Heom, Method::Qsim, Method::Pseudomode];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Classical => "classical",
            Method::Heom => "heom",
            Method::Qsim => "qsim",
            Method::Pseudomode => "pseudomode",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::config("method", format!("unknown method `{s}`")))
    }
}

/// A real number or an `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Number> for Complex64 {
    fn from(n: Number) -> Self {
        match n {
            Number::Real(r) => Complex64::new(r, 0.0),
            Number::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

pub type Matrix = Vec<Vec<Number>>;

fn to_dense(m: &Matrix, field: &str) -> Result<Array2<Complex64>> {
    let n = m.len();
    if n == 0 {
        return Err(Error::config(field, "matrix is empty"));
    }
    let mut out = Array2::zeros((n, n));
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(Error::config(
                &format!("{field}[{i}]"),
                format!("expected {n} entries, found {}", row.len()),
            ));
        }
        for (j, v) in row.iter().enumerate() {
            out[[i, j]] = (*v).into();
        }
    }
    Ok(out)
}

fn to_sparse(m: &Matrix, field: &str) -> Result<SparseOperator> {
    SparseOperator::from_dense(&to_dense(m, field)?)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationOverrides {
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub integrator: Option<Integrator>,
    pub stride: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LcuOverrides {
    pub epsilon: Option<f64>,
    pub backend: Option<Backend>,
    pub sampled: Option<bool>,
}

/// Reference to a built-in mode table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRef {
    pub model: String,
    #[serde(default)]
    pub regime: Regime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineMode {
    pub eta: Number,
    pub gamma: Number,
    /// Required for fermionic environments.
    pub sigma: Option<Sigma>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InlineSpectral {
    #[serde(flatten)]
    pub density: SpectralDensity,
    /// Modes per branch.
    pub k: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineCoupling {
    pub label: String,
    /// Coupling operator; fermionic systems may give `orbital` instead.
    pub operator: Option<Matrix>,
    pub orbital: Option<usize>,
    pub table: Option<TableRef>,
    pub modes: Option<Vec<InlineMode>>,
    pub spectral: Option<InlineSpectral>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineObservable {
    pub name: String,
    pub operator: Option<Matrix>,
    /// Environment labels whose summed current is reported.
    pub current: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineSystem {
    pub statistics: Statistics,
    pub hamiltonian: Matrix,
    /// Number of orbitals of a fermionic system; the Hilbert space is
    /// their occupation basis with orbital 0 most significant.
    pub n_orbitals: Option<usize>,
    pub couplings: Vec<InlineCoupling>,
    pub rho0: Matrix,
    #[serde(default)]
    pub observables: Vec<InlineObservable>,
    /// Per-mode occupation cap (bosonic).
    pub n_max: Option<usize>,
    /// Total occupation cap (bosonic).
    pub tier_cap: Option<usize>,
}

/// Parameter sweep for scaling studies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Epsilon,
    Dt,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub model: Option<String>,
    pub regime: Option<Regime>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    pub system: Option<InlineSystem>,
    pub method: Option<Method>,
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub propagation: PropagationOverrides,
    #[serde(default)]
    pub lcu: LcuOverrides,
    pub ordering: Option<JwOrdering>,
    /// Observables to report; all available when absent.
    pub observables: Option<Vec<String>>,
    pub seed: Option<u64>,
    /// Largest tolerated difference in `compare`.
    pub gate: Option<f64>,
    pub sweep: Option<Sweep>,
    pub out: Option<String>,
}

impl JobConfig {
    /// Parses a JSON document; syntax and schema errors report line and
    /// column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::config(&format!("line {} column {}", e.line(), e.column()), e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Resolves the job: built-in model or inline system, then overrides.
    pub fn build(&self) -> Result<ModelJob> {
        let mut job = match (&self.model, &self.system) {
            (Some(_), Some(_)) => return Err(Error::config("model", "give either `model` or `system`, not both")),
            (None, None) => return Err(Error::config("model", "one of `model` or `system` is required")),
            (Some(name), None) => {
                let name: ModelName = name.parse()?;
                instantiate_model(name, self.regime.unwrap_or_default(), &self.parameters)?
            }
            (None, Some(sys)) => {
                if !self.parameters.is_empty() {
                    return Err(Error::config("parameters", "only built-in models take parameters"));
                }
                build_inline(sys)?
            }
        };
        let p = &self.propagation;
        if let Some(dt) = p.dt {
            job.propagation.dt = dt;
            job.lcu.dt = dt;
        }
        if let Some(t) = p.t_final {
            job.propagation.t_final = t;
        }
        if let Some(i) = p.integrator {
            job.propagation.integrator = i;
        }
        if let Some(s) = p.stride {
            job.propagation.stride = s;
        }
        job.propagation
            .validate()
            .map_err(|e| Error::config("propagation", e.to_string()))?;
        if let Some(e) = self.lcu.epsilon {
            job.lcu.epsilon = e;
        }
        if let Some(b) = self.lcu.backend {
            job.lcu.backend = b;
        }
        if let Some(s) = self.lcu.sampled {
            job.lcu.sampled = s;
        }
        if let Some(seed) = self.seed {
            job.lcu.seed = seed;
        }
        job.lcu.validate().map_err(|e| Error::config("lcu", e.to_string()))?;
        if let Some(o) = self.ordering {
            job.ordering = o;
        }
        if let Some(names) = &self.observables {
            job.observables = select(&job.observables, names)?;
        }
        Ok(job)
    }

    /// Methods requested, `method` first.
    pub fn method_list(&self) -> Vec<Method> {
        let mut out: Vec<Method> = self.method.into_iter().collect();
        for m in &self.methods {
            if !out.contains(m) {
                out.push(*m);
            }
        }
        out
    }
}

fn inline_modes(c: &InlineCoupling, field: &str, statistics: Statistics) -> Result<ModeSet> {
    let sources = [c.table.is_some(), c.modes.is_some(), c.spectral.is_some()];
    match sources.iter().filter(|&&b| b).count() {
        0 => {
            return Err(Error::config(
                field,
                "missing modes: give one of `table`, `modes` or `spectral`",
            ))
        }
        1 => {}
        _ => {
            return Err(Error::config(
                field,
                "give exactly one of `table`, `modes` or `spectral`",
            ))
        }
    }
    let set = if let Some(t) = &c.table {
        let name: ModelName = t.model.parse()?;
        tabulated_modes(name, t.regime)?
    } else if let Some(ms) = &c.modes {
        let mut modes = Vec::with_capacity(ms.len());
        for (k, m) in ms.iter().enumerate() {
            let (eta, gamma) = (m.eta.into(), m.gamma.into());
            modes.push(match (statistics, m.sigma) {
                (Statistics::Bosonic, None) => ExpMode::boson(eta, gamma),
                (Statistics::Fermionic, Some(s)) => ExpMode::fermion(eta, gamma, s),
                (Statistics::Bosonic, Some(_)) => {
                    return Err(Error::config(
                        &format!("{field}.modes[{k}].sigma"),
                        "bosonic modes take no sigma",
                    ))
                }
                (Statistics::Fermionic, None) => {
                    return Err(Error::config(
                        &format!("{field}.modes[{k}].sigma"),
                        "fermionic modes need a sigma",
                    ))
                }
            });
        }
        pair_conjugates(modes, PAIRING_TOLERANCE)
            .map_err(|e| Error::config(&format!("{field}.modes"), e.to_string()))?
    } else {
        let s = c.spectral.as_ref().expect("counted above");
        decompose_spectral_density(&s.density, s.k, statistics)
            .map_err(|e| Error::config(&format!("{field}.spectral"), e.to_string()))?
    };
    if set.statistics() != statistics {
        return Err(Error::config(field, "mode statistics differ from the system"));
    }
    Ok(set)
}

fn build_inline(sys: &InlineSystem) -> Result<ModelJob> {
    let h = to_sparse(&sys.hamiltonian, "system.hamiltonian")?;
    let d = h.dim();
    let annihilators = match (sys.statistics, sys.n_orbitals) {
        (Statistics::Fermionic, Some(n)) => {
            if 1usize << n != d {
                return Err(Error::config(
                    "system.n_orbitals",
                    format!("{n} orbitals need a {}-dimensional hamiltonian", 1usize << n),
                ));
            }
            fermion_annihilators(n)
        }
        (Statistics::Fermionic, None) => {
            return Err(Error::config("system.n_orbitals", "required for fermionic systems"))
        }
        (Statistics::Bosonic, Some(_)) => {
            return Err(Error::config(
                "system.n_orbitals",
                "only fermionic systems have orbitals",
            ))
        }
        (Statistics::Bosonic, None) => Vec::new(),
    };
    if sys.couplings.is_empty() {
        return Err(Error::config("system.couplings", "at least one coupling is required"));
    }
    let mut couplings = Vec::new();
    let mut envs = Vec::new();
    for (k, c) in sys.couplings.iter().enumerate() {
        let field = format!("system.couplings[{k}]");
        let op = match (&c.operator, c.orbital) {
            (Some(m), None) => to_sparse(m, &format!("{field}.operator"))?,
            (None, Some(u)) => annihilators
                .get(u)
                .cloned()
                .ok_or_else(|| Error::config(&format!("{field}.orbital"), format!("no orbital {u}")))?,
            _ => return Err(Error::config(&field, "give exactly one of `operator` or `orbital`")),
        };
        if op.dim() != d {
            return Err(Error::config(
                &format!("{field}.operator"),
                format!("expected dimension {d}, found {}", op.dim()),
            ));
        }
        if couplings.iter().any(|(l, _): &(String, SparseOperator)| l == &c.label) {
            return Err(Error::config(
                &format!("{field}.label"),
                format!("duplicate label `{}`", c.label),
            ));
        }
        envs.push(Environment {
            label: c.label.clone(),
            modes: inline_modes(c, &field, sys.statistics)?,
        });
        couplings.push((c.label.clone(), op));
    }
    let system = match sys.statistics {
        Statistics::Bosonic => SystemSpec::bosonic(h, couplings),
        Statistics::Fermionic => SystemSpec::fermionic(sys.n_orbitals.expect("checked"), h, couplings),
    };
    let rho0 = to_dense(&sys.rho0, "system.rho0")?;
    if rho0.nrows() != d {
        return Err(Error::config(
            "system.rho0",
            format!("expected dimension {d}, found {}", rho0.nrows()),
        ));
    }
    let tr: Complex64 = rho0.diag().iter().sum();
    if (tr - 1.0).norm() > 1e-12 {
        return Err(Error::config("system.rho0", format!("trace is {tr}, expected 1")));
    }
    let mut observables = Vec::new();
    for (k, o) in sys.observables.iter().enumerate() {
        let field = format!("system.observables[{k}]");
        observables.push(match (&o.operator, &o.current) {
            (Some(m), None) => {
                let op = to_sparse(m, &format!("{field}.operator"))?;
                if op.dim() != d {
                    return Err(Error::config(
                        &format!("{field}.operator"),
                        format!("expected dimension {d}"),
                    ));
                }
                Observable::expectation(&o.name, op)
            }
            (None, Some(labels)) => {
                let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
                Observable::current(&o.name, &refs)
            }
            _ => return Err(Error::config(&field, "give exactly one of `operator` or `current`")),
        });
    }
    let truncation = match sys.statistics {
        Statistics::Bosonic => Truncation {
            n_max: sys.n_max.unwrap_or(3),
            tier_cap: sys.tier_cap,
        },
        Statistics::Fermionic => {
            if sys.n_max.is_some() || sys.tier_cap.is_some() {
                return Err(Error::config("system.n_max", "fermionic dissipatons are not truncated"));
            }
            Truncation::per_mode(1)
        }
    };
    let propagation = PropagationConfig::default();
    Ok(ModelJob {
        model: "inline".into(),
        regime: None,
        parameters: BTreeMap::new(),
        system,
        environments: envs,
        truncation,
        ordering: JwOrdering::default(),
        rho0,
        observables,
        propagation,
        lcu: LcuConfig::new(0.05, propagation.dt),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const INLINE: &str = r#"{
        "system": {
            "statistics": "bosonic",
            "hamiltonian": [[-1, 1], [1, 1]],
            "rho0": [[0, 0], [0, 1]],
            "n_max": 2,
            "couplings": [{
                "label": "bath",
                "operator": [[-1, 0], [0, 1]],
                "modes": [{"eta": [0.5, 0.1], "gamma": [1, 0.5]},
                          {"eta": [0.5, -0.1], "gamma": [1, -0.5]}]
            }],
            "observables": [{"name": "sz", "operator": [[-1, 0], [0, 1]]}]
        },
        "method": "classical",
        "propagation": {"dt": 0.02, "t_final": 1}
    }"#;

    #[test]
    fn inline_system_builds() {
        let cfg = JobConfig::from_json(INLINE).unwrap();
        let job = cfg.build().unwrap();
        assert_eq!(job.environments[0].modes.len(), 2);
        assert_eq!(job.propagation.dt, 0.02);
        assert_eq!(job.lcu.dt, 0.02);
        assert_eq!(cfg.method_list(), vec![Method::Classical]);
        job.generator().unwrap();
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = JobConfig::from_json(INLINE).unwrap();
        assert_eq!(JobConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn missing_modes_name_the_field() {
        let text = INLINE.replace(
            r#""modes": [{"eta": [0.5, 0.1], "gamma": [1, 0.5]},
                          {"eta": [0.5, -0.1], "gamma": [1, -0.5]}]"#,
            r#""orbital": null"#,
        );
        let err = JobConfig::from_json(&text).unwrap().build().unwrap_err();
        match err {
            Error::Config { field, reason } => {
                assert_eq!(field, "system.couplings[0]");
                assert!(reason.contains("missing modes"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_mode_sources_are_rejected() {
        let text = INLINE.replace(
            r#""label": "bath","#,
            r#""label": "bath", "table": {"model": "spin_boson"},"#,
        );
        let err = JobConfig::from_json(&text).unwrap().build().unwrap_err();
        assert!(matches!(err, Error::Config { ref reason, .. } if reason.contains("exactly one")));
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = JobConfig::from_json("{\n  \"model\": }").unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field.starts_with("line 2")));
        let err = JobConfig::from_json(r#"{"modle": "siam"}"#).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn model_config_applies_overrides() {
        let cfg = JobConfig::from_json(
            r#"{"model": "siam", "regime": "low", "lcu": {"epsilon": 0.01}, "seed": 7,
                "observables": ["P0", "current"], "propagation": {"t_final": 1}}"#,
        )
        .unwrap();
        let job = cfg.build().unwrap();
        assert_eq!(job.lcu.epsilon, 0.01);
        assert_eq!(job.lcu.seed, 7);
        assert_eq!(job.observables.len(), 2);
        assert_eq!(job.propagation.t_final, 1.0);
        let bad = JobConfig::from_json(r#"{"model": "siam", "observables": ["P7"]}"#).unwrap();
        assert!(matches!(bad.build(), Err(Error::UnknownObservable(_))));
    }

    #[test]
    fn fermionic_inline_with_spectral_modes() {
        let text = r#"{
            "system": {
                "statistics": "fermionic",
                "n_orbitals": 1,
                "hamiltonian": [[0, 0], [0, 0.3]],
                "rho0": [[0.5, 0], [0, 0.5]],
                "couplings": [{"label": "lead", "orbital": 0,
                    "spectral": {"kind": "lorentzian", "coupling": 0.1, "width": 1, "temperature": 1, "k": 2}}],
                "observables": [{"name": "I", "current": ["lead"]}]
            }
        }"#;
        let job = JobConfig::from_json(text).unwrap().build().unwrap();
        assert_eq!(job.environments[0].modes.len(), 4);
        assert!(job.environments[0].modes.generated());
    }
}
