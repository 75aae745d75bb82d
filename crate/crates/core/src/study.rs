// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Method runners, cross-method comparison, error-scaling studies and the
//! CSV / JSON report formats.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{Method, SweepParameter};
use crate::generator::{Environment, Generator, RdtLayout};
use crate::heom::{BosonicHeom, FermionicHeom};
use crate::models::ModelJob;
use crate::modes::Statistics;
use crate::observables::{evaluate, Observable};
use crate::propagate::{drive, propagate_with, PropagationConfig, RdtState, Rk4};
use crate::pseudomode::{build_pseudomode_generator, extract_rdt};
use crate::qsim::{run_lcu_with, LcuConfig, LcuStats, RegisterLayout};
use crate::{Error, Result};

/// Sizes of the representation a run used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutSummary {
    pub system_dim: usize,
    pub dissipaton_dim: usize,
    pub rdt_dim: usize,
    pub n_modes: usize,
    /// Length of the propagated vector when it differs from `rdt_dim`.
    pub state_dim: usize,
}

impl LayoutSummary {
    fn of(layout: &RdtLayout, state_dim: usize) -> Self {
        Self {
            system_dim: layout.system_dim,
            dissipaton_dim: layout.dissipaton_dim(),
            rdt_dim: layout.dim(),
            n_modes: layout.n_modes(),
            state_dim,
        }
    }
}

/// Observable time series of one method.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub method: Method,
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub layout: LayoutSummary,
    /// Register width including the ancilla (circuit runs only).
    pub qubits: Option<usize>,
    pub lcu: Option<LcuStats>,
    /// Largest `|tr rho_S - 1|` seen before renormalization.
    pub max_trace_error: f64,
    pub wall_time_s: f64,
}

impl RunOutput {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

fn columns(obs: &[Observable]) -> Vec<String> {
    obs.iter().flat_map(Observable::columns).collect()
}

struct Recorder<'a> {
    job: &'a ModelJob,
    times: Vec<f64>,
    rows: Vec<Vec<f64>>,
    max_trace_error: f64,
}

impl<'a> Recorder<'a> {
    fn new(job: &'a ModelJob) -> Self {
        Self {
            job,
            times: Vec::new(),
            rows: Vec::new(),
            max_trace_error: 0.0,
        }
    }

    fn record(&mut self, layout: &RdtLayout, t: f64, state: &RdtState) -> Result<()> {
        self.max_trace_error = self.max_trace_error.max((state.trace() - 1.0).norm());
        let values = evaluate(&self.job.observables, layout, &self.job.system, state)?;
        let mut row = Vec::with_capacity(values.len());
        for v in values {
            v.push_to(&mut row);
        }
        self.times.push(t);
        self.rows.push(row);
        Ok(())
    }

    fn finish(self, method: Method, layout: LayoutSummary, start: Instant) -> RunOutput {
        RunOutput {
            method,
            columns: columns(&self.job.observables),
            times: self.times,
            rows: self.rows,
            layout,
            qubits: None,
            lcu: None,
            max_trace_error: self.max_trace_error,
            wall_time_s: start.elapsed().as_secs_f64(),
        }
    }
}

/// Whether `method` can represent the job's environments.
pub fn check_compatible(job: &ModelJob, method: Method) -> Result<()> {
    if method != Method::Pseudomode {
        return Ok(());
    }
    if job.statistics() != Statistics::Bosonic {
        return Err(Error::IncompatibleMethods(
            "pseudomodes need bosonic environments".into(),
        ));
    }
    for env in &job.environments {
        if let Some(m) = env.modes.modes().iter().find(|m| m.eta.im != 0.0 || m.gamma.im != 0.0) {
            return Err(Error::IncompatibleMethods(format!(
                "pseudomodes need real modes; `{}` has eta = {}, gamma = {}",
                env.label, m.eta, m.gamma
            )));
        }
    }
    Ok(())
}

/// Runs one method on a job.
pub fn run_method(job: &ModelJob, method: Method) -> Result<RunOutput> {
    check_compatible(job, method)?;
    let start = Instant::now();
    let gen = job.generator()?;
    let state = job.initial_state(&gen)?;
    let layout = &gen.layout;
    let mut rec = Recorder::new(job);
    match method {
        Method::Classical => {
            propagate_with(&gen, &state, &job.propagation, |t, s| rec.record(layout, t, s))?;
            Ok(rec.finish(method, LayoutSummary::of(layout, layout.dim()), start))
        }
        Method::Heom => run_heom(job, &gen, rec, start),
        Method::Qsim => {
            let regs = RegisterLayout::new(layout);
            let stats = run_lcu_with(
                &gen,
                &state,
                job.lcu,
                job.propagation.t_final,
                job.propagation.stride,
                |t, s| rec.record(layout, t, s),
            )?;
            let mut out = rec.finish(method, LayoutSummary::of(layout, 2 << regs.data_qubits), start);
            out.qubits = Some(regs.total_qubits());
            out.lcu = Some(stats);
            Ok(out)
        }
        Method::Pseudomode => {
            let cap = job.truncation.n_max + 1;
            let pg = build_pseudomode_generator(&job.system, &job.environments, cap)?;
            let mut y = pg.initial_state(&job.rho0_flat())?;
            let cfg = &job.propagation;
            let n_steps = cfg.validate()?;
            let mut stepper = Rk4::new(
                |x: &[Complex64], o: &mut [Complex64]| pg.rate.matvec(x, o),
                y.len(),
                cfg.dt,
            );
            drive(&mut stepper, &mut y, cfg.dt, n_steps, cfg.stride, |t, data| {
                let s = extract_rdt(&pg, data, layout)?;
                rec.record(layout, t, &s)
            })?;
            Ok(rec.finish(method, LayoutSummary::of(layout, pg.state_dim()), start))
        }
    }
}

fn run_heom(job: &ModelJob, gen: &Generator, mut rec: Recorder<'_>, start: Instant) -> Result<RunOutput> {
    let layout = &gen.layout;
    let cfg = &job.propagation;
    let n_steps = cfg.validate()?;
    let rho0 = job.rho0_flat();
    let sys = &job.system;
    let envs: &[Environment] = &job.environments;
    match sys.statistics {
        Statistics::Bosonic => {
            let heom = BosonicHeom::new(sys, envs, job.truncation, false)?;
            let mut y = heom.initial_state(&rho0)?;
            let mut stepper = Rk4::new(|x: &[Complex64], o: &mut [Complex64]| heom.rhs(x, o), y.len(), cfg.dt);
            drive(&mut stepper, &mut y, cfg.dt, n_steps, cfg.stride, |t, data| {
                let s = RdtState::from_data(layout, heom.to_rdt(data, layout)?)?;
                rec.record(layout, t, &s)
            })?;
            Ok(rec.finish(Method::Heom, LayoutSummary::of(layout, heom.state_len()), start))
        }
        Statistics::Fermionic => {
            let heom = FermionicHeom::new(sys, envs)?;
            let parity = sys.parity.as_ref().ok_or_else(|| Error::invalid("parity", "missing"))?;
            let mut y = heom.initial_state(&rho0)?;
            let mut stepper = Rk4::new(|x: &[Complex64], o: &mut [Complex64]| heom.rhs(x, o), y.len(), cfg.dt);
            drive(&mut stepper, &mut y, cfg.dt, n_steps, cfg.stride, |t, data| {
                let s = RdtState::from_data(layout, heom.to_rdt(data, layout, parity)?)?;
                rec.record(layout, t, &s)
            })?;
            Ok(rec.finish(Method::Heom, LayoutSummary::of(layout, heom.state_len()), start))
        }
    }
}

/// Difference of one column between two runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnDiff {
    pub column: String,
    pub max_abs: f64,
    pub rms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub reference: Method,
    pub method: Method,
    pub points: usize,
    pub columns: Vec<ColumnDiff>,
}

impl PairReport {
    pub fn max_abs(&self) -> f64 {
        self.columns.iter().map(|c| c.max_abs).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub gate: f64,
    pub pairs: Vec<PairReport>,
    pub passed: bool,
}

const TIME_MATCH: f64 = 1e-9;

/// Column differences of `other` against `reference` on their common times.
pub fn diff_runs(reference: &RunOutput, other: &RunOutput) -> Result<PairReport> {
    if reference.columns != other.columns {
        return Err(Error::IncompatibleMethods("runs report different observables".into()));
    }
    let mut pairs = Vec::new();
    let mut j = 0;
    for (i, &t) in reference.times.iter().enumerate() {
        while j < other.times.len() && other.times[j] < t - TIME_MATCH {
            j += 1;
        }
        if j < other.times.len() && (other.times[j] - t).abs() <= TIME_MATCH {
            pairs.push((i, j));
        }
    }
    if pairs.is_empty() {
        return Err(Error::IncompatibleMethods("runs share no output times".into()));
    }
    let columns = reference
        .columns
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let (mut max_abs, mut sq) = (0.0f64, 0.0);
            for &(i, j) in &pairs {
                let d = (reference.rows[i][c] - other.rows[j][c]).abs();
                max_abs = max_abs.max(d);
                sq += d * d;
            }
            ColumnDiff {
                column: name.clone(),
                max_abs,
                rms: (sq / pairs.len() as f64).sqrt(),
            }
        })
        .collect();
    Ok(PairReport {
        reference: reference.method,
        method: other.method,
        points: pairs.len(),
        columns,
    })
}

/// Runs every method and compares each against the first.
pub fn compare(job: &ModelJob, methods: &[Method], gate: f64) -> Result<(CompareReport, Vec<RunOutput>)> {
    if methods.len() < 2 {
        return Err(Error::config("methods", "compare needs at least two methods"));
    }
    for &m in methods {
        check_compatible(job, m)?;
    }
    let runs = methods
        .iter()
        .map(|&m| run_method(job, m))
        .collect::<Result<Vec<_>>>()?;
    let pairs = runs[1..]
        .iter()
        .map(|r| diff_runs(&runs[0], r))
        .collect::<Result<Vec<_>>>()?;
    let passed = pairs.iter().all(|p| p.max_abs() <= gate);
    Ok((CompareReport { gate, pairs, passed }, runs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub value: f64,
    /// Max-abs deviation from the classical reference over all real columns.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub parameter: SweepParameter,
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `ln error` against `ln value`.
    pub slope: f64,
    /// `error[i] / error[i + 1]` for consecutive points.
    pub ratios: Vec<f64>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn check_sweep(values: &[f64]) -> Result<()> {
    if values.len() < 3 {
        return Err(Error::config(
            "sweep.values",
            "a scaling study needs at least three points",
        ));
    }
    if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::config("sweep.values", "values must be positive"));
    }
    let r0 = values[1] / values[0];
    if (r0 - 1.0).abs() < 1e-12 || values.windows(2).any(|w| ((w[1] / w[0]) / r0 - 1.0).abs() > 1e-6) {
        return Err(Error::config("sweep.values", "values must be geometrically spaced"));
    }
    Ok(())
}

fn real_max_abs(reference: &RunOutput, other: &RunOutput) -> Result<f64> {
    let report = diff_runs(reference, other)?;
    Ok(report
        .columns
        .iter()
        .filter(|c| !c.column.ends_with("_im") && !c.column.ends_with("_re"))
        .map(|c| c.max_abs)
        .fold(0.0, f64::max))
}

/// Circuit error against the classical propagation as a function of the
/// LCU angle or the time step.
///
/// An `epsilon` sweep compares with the classical run at the job's `dt`.
/// A `dt` sweep keeps the job's output interval, runs the classical
/// reference at a quarter of the smallest `dt`, and holds `epsilon` fixed.
pub fn scaling_study(job: &ModelJob, parameter: SweepParameter, values: &[f64]) -> Result<ScalingReport> {
    check_sweep(values)?;
    let interval = job.propagation.dt * job.propagation.stride as f64;
    let stride_for = |dt: f64| -> Result<usize> {
        let s = (interval / dt).round();
        if s < 1.0 || ((s * dt) / interval - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "sweep.values",
                format!("dt = {dt} does not divide the output interval {interval}"),
            ));
        }
        Ok(s as usize)
    };
    let mut points = Vec::with_capacity(values.len());
    match parameter {
        SweepParameter::Epsilon => {
            let reference = run_method(job, Method::Classical)?;
            for &eps in values {
                let mut j = job.clone();
                j.lcu = LcuConfig {
                    epsilon: eps,
                    ..job.lcu
                };
                j.lcu.validate()?;
                let run = run_method(&j, Method::Qsim)?;
                points.push(ScalingPoint {
                    value: eps,
                    error: real_max_abs(&reference, &run)?,
                });
            }
        }
        SweepParameter::Dt => {
            let finest = values.iter().copied().fold(f64::INFINITY, f64::min) / 4.0;
            let mut r = job.clone();
            r.propagation = PropagationConfig {
                dt: finest,
                stride: stride_for(finest)?,
                ..job.propagation
            };
            let reference = run_method(&r, Method::Classical)?;
            for &dt in values {
                let mut j = job.clone();
                j.propagation = PropagationConfig {
                    dt,
                    stride: stride_for(dt)?,
                    ..job.propagation
                };
                j.lcu.dt = dt;
                let run = run_method(&j, Method::Qsim)?;
                points.push(ScalingPoint {
                    value: dt,
                    error: real_max_abs(&reference, &run)?,
                });
            }
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.value).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.error).collect();
    if ys.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::invalid("sweep", "an error of exactly zero has no logarithm"));
    }
    let ratios = ys.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(ScalingReport {
        parameter,
        slope: log_slope(&xs, &ys),
        points,
        ratios,
    })
}

/// CSV text: header `t,<columns>` then one row per output time, numbers in
/// shortest round-trip form.
pub fn csv(run: &RunOutput) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(run.columns.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (t, row) in run.times.iter().zip(&run.rows) {
        let mut rec = vec![t.to_string()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Run manifest written next to the CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub model: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub layout: LayoutSummary,
    pub qubits: Option<usize>,
    pub method: Method,
    pub wall_time_s: f64,
    pub versions: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(job: &ModelJob, run: &RunOutput) -> Self {
        let mut parameters: BTreeMap<String, serde_json::Value> =
            job.parameters.iter().map(|(k, v)| (k.clone(), (*v).into())).collect();
        if let Some(r) = job.regime {
            parameters.insert("regime".into(), r.as_str().into());
        }
        parameters.insert("dt".into(), job.propagation.dt.into());
        parameters.insert("t_final".into(), job.propagation.t_final.into());
        parameters.insert("stride".into(), job.propagation.stride.into());
        parameters.insert(
            "integrator".into(),
            serde_json::to_value(job.propagation.integrator).expect("serializes"),
        );
        if run.method == Method::Qsim {
            parameters.insert("lcu".into(), serde_json::to_value(job.lcu).expect("serializes"));
            if let Some(stats) = &run.lcu {
                parameters.insert("shots".into(), stats.shots.into());
                parameters.insert("min_success".into(), stats.min_success.into());
            }
        }
        let mut versions = BTreeMap::new();
        versions.insert("dissipaton".into(), env!("CARGO_PKG_VERSION").into());
        Self {
            model: job.model.clone(),
            parameters,
            layout: run.layout.clone(),
            qubits: run.qubits,
            method: run.method,
            wall_time_s: run.wall_time_s,
            versions,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{instantiate_model, ModelName, Regime};

    fn short(name: ModelName, regime: Regime, t_final: f64) -> ModelJob {
        let mut o = BTreeMap::new();
        o.insert("t_final".to_string(), t_final);
        instantiate_model(name, regime, &o).unwrap()
    }

    #[test]
    fn slope_of_exact_power_law() {
        let x = [0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v * v).collect();
        assert!((log_slope(&x, &y) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sweeps_need_three_geometric_points() {
        assert!(matches!(check_sweep(&[0.1, 0.05]), Err(Error::Config { .. })));
        assert!(matches!(check_sweep(&[0.1, 0.05, 0.02]), Err(Error::Config { .. })));
        check_sweep(&[0.1, 0.05, 0.025]).unwrap();
    }

    #[test]
    fn classical_and_heom_agree_on_spin_boson() {
        let job = short(ModelName::SpinBoson, Regime::High, 1.0);
        let (report, runs) = compare(&job, &[Method::Classical, Method::Heom], 1e-8).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(runs[0].times.len(), 11);
        assert!(runs[0].max_trace_error < 1e-12);
    }

    #[test]
    fn pseudomode_rejects_complex_tables() {
        let job = short(ModelName::SpinBoson, Regime::High, 1.0);
        assert!(matches!(
            compare(&job, &[Method::Classical, Method::Pseudomode], 1.0),
            Err(Error::IncompatibleMethods(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let job = short(ModelName::SpinBoson, Regime::High, 0.2);
        let run = run_method(&job, Method::Classical).unwrap();
        let text = csv(&run);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,P1_minus_P0,P0,P1"));
        assert_eq!(lines.next(), Some("0,1,0,1"));
        assert_eq!(text.lines().count(), 4);
        let manifest = Manifest::new(&job, &run);
        let v: serde_json::Value = serde_json::from_str(&manifest.to_json()).unwrap();
        for key in [
            "model",
            "parameters",
            "layout",
            "qubits",
            "method",
            "wall_time_s",
            "versions",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
