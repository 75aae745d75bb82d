// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! `dissipaton` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use dissipaton::config::{JobConfig, Method, SweepParameter};
use dissipaton::models::{tabulated_modes, ModelJob, ModelName, Regime};
use dissipaton::modes::{decompose_spectral_density, ModeKind, ModeSet, SpectralDensity, Statistics};
use dissipaton::qsim::LcuCircuit;
use dissipaton::study::{compare, csv, run_method, scaling_study, Manifest, RunOutput};

/// Open-system dynamics through dissipatons: classical propagation,
/// hierarchical equations of motion, pseudomodes and circuit simulation.
///
/// Models: spin_boson, siam, excitonic_dimer, diam. Methods: classical,
/// heom, qsim, pseudomode.
#[derive(Parser, Debug)]
#[command(name = "dissipaton", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Propagate one job and write `<model>_<method>.csv` plus a JSON manifest.
    Run {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        method: Option<Method>,
    },
    /// Run several methods on one job and report their differences.
    Compare {
        #[command(flatten)]
        job: JobArgs,
        /// Reference method.
        #[arg(long)]
        method: Option<Method>,
        /// Methods compared with the reference (comma separated).
        #[arg(long, value_delimiter = ',')]
        against: Vec<Method>,
        /// Largest tolerated max-abs difference.
        #[arg(long)]
        gate: Option<f64>,
    },
    /// Circuit error against the classical propagation over a parameter sweep.
    Scaling {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long, value_parser = parse_sweep)]
        sweep: Option<SweepParameter>,
        /// Sweep values (comma separated, geometric).
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Print the exponential modes of a model table or a spectral density.
    Decompose {
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value = "high")]
        regime: String,
        /// Spectral density as JSON, e.g.
        /// '{"kind":"drude","lambda":0.5,"gamma":5,"temperature":1}'.
        #[arg(long)]
        density: Option<String>,
        /// Modes per branch.
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value = "bosonic", value_parser = parse_statistics)]
        statistics: Statistics,
    },
    /// Print the gate sequence of the circuit for a job.
    DumpCircuit {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
}

#[derive(Args, Debug)]
struct JobArgs {
    /// Built-in model name.
    #[arg(long)]
    model: Option<String>,
    /// Tabulated temperature regime: low or high.
    #[arg(long)]
    regime: Option<String>,
    /// JSON job file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed of the sampled-measurement mode.
    #[arg(long)]
    seed: Option<u64>,
    /// Model parameter override `key=value` (repeatable).
    #[arg(long = "set", value_parser = parse_assignment)]
    set: Vec<(String, f64)>,
}

fn parse_assignment(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_sweep(s: &str) -> std::result::Result<SweepParameter, String> {
    match s {
        "epsilon" => Ok(SweepParameter::Epsilon),
        "dt" => Ok(SweepParameter::Dt),
        _ => Err(format!("`{s}` is neither `epsilon` nor `dt`")),
    }
}

fn parse_statistics(s: &str) -> std::result::Result<Statistics, String> {
    match s {
        "bosonic" => Ok(Statistics::Bosonic),
        "fermionic" => Ok(Statistics::Fermionic),
        _ => Err(format!("`{s}` is neither `bosonic` nor `fermionic`")),
    }
}

impl JobArgs {
    fn load(&self) -> Result<JobConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                JobConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => JobConfig::default(),
        };
        if let Some(m) = &self.model {
            if cfg.system.is_some() {
                bail!("--model conflicts with the inline system of the config file");
            }
            cfg.model = Some(m.clone());
        }
        if let Some(r) = &self.regime {
            cfg.regime = Some(r.parse()?);
        }
        if let Some(seed) = self.seed {
            cfg.seed = Some(seed);
        }
        for (k, v) in &self.set {
            cfg.parameters.insert(k.clone(), *v);
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.display().to_string());
        }
        Ok(cfg)
    }
}

fn out_dir(cfg: &JobConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(cfg.out.as_deref().unwrap_or("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_run(dir: &Path, job: &ModelJob, run: &RunOutput) -> Result<PathBuf> {
    let stem = format!("{}_{}", job.model, run.method);
    let csv_path = dir.join(format!("{stem}.csv"));
    fs::write(&csv_path, csv(run)).with_context(|| format!("writing {}", csv_path.display()))?;
    let manifest = dir.join(format!("{stem}.json"));
    fs::write(&manifest, Manifest::new(job, run).to_json())
        .with_context(|| format!("writing {}", manifest.display()))?;
    Ok(csv_path)
}

fn modes_json(set: &ModeSet) -> serde_json::Value {
    let modes: Vec<_> = set
        .modes()
        .iter()
        .map(|m| {
            let mut v = json!({ "eta": [m.eta.re, m.eta.im], "gamma": [m.gamma.re, m.gamma.im] });
            if let ModeKind::Fermion(s) = m.kind {
                v["sigma"] = serde_json::to_value(s).expect("serializes");
            }
            v
        })
        .collect();
    json!({ "generated": set.generated(), "modes": modes })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { job, method } => {
            let cfg = job.load()?;
            let method = method.or(cfg.method).unwrap_or(Method::Classical);
            let model = cfg.build()?;
            let output = run_method(&model, method)?;
            let path = write_run(&out_dir(&cfg)?, &model, &output)?;
            let qubits = output.qubits.map(|q| format!(", {q} qubits")).unwrap_or_default();
            println!(
                "{} ({} points{qubits}, {:.3} s)",
                path.display(),
                output.times.len(),
                output.wall_time_s
            );
        }
        Command::Compare {
            job,
            method,
            against,
            gate,
        } => {
            let cfg = job.load()?;
            let mut methods = cfg.method_list();
            let reference = method.or_else(|| methods.first().copied()).unwrap_or(Method::Classical);
            methods.retain(|x| *x != reference);
            methods.insert(0, reference);
            for m in against {
                if !methods.contains(&m) {
                    methods.push(m);
                }
            }
            let gate = gate.or(cfg.gate).unwrap_or(1e-8);
            let model = cfg.build()?;
            let (report, runs) = compare(&model, &methods, gate)?;
            let dir = out_dir(&cfg)?;
            for r in &runs {
                write_run(&dir, &model, r)?;
            }
            let text = serde_json::to_string_pretty(&report)?;
            fs::write(dir.join(format!("{}_compare.json", model.model)), &text)?;
            println!("{text}");
            if !report.passed {
                eprintln!("difference exceeds the gate {gate}");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Scaling { job, sweep, values } => {
            let cfg = job.load()?;
            let (parameter, values) = match (sweep, cfg.sweep.clone()) {
                (Some(p), _) => (p, values),
                (None, Some(s)) => (s.parameter, if values.is_empty() { s.values } else { values }),
                (None, None) => (SweepParameter::Epsilon, values),
            };
            let model = cfg.build()?;
            let report = scaling_study(&model, parameter, &values)?;
            let text = serde_json::to_string_pretty(&report)?;
            fs::write(out_dir(&cfg)?.join(format!("{}_scaling.json", model.model)), &text)?;
            println!("{text}");
        }
        Command::Decompose {
            model,
            regime,
            density,
            k,
            statistics,
        } => {
            let set = match (model, density) {
                (Some(m), None) => tabulated_modes(m.parse::<ModelName>()?, regime.parse::<Regime>()?)?,
                (None, Some(d)) => {
                    let d: SpectralDensity = serde_json::from_str(&d).context("parsing --density")?;
                    decompose_spectral_density(&d, k, statistics)?
                }
                _ => return Err(anyhow!("give exactly one of --model or --density")),
            };
            println!("{}", serde_json::to_string_pretty(&modes_json(&set))?);
        }
        Command::DumpCircuit { job, steps } => {
            let cfg = job.load()?;
            let model = cfg.build()?;
            let gen = model.generator()?;
            let circuit = LcuCircuit::new(&gen, model.lcu)?;
            print!("{}", circuit.describe(steps));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignments_parse() {
        assert_eq!(parse_assignment("lambda=0.2").unwrap(), ("lambda".into(), 0.2));
        assert!(parse_assignment("lambda").is_err());
        assert!(parse_assignment("lambda=x").is_err());
    }

    #[test]
    fn command_line_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
