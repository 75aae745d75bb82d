// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Classical time propagation of the reduced density tensor.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::SparseOperator;
use crate::error::{Error, Result};
use crate::generator::{Generator, RdtLayout};
use crate::linalg::{dense_matvec, expm_sparse, ExpmAction};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest dimension for which a dense propagator matrix is formed.
pub const DENSE_LIMIT: usize = 4096;

/// Vectorized reduced density tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct RdtState {
    pub system_dim: usize,
    pub dissipaton_dim: usize,
    pub data: Vec<Complex64>,
}

impl RdtState {
    /// `rho_s` in the vacuum block, every dissipaton configuration empty.
    pub fn product(layout: &RdtLayout, rho_s: &Array2<Complex64>) -> Result<Self> {
        let d = layout.system_dim;
        if rho_s.dim() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rho_s.nrows(),
            });
        }
        let mut data = vec![ZERO; layout.dim()];
        for i in 0..d {
            for j in 0..d {
                data[layout.index(i, j, 0)] = rho_s[[i, j]];
            }
        }
        Ok(Self {
            system_dim: d,
            dissipaton_dim: layout.dissipaton_dim(),
            data,
        })
    }

    pub fn from_data(layout: &RdtLayout, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: data.len(),
            });
        }
        Ok(Self {
            system_dim: layout.system_dim,
            dissipaton_dim: layout.dissipaton_dim(),
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    /// Block of a given dissipaton configuration, unnormalized.
    pub fn block(&self, config: usize) -> Array2<Complex64> {
        let d = self.system_dim;
        Array2::from_shape_fn((d, d), |(i, j)| self.data[(i * d + j) * self.dissipaton_dim + config])
    }

    /// Vacuum block, unnormalized.
    pub fn vacuum_block(&self) -> Array2<Complex64> {
        self.block(0)
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.system_dim;
        (0..d).map(|i| self.data[(i * d + i) * self.dissipaton_dim]).sum()
    }

    /// Vacuum block divided by its trace.
    pub fn reduced_density(&self) -> Result<Array2<Complex64>> {
        let tr = self.trace();
        if tr.norm() < 1e-300 || !tr.re.is_finite() {
            return Err(Error::ZeroTrace(tr.norm()));
        }
        Ok(self.vacuum_block().mapv(|v| v / tr))
    }

    pub fn max_abs_diff(&self, other: &RdtState) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    Rk4,
    /// Dense `exp(-i Lambda dt)` formed once; limited to [`DENSE_LIMIT`].
    DenseExponential,
    /// Truncated-Taylor action of `exp(-i Lambda dt)` each step.
    ExpmAction,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub integrator: Integrator,
    /// Record every `stride` steps.
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_stride() -> usize {
    10
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_final: 10.0,
            integrator: Integrator::Rk4,
            stride: 10,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !(self.t_final >= self.dt && self.t_final.is_finite()) {
            return Err(Error::invalid("t_final", "must be at least one time step"));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride", "must be at least 1"));
        }
        Ok(self.n_steps())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// One step of a linear ODE `y' = A y`.
pub trait Stepper {
    fn step(&mut self, y: &mut Vec<Complex64>);
}

/// Classical fourth-order Runge-Kutta on a right-hand side closure.
pub struct Rk4<F: Fn(&[Complex64], &mut [Complex64])> {
    rhs: F,
    dt: f64,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl<F: Fn(&[Complex64], &mut [Complex64])> Rk4<F> {
    pub fn new(rhs: F, dim: usize, dt: f64) -> Self {
        Self {
            rhs,
            dt,
            k: [vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim]],
            tmp: vec![ZERO; dim],
        }
    }
}

impl<F: Fn(&[Complex64], &mut [Complex64])> Stepper for Rk4<F> {
    fn step(&mut self, y: &mut Vec<Complex64>) {
        let h = self.dt;
        let [k1, k2, k3, k4] = &mut self.k;
        (self.rhs)(y, k1);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + k1[i] * (h / 2.0);
        }
        (self.rhs)(&self.tmp, k2);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + k2[i] * (h / 2.0);
        }
        (self.rhs)(&self.tmp, k3);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + k3[i] * h;
        }
        (self.rhs)(&self.tmp, k4);
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

struct DenseStepper {
    m: Array2<Complex64>,
    tmp: Vec<Complex64>,
}

impl Stepper for DenseStepper {
    fn step(&mut self, y: &mut Vec<Complex64>) {
        dense_matvec(&self.m, y, &mut self.tmp);
        std::mem::swap(y, &mut self.tmp);
    }
}

struct ActionStepper {
    action: ExpmAction,
    dt: f64,
}

impl Stepper for ActionStepper {
    fn step(&mut self, y: &mut Vec<Complex64>) {
        self.action.apply(Complex64::new(self.dt, 0.0), y);
    }
}

/// Stepper for `y' = rate y` with the requested integrator.
pub fn linear_stepper<'a>(rate: &'a SparseOperator, integrator: Integrator, dt: f64) -> Result<Box<dyn Stepper + 'a>> {
    Ok(match integrator {
        Integrator::Rk4 => Box::new(Rk4::new(
            move |x: &[Complex64], y: &mut [Complex64]| rate.matvec(x, y),
            rate.dim(),
            dt,
        )),
        Integrator::DenseExponential => {
            if rate.dim() > DENSE_LIMIT {
                return Err(Error::invalid(
                    "integrator",
                    format!(
                        "dense exponential limited to dimension {DENSE_LIMIT}, got {}",
                        rate.dim()
                    ),
                ));
            }
            Box::new(DenseStepper {
                m: expm_sparse(rate, Complex64::new(dt, 0.0)),
                tmp: vec![ZERO; rate.dim()],
            })
        }
        Integrator::ExpmAction => Box::new(ActionStepper {
            action: ExpmAction::new(rate.clone()),
            dt,
        }),
    })
}

pub(crate) fn check_finite(y: &[Complex64], t: f64) -> Result<()> {
    if y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { time: t })
    }
}

/// Drives a stepper for `n_steps`, calling `observe(t, y)` at `t = 0` and
/// after every `stride` steps.
pub fn drive<S, O>(
    stepper: &mut S,
    y: &mut Vec<Complex64>,
    dt: f64,
    n_steps: usize,
    stride: usize,
    mut observe: O,
) -> Result<()>
where
    S: Stepper + ?Sized,
    O: FnMut(f64, &[Complex64]) -> Result<()>,
{
    observe(0.0, y)?;
    for s in 1..=n_steps {
        stepper.step(y);
        let t = s as f64 * dt;
        check_finite(y, t)?;
        if s % stride == 0 {
            observe(t, y)?;
        }
    }
    Ok(())
}

/// Recorded states of a propagation.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<RdtState>,
}

/// Propagates `d rho~/dt = -i Lambda rho~`, calling `observe` on every
/// recorded state.
pub fn propagate_with<O>(gen: &Generator, state: &RdtState, cfg: &PropagationConfig, mut observe: O) -> Result<RdtState>
where
    O: FnMut(f64, &RdtState) -> Result<()>,
{
    let n_steps = cfg.validate()?;
    if state.dim() != gen.layout.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.layout.dim(),
            found: state.dim(),
        });
    }
    let rate = gen.rate();
    let mut stepper = linear_stepper(&rate, cfg.integrator, cfg.dt)?;
    let mut current = state.clone();
    let mut y = std::mem::take(&mut current.data);
    let template = current.clone();
    drive(stepper.as_mut(), &mut y, cfg.dt, n_steps, cfg.stride, |t, data| {
        let snapshot = RdtState {
            data: data.to_vec(),
            ..template.clone()
        };
        observe(t, &snapshot)
    })?;
    current.data = y;
    Ok(current)
}

pub fn propagate(gen: &Generator, state: &RdtState, cfg: &PropagationConfig) -> Result<Trajectory> {
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
    };
    propagate_with(gen, state, cfg, |t, s| {
        traj.times.push(t);
        traj.states.push(s.clone());
        Ok(())
    })?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_decay_is_exact_under_dense_exponential() {
        let rate = SparseOperator::diagonal(&[Complex64::new(-0.5, 0.0), Complex64::new(-2.0, 1.0)]);
        let mut st = linear_stepper(&rate, Integrator::DenseExponential, 0.1).unwrap();
        let mut y = vec![Complex64::new(1.0, 0.0); 2];
        for _ in 0..10 {
            st.step(&mut y);
        }
        assert!((y[0] - (-0.5f64).exp()).norm() < 1e-14);
        assert!((y[1] - Complex64::new(-2.0, 1.0).exp()).norm() < 1e-14);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let rate = SparseOperator::from_triplets(
            2,
            vec![
                (0, 1, Complex64::new(0.0, -1.0)),
                (1, 0, Complex64::new(0.0, -1.0)),
                (1, 1, Complex64::new(-0.3, 0.0)),
            ],
        )
        .unwrap();
        let exact = {
            let mut y = vec![Complex64::new(1.0, 0.0), ZERO];
            ExpmAction::new(rate.clone()).apply(Complex64::new(2.0, 0.0), &mut y);
            y
        };
        let err = |dt: f64| {
            let mut st = linear_stepper(&rate, Integrator::Rk4, dt).unwrap();
            let mut y = vec![Complex64::new(1.0, 0.0), ZERO];
            for _ in 0..(2.0 / dt).round() as usize {
                st.step(&mut y);
            }
            (y[0] - exact[0]).norm().max((y[1] - exact[1]).norm())
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn config_validation() {
        let bad = PropagationConfig {
            dt: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let short = PropagationConfig {
            dt: 0.1,
            t_final: 0.05,
            ..Default::default()
        };
        assert!(short.validate().is_err());
        assert_eq!(PropagationConfig::default().validate().unwrap(), 1000);
    }
}
