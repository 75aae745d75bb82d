// Copyright 2026 Dissipaton Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pole-plus-Matsubara decompositions of standard spectral densities.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{pair_conjugates, ExpMode, ModeSet, Sigma, Statistics, PAIRING_TOLERANCE};
use crate::error::{Error, Result};

/// Analytic spectral density families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralKind {
    /// `J(w) = 2 lambda w0^2 damping w / ((w^2 - w0^2)^2 + damping^2 w^2)`.
    Brownian { lambda: f64, omega0: f64, damping: f64 },
    /// `J(w) = 2 lambda gamma w / (w^2 + gamma^2)`.
    Drude { lambda: f64, gamma: f64 },
    /// `J(w) = coupling W^2 / ((w - mu)^2 + W^2)`, a band centered on the
    /// chemical potential.
    Lorentzian {
        coupling: f64,
        width: f64,
        #[serde(default)]
        mu: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    #[serde(flatten)]
    pub kind: SpectralKind,
    pub temperature: f64,
}

impl SpectralDensity {
    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    /// `J(w)` at real frequency.
    pub fn eval(&self, w: f64) -> f64 {
        match self.kind {
            SpectralKind::Brownian {
                lambda,
                omega0,
                damping,
            } => {
                let d = (w * w - omega0 * omega0).powi(2) + damping * damping * w * w;
                2.0 * lambda * omega0 * omega0 * damping * w / d
            }
            SpectralKind::Drude { lambda, gamma } => 2.0 * lambda * gamma * w / (w * w + gamma * gamma),
            SpectralKind::Lorentzian { coupling, width, mu } => {
                coupling * width * width / ((w - mu).powi(2) + width * width)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("temperature", self.temperature)?;
        match self.kind {
            SpectralKind::Brownian {
                lambda,
                omega0,
                damping,
            } => {
                positive("lambda", lambda)?;
                positive("omega0", omega0)?;
                positive("damping", damping)
            }
            SpectralKind::Drude { lambda, gamma } => {
                positive("lambda", lambda)?;
                positive("gamma", gamma)
            }
            SpectralKind::Lorentzian { coupling, width, mu } => {
                positive("coupling", coupling)?;
                positive("width", width)?;
                if mu.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("mu", "must be finite"))
                }
            }
        }
    }
}

const RESONANCE_TOL: f64 = 1e-10;

fn check_resonance(nu: f64, pole: f64) -> Result<()> {
    if (nu - pole).abs() <= RESONANCE_TOL * pole.abs().max(1.0) {
        Err(Error::ResonantMatsubara { nu, pole })
    } else {
        Ok(())
    }
}

/// Decomposes the thermal correlation function of `density` into `k`
/// exponential modes per branch: the spectral poles first, then Matsubara
/// terms. Fermionic densities give `k` modes for each sigma.
pub fn decompose_spectral_density(density: &SpectralDensity, k: usize, statistics: Statistics) -> Result<ModeSet> {
    density.validate()?;
    if k == 0 {
        return Err(Error::invalid("k", "at least one mode is required"));
    }
    let beta = density.beta();
    let i = Complex64::new(0.0, 1.0);
    let modes = match (density.kind, statistics) {
        (SpectralKind::Drude { lambda, gamma }, Statistics::Bosonic) => {
            let mut modes = vec![ExpMode::boson(
                Complex64::new(lambda * gamma / (beta * gamma / 2.0).tan(), -lambda * gamma),
                Complex64::new(gamma, 0.0),
            )];
            for j in 1..k {
                let nu = 2.0 * PI * j as f64 / beta;
                check_resonance(nu, gamma)?;
                let eta = 4.0 * lambda * gamma * nu / (beta * (nu * nu - gamma * gamma));
                modes.push(ExpMode::boson(Complex64::new(eta, 0.0), Complex64::new(nu, 0.0)));
            }
            modes
        }
        (
            SpectralKind::Brownian {
                lambda,
                omega0,
                damping,
            },
            Statistics::Bosonic,
        ) => {
            if k < 2 {
                return Err(Error::invalid(
                    "k",
                    "the Brownian density has two poles; k must be at least 2",
                ));
            }
            let root = Complex64::new(4.0 * omega0 * omega0 - damping * damping, 0.0).sqrt();
            let mut modes = Vec::with_capacity(k);
            for s in [1.0, -1.0] {
                let p = (-i * damping + s * root) / 2.0;
                let dprime = 4.0 * p * (p * p - omega0 * omega0) + 2.0 * damping * damping * p;
                let residue = 2.0 * lambda * omega0 * omega0 * damping * p / dprime;
                let bose = 1.0 / (1.0 - (-beta * p).exp());
                modes.push(ExpMode::boson(-2.0 * i * residue * bose, i * p));
            }
            for j in 1..=(k - 2) {
                let nu = 2.0 * PI * j as f64 / beta;
                for m in &modes[..2] {
                    if m.gamma.im.abs() <= RESONANCE_TOL * m.gamma.norm() {
                        check_resonance(nu, m.gamma.re)?;
                    }
                }
                let om2 = omega0 * omega0;
                let denom = beta * ((nu * nu + om2).powi(2) - nu * nu * damping * damping);
                let eta = -4.0 * lambda * om2 * damping * nu / denom;
                modes.push(ExpMode::boson(Complex64::new(eta, 0.0), Complex64::new(nu, 0.0)));
            }
            modes
        }
        (SpectralKind::Lorentzian { coupling, width, mu }, Statistics::Fermionic) => {
            let pole_eta = coupling * width / (1.0 + (i * beta * width).exp());
            let mut modes = Vec::with_capacity(2 * k);
            for sigma in [Sigma::Plus, Sigma::Minus] {
                // sigma = + carries exp(+i mu t), sigma = - carries exp(-i mu t)
                let shift = match sigma {
                    Sigma::Plus => -i * mu,
                    Sigma::Minus => i * mu,
                };
                modes.push(ExpMode::fermion(pole_eta, width + shift, sigma));
                for j in 1..k {
                    let nu = (2 * j - 1) as f64 * PI / beta;
                    check_resonance(nu, width)?;
                    let eta = -2.0 * i / beta * coupling * width * width / (width * width - nu * nu);
                    modes.push(ExpMode::fermion(eta, nu + shift, sigma));
                }
            }
            modes
        }
        (kind, stats) => {
            return Err(Error::invalid(
                "statistics",
                format!("{kind:?} cannot be decomposed with {stats:?} statistics"),
            ))
        }
    };
    Ok(pair_conjugates(modes, PAIRING_TOLERANCE)?.mark_generated())
}
