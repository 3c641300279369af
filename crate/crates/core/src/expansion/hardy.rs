//! Numerical probe of the magnetic Hardy inequality `H(B) ≥ C_h / w`.
//!
//! For a real trial function `u` the form is
//! `Q[u] = ∫ |∇u|² + |A|² u²` with `A` the flux-matched gauge, and the probe
//! reports `Q[u] / ∫ u²/w` over a family of Gaussian bumps. The minimum over
//! the family bounds `C_h` from above; it proves nothing from below.

use crate::fit::{loglog_slope, SlopeFit};
use crate::gauge::{CorrectedGauge, Field};
use crate::quad::gauss_legendre_on;
use crate::{par, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const RADIAL_PANELS: usize = 28;
const RADIAL_ORDER: usize = 12;
const ANGLES: usize = 96;
/// Trials are integrated out to this many widths from their center.
const REACH: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HardyWeight {
    /// `1 + |x|²`.
    Polynomial,
    /// `1 + |x|² log²|x|`.
    Logarithmic,
}

impl HardyWeight {
    /// The weight attached to flux `α`: logarithmic iff `α ∈ ℤ`.
    pub fn for_flux(alpha: f64) -> Self {
        if (alpha - alpha.round()).abs() < 1e-9 {
            HardyWeight::Logarithmic
        } else {
            HardyWeight::Polynomial
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        match self {
            HardyWeight::Polynomial => 1.0 + r2,
            HardyWeight::Logarithmic => {
                if r2 == 0.0 {
                    1.0
                } else {
                    1.0 + r2 * (0.5 * r2.ln()).powi(2)
                }
            }
        }
    }
}

/// `u(x) = exp(−|x − c|² / (2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTrial {
    pub center: [f64; 2],
    pub width: f64,
}

impl GaussianTrial {
    pub fn centered(width: f64) -> Self {
        GaussianTrial { center: [0.0, 0.0], width }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HardyRatio {
    pub trial: GaussianTrial,
    pub kinetic: f64,
    pub magnetic: f64,
    pub weighted_mass: f64,
    pub ratio: f64,
}

impl HardyRatio {
    /// `∫|A|²u² / ∫u²/w`, the part of the ratio that survives spreading.
    pub fn magnetic_ratio(&self) -> f64 {
        self.magnetic / self.weighted_mass
    }
}

/// `Q[u] / ∫ u²/w` for one trial.
pub fn hardy_ratio(gauge: &CorrectedGauge, weight: HardyWeight, trial: &GaussianTrial) -> Result<HardyRatio> {
    let sigma = trial.width;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("trial width must be positive, got {sigma}")));
    }
    let s2 = sigma * sigma;
    let (mut kinetic, mut magnetic, mut mass) = (0.0, 0.0, 0.0);
    let h = REACH * sigma / RADIAL_PANELS as f64;
    for p in 0..RADIAL_PANELS {
        let (rho, rw) = gauss_legendre_on(RADIAL_ORDER, p as f64 * h, (p + 1) as f64 * h);
        for (&r, &w) in rho.iter().zip(&rw) {
            let u2 = (-r * r / s2).exp();
            // |∇u|² = (ρ/σ²)² u², radial in the trial's own frame.
            kinetic += 2.0 * PI * w * r * (r / s2).powi(2) * u2;
            let (mut a2, mut inv_w) = (0.0, 0.0);
            for k in 0..ANGLES {
                let th = 2.0 * PI * k as f64 / ANGLES as f64;
                let x = [trial.center[0] + r * th.cos(), trial.center[1] + r * th.sin()];
                let a = gauge.potential(x)?;
                a2 += a[0] * a[0] + a[1] * a[1];
                inv_w += 1.0 / weight.eval(x);
            }
            let dth = 2.0 * PI / ANGLES as f64;
            magnetic += w * r * u2 * a2 * dth;
            mass += w * r * u2 * inv_w * dth;
        }
    }
    Ok(HardyRatio { trial: *trial, kinetic, magnetic, weighted_mass: mass, ratio: (kinetic + magnetic) / mass })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HardySweep {
    pub alpha: f64,
    pub weight: HardyWeight,
    pub ratios: Vec<HardyRatio>,
    pub min_ratio: f64,
    /// Log–log slope of the centered-trial ratio against the width.
    pub width_slope: Option<SlopeFit>,
}

/// Ratios over a trial family. `weight = None` uses the weight of the flux.
pub fn hardy_sweep(field: &Field, weight: Option<HardyWeight>, trials: &[GaussianTrial]) -> Result<HardySweep> {
    let gauge = CorrectedGauge::new(*field, None)?;
    let weight = weight.unwrap_or_else(|| HardyWeight::for_flux(gauge.alpha));
    let ratios = par::map(trials, |t| hardy_ratio(&gauge, weight, t)).into_iter().collect::<Result<Vec<_>>>()?;
    let min_ratio = ratios.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let centered: Vec<&HardyRatio> = ratios.iter().filter(|r| r.trial.center == [0.0, 0.0]).collect();
    let width_slope = (centered.len() >= 3).then(|| {
        let w: Vec<f64> = centered.iter().map(|r| r.trial.width).collect();
        let q: Vec<f64> = centered.iter().map(|r| r.ratio).collect();
        loglog_slope(&w, &q)
    });
    Ok(HardySweep { alpha: gauge.alpha, weight, ratios, min_ratio, width_slope })
}

/// Centered trials of widths `widths` plus off-center ones at each offset.
pub fn default_trials(widths: &[f64], offsets: &[f64]) -> Vec<GaussianTrial> {
    let mut t: Vec<GaussianTrial> = widths.iter().map(|&w| GaussianTrial::centered(w)).collect();
    for &d in offsets {
        for &w in widths {
            t.push(GaussianTrial { center: [d, 0.0], width: w });
        }
    }
    t
}
