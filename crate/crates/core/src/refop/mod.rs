//! Partial-wave resolvent kernels of the reference operator: a field `α/r` on
//! the unit disc and zero outside, with vector potential `a₀(r) = α` for
//! `r < 1` and `α/r` for `r ≥ 1` (radial gauge).
//!
//! Channel `m` carries the angular factor `e^{imθ}` and the radial operator
//! `h_m F = −F'' − F'/r + (m/r + a₀)² F` on `L²(r dr)`. Kernels are given in
//! that measure; the two-dimensional kernel is `(1/2π) Σ_m R^m e^{im(θ−θ')}`.

pub mod channel;
pub mod interior;
pub mod threshold;

pub use channel::{channel_kernel, full_kernel, matching_coefficients, ChannelEval, ChannelSolution, FullKernel, Matching};
pub use interior::{interior_solutions, Frobenius, InteriorValues};
pub use threshold::{
    remainder_kernel, threshold_g0, threshold_g1, threshold_integer, ChannelConstants, IntegerKernel,
    ThresholdConstants,
};

use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

const SNAP: f64 = 1e-12;

/// Minimizer(s) of `|k + α|` over the integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KStar {
    Unique(i64),
    /// `μ = 1/2`: both minimizers, the smaller first.
    Tie(i64, i64),
}

impl KStar {
    /// The unique minimizer, or the larger one on a tie.
    pub fn primary(&self) -> i64 {
        match *self {
            KStar::Unique(k) => k,
            KStar::Tie(_, k) => k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxParams {
    pub alpha: f64,
    pub mu: f64,
    pub k_star: KStar,
    pub integer_flux: bool,
}

impl FluxParams {
    pub fn is_tie(&self) -> bool {
        matches!(self.k_star, KStar::Tie(..))
    }

    /// `k(α)`; errors on a tie.
    pub fn k(&self) -> Result<i64> {
        match self.k_star {
            KStar::Unique(k) => Ok(k),
            KStar::Tie(a, b) => Err(Error::Unsupported(format!("mu = 1/2: k(alpha) is {a} or {b}"))),
        }
    }

    /// `ν_m = |m + α|`.
    pub fn nu(&self, m: i64) -> f64 {
        (m as f64 + self.alpha).abs()
    }
}

/// `μ(α) = min_k |k + α|` and its minimizer. Distances within `1e-12` of 0 or
/// 1/2 snap to those values.
pub fn flux_params(alpha: f64) -> Result<FluxParams> {
    if !alpha.is_finite() || alpha.abs() > 50.0 {
        return Err(Error::Domain(format!("alpha = {alpha} outside [-50, 50]")));
    }
    let near = alpha.round();
    let mut mu = (alpha - near).abs();
    let k_star = if (mu - 0.5).abs() <= SNAP {
        mu = 0.5;
        let lo = -(alpha.floor());
        let hi = -(alpha.ceil());
        let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
        KStar::Tie(a as i64, b as i64)
    } else {
        if mu <= SNAP {
            mu = 0.0;
        }
        KStar::Unique(-near as i64)
    };
    Ok(FluxParams { alpha, mu, k_star, integer_flux: mu == 0.0 })
}

/// Boundary value of the resolvent: `λ + i0` or `λ − i0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "+i0" => Ok(Side::Plus),
            "-" | "minus" | "-i0" => Ok(Side::Minus),
            _ => Err(Error::Domain(format!("unknown side {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: f64,
    pub side: Side,
}

impl SpectralPoint {
    pub fn new(lambda: f64, side: Side) -> Result<Self> {
        if !lambda.is_finite() || lambda == 0.0 {
            return Err(Error::Domain(format!("spectral parameter lambda = {lambda} must be finite and nonzero")));
        }
        Ok(SpectralPoint { lambda, side })
    }

    pub fn plus(lambda: f64) -> Result<Self> {
        Self::new(lambda, Side::Plus)
    }

    /// `κ = √(α² − λ)`, principal branch (`i√(λ − α²)` above `α²`).
    pub fn kappa(&self, alpha: f64) -> C64 {
        let q = alpha * alpha - self.lambda;
        if q >= 0.0 {
            C64::new(q.sqrt(), 0.0)
        } else {
            C64::new(0.0, (-q).sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_examples() {
        let f = flux_params(2.3).unwrap();
        assert!((f.mu - 0.3).abs() < 1e-14);
        assert_eq!(f.k_star, KStar::Unique(-2));
        assert!(!f.integer_flux);
        let f = flux_params(3.0).unwrap();
        assert_eq!(f.mu, 0.0);
        assert!(f.integer_flux);
        assert_eq!(f.k().unwrap(), -3);
        let f = flux_params(0.5).unwrap();
        assert_eq!(f.mu, 0.5);
        assert_eq!(f.k_star, KStar::Tie(-1, 0));
        assert!(f.k().is_err());
        let f = flux_params(-1.7).unwrap();
        assert!((f.mu - 0.3).abs() < 1e-14);
        assert_eq!(f.k().unwrap(), 2);
        assert!(flux_params(51.0).is_err());
    }

    #[test]
    fn kappa_branches() {
        let p = SpectralPoint::plus(0.01).unwrap();
        assert_eq!(p.kappa(0.3), C64::new((0.09f64 - 0.01).sqrt(), 0.0));
        let p = SpectralPoint::plus(1.0).unwrap();
        assert!((p.kappa(0.3) - C64::new(0.0, 0.91f64.sqrt())).norm() < 1e-15);
        assert!(SpectralPoint::plus(0.0).is_err());
    }
}
