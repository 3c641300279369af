//! Least-squares fits on log–log data.

use crate::C64;
use serde::{Deserialize, Serialize};

/// Straight-line fit `log y = slope·log x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub max_residual: f64,
    /// All samples were exactly zero; `slope` is `−∞`.
    pub exact: bool,
    pub nodes: usize,
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, r², max |residual|)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(u, v)| (v - a * u - b).powi(2)).sum();
    let maxr = x.iter().zip(y).map(|(u, v)| (v - a * u - b).abs()).fold(0.0, f64::max);
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (a, b, r2, maxr)
}

/// Slope of `log|y|` against `log x`, skipping zero samples.
/// Samples are assumed ordered by increasing `x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> SlopeFit {
    let (lx, ly): (Vec<f64>, Vec<f64>) =
        x.iter().zip(y).filter(|(_, v)| v.abs() > 0.0).map(|(u, v)| (u.ln(), v.abs().ln())).unzip();
    if lx.is_empty() {
        return SlopeFit {
            slope: f64::NEG_INFINITY,
            intercept: f64::NEG_INFINITY,
            r_squared: 1.0,
            max_residual: 0.0,
            exact: true,
            nodes: 0,
        };
    }
    if lx.len() == 1 {
        // one nonzero sample followed by exact zeros: faster than any power
        return SlopeFit { slope: f64::NEG_INFINITY, intercept: ly[0], r_squared: 0.0, max_residual: 0.0, exact: false, nodes: 1 };
    }
    let (slope, intercept, r_squared, max_residual) = linear_fit(&lx, &ly);
    SlopeFit { slope, intercept, r_squared, max_residual, exact: false, nodes: lx.len() }
}

/// `y ≈ c·x^p` with `p` fitted on magnitudes and the complex `c` by least
/// squares at that `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub coefficient: C64,
    pub r_squared: f64,
    pub max_residual: f64,
}

pub fn power_law(x: &[f64], y: &[C64]) -> PowerLawFit {
    let mags: Vec<f64> = y.iter().map(|v| v.norm()).collect();
    let s = loglog_slope(x, &mags);
    let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let w = xi.powf(s.slope);
        num += yi * w;
        den += w * w;
    }
    PowerLawFit { exponent: s.slope, coefficient: num / den, r_squared: s.r_squared, max_residual: s.max_residual }
}

/// Complex coefficient of `y ≈ c·x^p` at a fixed `p`:
/// `c = Σ y x^p / Σ x^{2p}`, and the relative residual of the model.
pub fn fixed_exponent_coefficient(x: &[f64], y: &[C64], p: f64) -> (C64, f64) {
    let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let w = xi.powf(p);
        num += yi * w;
        den += w * w;
    }
    let c = num / den;
    let res = x.iter().zip(y).map(|(xi, yi)| (yi - c * xi.powf(p)).norm() / yi.norm().max(1e-300)).fold(0.0, f64::max);
    (c, res)
}

/// Logarithmically spaced nodes, both ends included.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zeros_are_exact() {
        let f = loglog_slope(&[1.0, 2.0], &[0.0, 0.0]);
        assert!(f.exact && f.slope == f64::NEG_INFINITY);
    }

    #[test]
    fn complex_coefficient() {
        let x = logspace(1.0, 100.0, 9);
        let c = C64::new(0.3, -1.2);
        let y: Vec<C64> = x.iter().map(|t| c * t.powf(-1.3)).collect();
        let f = power_law(&x, &y);
        assert!((f.exponent + 1.3).abs() < 1e-12 && (f.coefficient - c).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn recovers_power(p in -4.0f64..4.0, c in 0.01f64..100.0) {
            let x = logspace(1e-3, 10.0, 8);
            let y: Vec<f64> = x.iter().map(|t| c * t.powf(p)).collect();
            let f = loglog_slope(&x, &y);
            prop_assert!((f.slope - p).abs() < 1e-9);
            prop_assert!((f.intercept - c.ln()).abs() < 1e-8);
            prop_assert!(f.r_squared > 1.0 - 1e-12);
        }
    }
}
