//! Power-law and log-law fits of `R₀(λ) − G₀` and of the remainder after the
//! first threshold coefficient.

use super::{gradient_norm, table_norm, threshold_factors, tri_sum, FactorTable, NormMethod, RadialGrid, Region};
use super::{pair_value, WeightedNormEstimate};
use crate::fit::{fixed_exponent_coefficient, power_law, PowerLawFit};
use crate::refop::threshold::g1_prefactor;
use crate::refop::{Side, SpectralPoint, ThresholdConstants};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which boundary value: `λ ± i0` for `λ > 0`, or the real axis below zero
/// (grid values are then `−|λ|`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdBranch {
    Above(Side),
    Below,
}

impl ThresholdBranch {
    fn point(self, lam: f64) -> Result<SpectralPoint> {
        match self {
            ThresholdBranch::Above(side) => SpectralPoint::new(lam, side),
            ThresholdBranch::Below => SpectralPoint::new(-lam, Side::Plus),
        }
    }

    /// `λ^μ` on this branch for grid magnitude `lam`.
    fn power(self, lam: f64, mu: f64) -> C64 {
        match self {
            ThresholdBranch::Above(_) => C64::new(lam.powf(mu), 0.0),
            ThresholdBranch::Below => C64::from_polar(lam.powf(mu), PI * mu),
        }
    }

    fn log(self, lam: f64) -> C64 {
        match self {
            ThresholdBranch::Above(_) => C64::new(lam.ln(), 0.0),
            ThresholdBranch::Below => C64::new(lam.ln(), PI),
        }
    }

    fn conjugated(self) -> bool {
        self == ThresholdBranch::Above(Side::Minus)
    }
}

/// Term weights `[R, G₀, coefficient]` of the remainder on `branch`.
fn remainder_weights(tc: &ThresholdConstants, m: i64, lam: f64, branch: ThresholdBranch) -> Result<Vec<C64>> {
    let one = C64::new(1.0, 0.0);
    let f = &tc.flux;
    let alpha = tc.alpha();
    if f.integer_flux {
        if m != -(alpha.round() as i64) {
            return Ok(vec![one, -one]);
        }
        let c = one / branch.log(lam);
        return Ok(vec![one, -one, -if branch.conjugated() { c.conj() } else { c }]);
    }
    if f.is_tie() {
        return Err(Error::Unsupported("remainder needs mu < 1/2".into()));
    }
    if m != f.k()? {
        return Ok(vec![one, -one]);
    }
    let pw = branch.power(lam, f.mu);
    let c = if branch.conjugated() {
        // conj(pw·pre·E E) = (conj(pw·pre)/pre)·(pre E E)
        let pre = g1_prefactor(f.mu);
        (pw * pre).conj() / pre
    } else {
        pw
    };
    Ok(vec![one, -one, -c])
}

fn check_grid(lambdas: &[f64], lo: f64, hi: f64, min_nodes: usize) -> Result<()> {
    if lambdas.len() < min_nodes {
        return Err(Error::Domain(format!("need at least {min_nodes} lambda nodes, got {}", lambdas.len())));
    }
    if lambdas.iter().any(|&l| !(l >= lo && l <= hi)) {
        return Err(Error::Domain(format!("lambda grid must lie in [{lo:e}, {hi:e}]")));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("lambda grid must be increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub alpha: f64,
    pub mu: f64,
    pub s: f64,
    pub branch: ThresholdBranch,
    pub lambdas: Vec<f64>,
    /// `sup_m ‖ρ^{−s}(R^m(λ) − G_{m,0})ρ^{−s}‖`.
    pub leading_norms: Vec<f64>,
    /// Same for the remainder after `λ^μ g₁`.
    pub remainder_norms: Vec<f64>,
    /// Fits omit the largest-`λ` node.
    pub leading: PowerLawFit,
    pub remainder: PowerLawFit,
    pub leading_pass: bool,
    pub remainder_pass: bool,
    /// Both fits have `r² ≥ 0.99`.
    pub fit_quality: bool,
}

/// Fits `‖R₀(λ) − G₀‖ ∼ λ^p` (expect `p = μ`) and the remainder after
/// `λ^μ G₁` (expect `p ≥ μ + 0.1`), norms taken as the supremum over
/// channels `k(α) ± halfwidth`.
pub fn threshold_fit(
    alpha: f64,
    s: f64,
    lambdas: &[f64],
    branch: ThresholdBranch,
    grid: &RadialGrid,
    halfwidth: i64,
) -> Result<ThresholdFit> {
    check_grid(lambdas, 1e-10, 1e-2, 8)?;
    let tc = ThresholdConstants::cached(alpha, halfwidth.max(2))?;
    let f = tc.flux;
    if f.integer_flux || f.is_tie() {
        return Err(Error::Unsupported(format!("threshold_fit needs non-integer alpha with mu < 1/2 (alpha = {alpha})")));
    }
    let k = f.k()?;
    let jobs: Vec<(usize, i64)> =
        (0..lambdas.len()).flat_map(|i| (k - halfwidth..=k + halfwidth).map(move |m| (i, m))).collect();
    let vals = crate::par::map(&jobs, |&(i, m)| -> Result<(f64, f64)> {
        let lam = lambdas[i];
        let fs = threshold_factors(&tc, m, branch.point(lam)?)?;
        let table = FactorTable::new(&fs, grid)?;
        let one = C64::new(1.0, 0.0);
        let lead = table_norm(grid, &table, &[one, -one], s, NormMethod::HilbertSchmidt);
        let rem = table_norm(grid, &table, &remainder_weights(&tc, m, lam, branch)?, s, NormMethod::HilbertSchmidt);
        Ok((lead, rem))
    });
    let mut leading_norms = vec![0.0f64; lambdas.len()];
    let mut remainder_norms = vec![0.0f64; lambdas.len()];
    for ((i, _), v) in jobs.iter().zip(vals) {
        let (a, b) = v?;
        leading_norms[*i] = leading_norms[*i].max(a);
        remainder_norms[*i] = remainder_norms[*i].max(b);
    }
    let n = lambdas.len() - 1;
    let to_c = |v: &[f64]| v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>();
    let leading = power_law(&lambdas[..n], &to_c(&leading_norms[..n]));
    let remainder = power_law(&lambdas[..n], &to_c(&remainder_norms[..n]));
    Ok(ThresholdFit {
        alpha,
        mu: f.mu,
        s,
        branch,
        lambdas: lambdas.to_vec(),
        leading_pass: (leading.exponent - f.mu).abs() <= 0.05,
        remainder_pass: remainder.exponent >= f.mu + 0.1,
        fit_quality: leading.r_squared >= 0.99 && remainder.r_squared >= 0.99,
        leading_norms,
        remainder_norms,
        leading,
        remainder,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegerFit {
    pub alpha: f64,
    pub s: f64,
    pub lambdas: Vec<f64>,
    /// `sup_m ‖ρ^{−s}(R^m(λ) − 𝒢_{m,0})ρ^{−s}‖`.
    pub norms: Vec<f64>,
    /// `norms·|log λ|`.
    pub scaled: Vec<f64>,
    /// Smallest `δ` with every `scaled` value in `c(1 ± δ)` for one `c`,
    /// over the whole grid and over its last decade.
    pub variation: f64,
    pub variation_last_decade: f64,
    /// `‖R₀ − 𝒢₀ − 𝒢₁/log λ‖·|log λ|`.
    pub remainder_scaled: Vec<f64>,
    /// `remainder_scaled` decreases towards `λ → 0` over the three smallest nodes.
    pub remainder_decreasing: bool,
    pub pass: bool,
}

fn variation(v: &[f64]) -> f64 {
    let mx = v.iter().cloned().fold(f64::MIN, f64::max);
    let mn = v.iter().cloned().fold(f64::MAX, f64::min);
    (mx - mn) / (mx + mn)
}

/// Log-law check at integer flux: `‖R₀(λ) − 𝒢₀‖·|log λ|` should plateau.
pub fn integer_threshold_fit(
    alpha: f64,
    s: f64,
    lambdas: &[f64],
    grid: &RadialGrid,
    halfwidth: i64,
) -> Result<IntegerFit> {
    check_grid(lambdas, 1e-14, 1e-2, 3)?;
    let tc = ThresholdConstants::cached(alpha, halfwidth.max(2))?;
    if !tc.flux.integer_flux || alpha == 0.0 {
        return Err(Error::Unsupported(format!("alpha = {alpha} is not a nonzero integer")));
    }
    let k = -(alpha.round() as i64);
    let branch = ThresholdBranch::Above(Side::Plus);
    let jobs: Vec<(usize, i64)> =
        (0..lambdas.len()).flat_map(|i| (k - halfwidth..=k + halfwidth).map(move |m| (i, m))).collect();
    let vals = crate::par::map(&jobs, |&(i, m)| -> Result<(f64, f64)> {
        let lam = lambdas[i];
        let fs = threshold_factors(&tc, m, branch.point(lam)?)?;
        let table = FactorTable::new(&fs, grid)?;
        let one = C64::new(1.0, 0.0);
        let lead = table_norm(grid, &table, &[one, -one], s, NormMethod::HilbertSchmidt);
        let rem = table_norm(grid, &table, &remainder_weights(&tc, m, lam, branch)?, s, NormMethod::HilbertSchmidt);
        Ok((lead, rem))
    });
    let mut norms = vec![0.0f64; lambdas.len()];
    let mut rem = vec![0.0f64; lambdas.len()];
    for ((i, _), v) in jobs.iter().zip(vals) {
        let (a, b) = v?;
        norms[*i] = norms[*i].max(a);
        rem[*i] = rem[*i].max(b);
    }
    let scaled: Vec<f64> = norms.iter().zip(lambdas).map(|(n, l)| n * l.ln().abs()).collect();
    let remainder_scaled: Vec<f64> = rem.iter().zip(lambdas).map(|(n, l)| n * l.ln().abs()).collect();
    let top = *lambdas.last().unwrap();
    let last: Vec<f64> =
        scaled.iter().zip(lambdas).filter(|(_, &l)| l >= top / 10.0 * (1.0 - 1e-12)).map(|(v, _)| *v).collect();
    let variation_last_decade = variation(&last);
    let var = variation(&scaled);
    let remainder_decreasing = remainder_scaled[0] < remainder_scaled[1] && remainder_scaled[1] < remainder_scaled[2];
    Ok(IntegerFit {
        alpha,
        s,
        lambdas: lambdas.to_vec(),
        norms,
        scaled,
        variation: var,
        variation_last_decade,
        remainder_scaled,
        remainder_decreasing,
        pass: var <= 0.1,
    })
}

/// `‖ρ^{−s}(∂_{r'}G_{m,2}, (m/r')G_{m,2})ρ^{−s}‖_HS` at one `λ > 0`.
pub fn gradient_remainder_norm(alpha: f64, m: i64, lambda: f64, s: f64, grid: &RadialGrid) -> Result<WeightedNormEstimate> {
    let tc = ThresholdConstants::cached(alpha, (m - tc_k(alpha)?).abs().max(2))?;
    let branch = ThresholdBranch::Above(Side::Plus);
    let fs = threshold_factors(&tc, m, branch.point(lambda)?)?;
    let table = FactorTable::new(&fs, grid)?;
    let c = remainder_weights(&tc, m, lambda, branch)?;
    Ok(WeightedNormEstimate {
        s,
        lambda: Some(lambda),
        channel: Some(m),
        value: gradient_norm(grid, &table, &c, m, s),
        method: NormMethod::HilbertSchmidt,
    })
}

fn tc_k(alpha: f64) -> Result<i64> {
    Ok(crate::refop::flux_params(alpha)?.k_star.primary())
}

/// `g₁` coefficients extracted on both sides of zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchComparison {
    pub mu: f64,
    /// Fitted coefficient of `λ^μ` in `P[R − G₀]`, `λ > 0`.
    pub c_plus: C64,
    /// Fitted coefficient of `|λ|^μ` in `P[R − G₀]`, `λ < 0`.
    pub c_minus: C64,
    /// `|c_minus e^{−iπμ} − c_plus| / |c_plus|`.
    pub rel_diff: f64,
    /// `P[g₁]` from the closed form.
    pub closed: C64,
}

/// `P[K] = ∫∫ ρ^{−2s}(r) K(r, r') ρ^{−2s}(r') r r' dr dr'`.
fn functional(grid: &RadialGrid, table: &FactorTable, c: &[C64], s: f64) -> C64 {
    let re = tri_sum(grid, table, s, Region::ALL, |fx, _, fy, _| pair_value(fx, fy, c).re);
    let im = tri_sum(grid, table, s, Region::ALL, |fx, _, fy, _| pair_value(fx, fy, c).im);
    2.0 * C64::new(re, im)
}

/// Extracts the `λ^μ` coefficient of channel `k(α)` from `λ > 0` and from
/// `λ < 0` (where the branch factor `e^{iπμ}` is expected) and compares.
pub fn branch_coefficients(alpha: f64, s: f64, lambdas: &[f64], grid: &RadialGrid) -> Result<BranchComparison> {
    check_grid(lambdas, 1e-14, 1e-2, 3)?;
    let tc = ThresholdConstants::cached(alpha, 2)?;
    let f = tc.flux;
    if f.integer_flux || f.is_tie() {
        return Err(Error::Unsupported("branch comparison needs 0 < mu < 1/2".into()));
    }
    let k = f.k()?;
    let one = C64::new(1.0, 0.0);
    let side = |b: ThresholdBranch| -> Result<(Vec<C64>, C64)> {
        let v = crate::par::map(lambdas, |&lam| -> Result<(C64, C64)> {
            let fs = threshold_factors(&tc, k, b.point(lam)?)?;
            let table = FactorTable::new(&fs, grid)?;
            let z = C64::new(0.0, 0.0);
            Ok((functional(grid, &table, &[one, -one, z], s), functional(grid, &table, &[z, z, one], s)))
        });
        let v: Vec<(C64, C64)> = v.into_iter().collect::<Result<_>>()?;
        Ok((v.iter().map(|x| x.0).collect(), v[0].1))
    };
    let (plus, closed) = side(ThresholdBranch::Above(Side::Plus))?;
    let (minus, _) = side(ThresholdBranch::Below)?;
    let (c_plus, _) = fixed_exponent_coefficient(lambdas, &plus, f.mu);
    let (c_minus, _) = fixed_exponent_coefficient(lambdas, &minus, f.mu);
    let rot = c_minus * C64::from_polar(1.0, -PI * f.mu);
    Ok(BranchComparison { mu: f.mu, c_plus, c_minus, rel_diff: (rot - c_plus).norm() / c_plus.norm(), closed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::logspace;

    #[test]
    fn leading_exponent_alpha_03() {
        let g = RadialGrid::standard();
        let lams = logspace(1e-8, 1e-3, 8);
        let fit = threshold_fit(0.3, 1.7, &lams, ThresholdBranch::Above(Side::Plus), &g, 2).unwrap();
        assert!(fit.leading_pass, "{:?}", fit.leading);
        assert!(fit.remainder_pass, "{:?}", fit.remainder);
    }

    #[test]
    fn branch_relation() {
        let g = RadialGrid::standard();
        let b = branch_coefficients(0.3, 1.7, &logspace(1e-10, 1e-8, 4), &g).unwrap();
        assert!(b.rel_diff < 0.05, "{b:?}");
        assert!((b.c_plus - b.closed).norm() < 0.05 * b.closed.norm(), "{b:?}");
    }

    #[test]
    fn gradient_remainder_decreases() {
        let g = RadialGrid::standard();
        let a = gradient_remainder_norm(0.3, 0, 1e-4, 1.7, &g).unwrap().value;
        let b = gradient_remainder_norm(0.3, 0, 1e-6, 1.7, &g).unwrap().value;
        assert!(a / b >= 100f64.powf(0.3) * 0.8, "{a} {b}");
    }
}
