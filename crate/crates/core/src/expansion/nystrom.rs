//! Nyström discretization of the perturbed threshold coefficients
//! `F₀ = (1 + G₀T)^{−1}G₀` and `F₁ = (1 + G₀T)^{−1}G₁(1 + TG₀)^{−1}`
//! for radial `B` and `V`, one channel at a time.
//!
//! For a radial field in the transversal gauge `A = a(r)θ̂`,
//! `a(r) = (1/r)∫₀^r B s ds`, and `∇·A = 0`, so channel `m` of
//! `H(B, V) − H(B₀)` is multiplication by
//! `t_m(r) = (a − a₀)(2m/r + a + a₀) + V(r)`.

use super::{ChannelFactors, G0Factors, G1Factors, RadialGrid, ResolventFactors, rho};
use crate::gauge::{flux, Field};
use crate::refop::{ChannelSolution, SpectralPoint, ThresholdConstants};
use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// `V(r) = amplitude·(1 + r)^{−exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPotential {
    pub amplitude: f64,
    pub exponent: f64,
}

impl RadialPotential {
    pub fn new(amplitude: f64, exponent: f64) -> Result<Self> {
        if !(exponent > 3.0) || !amplitude.is_finite() {
            return Err(Error::Domain(format!("potential needs decay exponent > 3, got {exponent}")));
        }
        Ok(RadialPotential { amplitude, exponent })
    }

    pub fn zero() -> Self {
        RadialPotential { amplitude: 0.0, exponent: 4.0 }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.amplitude * (1.0 + r).powf(-self.exponent)
    }
}

/// `a₀(r)`: `α` inside the unit disc, `α/r` outside.
fn a_ref(alpha: f64, r: f64) -> f64 {
    if r < 1.0 {
        alpha
    } else {
        alpha / r
    }
}

/// Channel-`m` perturbation `t_m` on the grid nodes.
pub fn channel_perturbation(alpha: f64, field: &Field, v: &RadialPotential, m: i64, r: &[f64]) -> Result<Vec<f64>> {
    let b0 = matches!(field.kind, crate::gauge::FieldKind::B0 { alpha: a } if a == alpha);
    crate::par::map(r, |&x| -> Result<f64> {
        let d = if b0 {
            0.0
        } else {
            field.ray_integral(0.0, 0.0, x)? / x - a_ref(alpha, x)
        };
        Ok(d * (2.0 * m as f64 / x + d + 2.0 * a_ref(alpha, x)) + v.eval(x))
    })
    .into_iter()
    .collect()
}

/// Kernel matrix `K[i][j] = K(r_i, r_j)` of a single-term factor kernel.
fn kernel_matrix(f: &dyn ChannelFactors, r: &[f64]) -> Result<DMatrix<C64>> {
    let fs = crate::par::map(r, |&x| f.eval(x)).into_iter().collect::<Result<Vec<_>>>()?;
    let n = r.len();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = if r[i] <= r[j] { (i, j) } else { (j, i) };
        fs[a].lo[0] * fs[b].up[0]
    }))
}

/// One channel of the discretized problem. Kernel matrices act on nodal
/// values through `diag(r w)`.
#[derive(Debug, Clone)]
pub struct NystromSystem {
    pub alpha: f64,
    pub m: i64,
    pub s: f64,
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    pub g0: DMatrix<C64>,
    /// Zero off channel `k(α)`.
    pub g1: DMatrix<C64>,
    pub t: Vec<f64>,
}

impl NystromSystem {
    pub fn new(alpha: f64, field: &Field, v: &RadialPotential, m: i64, s: f64, grid: &RadialGrid) -> Result<Self> {
        if grid.r_max() < 50.0 * (1.0 - 1e-12) || grid.edges[0] > 1e-3 * (1.0 + 1e-12) {
            return Err(Error::Domain("Nyström grid must span [1e-3, R] with R >= 50".into()));
        }
        let tc = ThresholdConstants::cached(alpha, 2)?;
        let f = tc.flux;
        if f.integer_flux || f.is_tie() {
            return Err(Error::Unsupported(format!("F1 needs 0 < mu < 1/2 (alpha = {alpha})")));
        }
        let g0 = kernel_matrix(&G0Factors(tc.channel(m)?.clone()), &grid.r)?;
        let n = grid.r.len();
        let g1 = if m == f.k()? {
            kernel_matrix(&G1Factors::new(&tc)?, &grid.r)?
        } else {
            DMatrix::zeros(n, n)
        };
        let t = channel_perturbation(alpha, field, v, m, &grid.r)?;
        Ok(NystromSystem { alpha, m, s, r: grid.r.clone(), w: grid.w.clone(), g0, g1, t })
    }

    fn d(&self) -> Vec<f64> {
        self.r.iter().zip(&self.w).map(|(r, w)| r * w).collect()
    }

    /// `K diag(r w t)`.
    fn times_dt(&self, k: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.d();
        let mut out = k.clone();
        for j in 0..out.ncols() {
            let c = d[j] * self.t[j];
            out.column_mut(j).scale_mut(c);
        }
        out
    }

    /// `diag(r w t) K`.
    fn dt_times(&self, k: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.d();
        let mut out = k.clone();
        for i in 0..out.nrows() {
            let c = d[i] * self.t[i];
            out.row_mut(i).scale_mut(c);
        }
        out
    }

    /// Weighted Frobenius norm `‖W K W‖`, `W = diag(ρ^{−s}√(r w))`;
    /// the discrete counterpart of the weighted Hilbert–Schmidt norm.
    pub fn weighted_norm(&self, k: &DMatrix<C64>) -> f64 {
        let wt: Vec<f64> = self.d().iter().zip(&self.r).map(|(d, r)| d.sqrt() * rho(*r).powf(-self.s)).collect();
        let mut acc = 0.0;
        for j in 0..k.ncols() {
            for i in 0..k.nrows() {
                acc += (k[(i, j)] * wt[i] * wt[j]).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `(1 + K D T)^{−1} K` for kernel matrix `K`.
    fn perturbed(&self, k: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        let n = k.nrows();
        let a = DMatrix::identity(n, n) + self.times_dt(k);
        a.lu().solve(k).ok_or_else(|| Error::Singular(format!("1 + G0 T singular in channel {}", self.m)))
    }

    pub fn solve(&self) -> Result<ChannelCoefficients> {
        let n = self.r.len();
        let id = DMatrix::<C64>::identity(n, n);
        let left = &id + self.times_dt(&self.g0);
        let right = &id + self.dt_times(&self.g0);
        let lu = left.clone().lu();
        let f0 = lu.solve(&self.g0).ok_or_else(|| Error::Singular(format!("channel {}", self.m)))?;
        let rt = right.clone().transpose().lu();
        // X (1 + T G₀) = Y  ⇔  (1 + T G₀)ᵀ Xᵀ = Yᵀ
        let tmp = lu.solve(&self.g1).ok_or_else(|| Error::Singular(format!("channel {}", self.m)))?;
        let f1 = rt.solve(&tmp.transpose()).ok_or_else(|| Error::Singular(format!("channel {}", self.m)))?.transpose();

        let g0n = self.weighted_norm(&self.g0);
        let identity_residual = self.weighted_norm(&(&left * &f0 - &self.g0)) / g0n;
        let duality_residual = self.weighted_norm(&(&f0 * &right - &self.g0)) / g0n;
        let f1_residual = if self.g1.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            0.0
        } else {
            self.weighted_norm(&(&left * &f1 * &right - &self.g1)) / self.weighted_norm(&self.g1)
        };

        // σ_min of 1 + D^{1/2} G₀ D^{1/2} T, the L²(r dr)-faithful form of 1 + G₀T
        let d = self.d();
        let sym = DMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            C64::new(delta, 0.0) + self.g0[(i, j)] * (d[i] * d[j]).sqrt() * self.t[j]
        });
        let margin = sym.singular_values().min();
        Ok(ChannelCoefficients {
            m: self.m,
            f0,
            f1,
            margin,
            identity_residual,
            duality_residual,
            f1_residual,
        })
    }

    /// `(1 + R₀(λ)T)^{−1}R₀(λ)` on the same nodes, compared with `F₀` and
    /// with `F₀ + λ^μ F₁`.
    pub fn resolvent_limit(&self, coeffs: &ChannelCoefficients, point: SpectralPoint) -> Result<LimitCheck> {
        let sol = ChannelSolution::new(self.alpha, self.m, point)?;
        let rl = kernel_matrix(&ResolventFactors(sol), &self.r)?;
        let fl = self.perturbed(&rl)?;
        let mu = ThresholdConstants::cached(self.alpha, 2)?.flux.mu;
        let lam = point.lambda;
        let pw = if lam > 0.0 { C64::new(lam.powf(mu), 0.0) } else { C64::from_polar((-lam).powf(mu), std::f64::consts::PI * mu) };
        let n0 = self.weighted_norm(&coeffs.f0);
        let first = &coeffs.f0 + &coeffs.f1 * pw;
        Ok(LimitCheck {
            m: self.m,
            lambda: lam,
            rel_diff: self.weighted_norm(&(&fl - &coeffs.f0)) / n0,
            rel_diff_first_order: self.weighted_norm(&(&fl - &first)) / n0,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ChannelCoefficients {
    pub m: i64,
    /// Kernel values `F₀(r_i, r_j)`.
    pub f0: DMatrix<C64>,
    pub f1: DMatrix<C64>,
    pub margin: f64,
    /// `‖(1 + G₀T)F₀ − G₀‖/‖G₀‖` and `‖F₀(1 + TG₀) − G₀‖/‖G₀‖`, weighted.
    pub identity_residual: f64,
    pub duality_residual: f64,
    /// `‖(1 + G₀T)F₁(1 + TG₀) − G₁‖/‖G₁‖`.
    pub f1_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCheck {
    pub m: i64,
    pub lambda: f64,
    /// `‖F_λ − F₀‖/‖F₀‖`, weighted.
    pub rel_diff: f64,
    /// `‖F_λ − F₀ − λ^μF₁‖/‖F₀‖`.
    pub rel_diff_first_order: f64,
}

/// Per-channel summary of [`nystrom_perturbed`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSummary {
    pub m: i64,
    pub margin: f64,
    pub identity_residual: f64,
    pub duality_residual: f64,
    pub f1_residual: f64,
    pub f0_norm: f64,
    pub f1_norm: f64,
    pub g1_norm: f64,
    /// `‖F₁ − G₁‖`, weighted.
    pub f1_shift: f64,
    pub limit: Option<LimitCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedReport {
    pub alpha: f64,
    pub field_flux: f64,
    pub s: f64,
    pub nodes: usize,
    pub channels: Vec<ChannelSummary>,
}

impl PerturbedReport {
    pub fn min_margin(&self) -> f64 {
        self.channels.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn max_residual(&self) -> f64 {
        self.channels.iter().map(|c| c.identity_residual.max(c.duality_residual)).fold(0.0, f64::max)
    }

    pub fn max_limit_diff(&self) -> f64 {
        self.channels.iter().filter_map(|c| c.limit.map(|l| l.rel_diff)).fold(0.0, f64::max)
    }
}

/// Solves every channel of `m_set`; with `limit_lambda` also compares `F₀`
/// with the perturbed resolvent at `λ + i0`.
pub fn nystrom_perturbed(
    alpha: f64,
    field: &Field,
    v: &RadialPotential,
    s: f64,
    m_set: &[i64],
    grid: &RadialGrid,
    limit_lambda: Option<f64>,
) -> Result<PerturbedReport> {
    if !field.is_radial() {
        return Err(Error::Unsupported("channels decouple only for radial fields".into()));
    }
    field.check_decay()?;
    let field_flux = flux(field)?;
    if (field_flux - alpha).abs() > 1e-6 {
        return Err(Error::Domain(format!("field flux {field_flux} does not match alpha = {alpha}")));
    }
    let mut channels = Vec::with_capacity(m_set.len());
    for &m in m_set {
        let sys = NystromSystem::new(alpha, field, v, m, s, grid)?;
        let c = sys.solve()?;
        if c.margin < 1e-6 {
            return Err(Error::Singular(format!("margin {:e} in channel {m}: zero is not regular at this resolution", c.margin)));
        }
        let limit = match limit_lambda {
            Some(l) => Some(sys.resolvent_limit(&c, SpectralPoint::new(l, crate::refop::Side::Plus)?)?),
            None => None,
        };
        channels.push(ChannelSummary {
            m,
            margin: c.margin,
            identity_residual: c.identity_residual,
            duality_residual: c.duality_residual,
            f1_residual: c.f1_residual,
            f0_norm: sys.weighted_norm(&c.f0),
            f1_norm: sys.weighted_norm(&c.f1),
            g1_norm: sys.weighted_norm(&sys.g1),
            f1_shift: sys.weighted_norm(&(&c.f1 - &sys.g1)),
            limit,
        });
    }
    Ok(PerturbedReport { alpha, field_flux, s, nodes: grid.len(), channels })
}

/// Default channel set `k(α) − 2, …, k(α) + 2`.
pub fn default_channels(alpha: f64) -> Result<Vec<i64>> {
    let k = crate::refop::flux_params(alpha)?.k_star.primary();
    Ok((k - 2..=k + 2).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid {
        RadialGrid::new(1e-3, 50.0, 6, 8).unwrap()
    }

    #[test]
    fn reference_field_gives_t_zero() {
        let g = grid();
        let sys = NystromSystem::new(0.3, &Field::b0(0.3), &RadialPotential::zero(), 0, 1.7, &g).unwrap();
        assert!(sys.t.iter().all(|&t| t == 0.0));
        let c = sys.solve().unwrap();
        assert_eq!(sys.weighted_norm(&(&c.f0 - &sys.g0)), 0.0);
        assert_eq!(sys.weighted_norm(&(&c.f1 - &sys.g1)), 0.0);
    }

    #[test]
    fn gaussian_a_matches_closed_form() {
        let f = Field::gaussian(0.3, 1.0);
        let r = [0.01, 0.5, 1.0, 3.0];
        let t = channel_perturbation(0.3, &f, &RadialPotential::zero(), 1, &r).unwrap();
        for (x, t) in r.iter().zip(t) {
            let a = 0.3 * (1.0 - (-x * x).exp()) / x;
            let a0 = a_ref(0.3, *x);
            let want = (a - a0) * (2.0 / x + a + a0);
            assert!((t - want).abs() < 1e-10 * want.abs().max(1.0), "{x}: {t} vs {want}");
        }
    }

    #[test]
    fn identities_and_limit() {
        let g = grid();
        let rep = nystrom_perturbed(
            0.3,
            &Field::gaussian(0.3, 1.0),
            &RadialPotential::new(0.01, 4.0).unwrap(),
            1.7,
            &[-1, 0, 1],
            &g,
            Some(1e-6),
        )
        .unwrap();
        assert!(rep.max_residual() < 1e-10, "{rep:?}");
        assert!(rep.min_margin() > 1e-6, "{rep:?}");
        // F_λ − F₀ is λ^μF₁ up to higher order
        for c in &rep.channels {
            let l = c.limit.unwrap();
            assert!(l.rel_diff_first_order < 2e-3, "{c:?}");
            let lead = 1e-6f64.powf(0.3) * c.f1_norm / c.f0_norm;
            assert!((l.rel_diff - lead).abs() <= l.rel_diff_first_order + 1e-12, "{c:?}");
        }
    }

    #[test]
    fn f1_shift_scales_with_amplitude() {
        let g = grid();
        let shift = |a: f64| {
            let rep = nystrom_perturbed(0.3, &Field::b0(0.3), &RadialPotential::new(a, 4.0).unwrap(), 1.7, &[0], &g, None)
                .unwrap();
            rep.channels[0].f1_shift
        };
        let q = shift(0.02) / shift(0.01);
        assert!((q - 2.0).abs() < 0.4, "{q}");
    }
}
