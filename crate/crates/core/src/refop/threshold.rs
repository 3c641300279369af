//! Zero-energy data of the reference operator: the constants `a_m = v_m(0,1)`,
//! `a'_m`, `b_m = u_m(0,1)`, `b'_m`, the kernels `G_{m,0}`, `g₁`, the
//! integer-flux pair `(𝒢_{α,0}, k₁)`, and remainder kernels.

use super::channel::ChannelSolution;
use super::interior::{interior_at_kappa, kummer_params, Frobenius};
use super::{flux_params, FluxParams, SpectralPoint};
use crate::specfun::gamma::{gamma_any, gamma_c, rgamma_c};
use crate::{Error, Result, C64};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Default number of channels on each side of `k(α)`.
pub const DEFAULT_M_MAX: i64 = 40;

/// Zero-energy constants of one channel. `v_m(0,·)` and `u_m(0,·)` are held
/// as combinations of the Frobenius pair so that they can be evaluated at
/// small `r` without the Kummer `U` integral.
#[derive(Debug, Clone)]
pub struct ChannelConstants {
    pub m: i64,
    pub nu: f64,
    pub a: f64,
    pub da: f64,
    pub b: f64,
    pub db: f64,
    /// `Γ(a₀)/Γ(1 + 2|m|)`, `a₀ = 1/2 + |m| + m·sign(α)`.
    pub gamma_ratio: f64,
    frob: Frobenius,
    v_scale: f64,
    /// `u = u_c·reg + u_d·sec`.
    u_c: f64,
    u_d: f64,
}

impl ChannelConstants {
    fn new(alpha: f64, m: i64) -> Result<Self> {
        let kappa = alpha.abs();
        let kc = C64::new(kappa, 0.0);
        let iv = interior_at_kappa(alpha, m, kc, 1.0)?;
        let frob = Frobenius::new(alpha, m, C64::new(alpha * alpha, 0.0))?;
        let p = m.unsigned_abs() as i32;
        let v_scale = (2.0 * kappa).powi(p);
        let fv = frob.eval(1.0);
        let (reg, dreg, sec, dsec) = (fv.reg.re, fv.dreg.re, fv.sec.re, fv.dsec.re);
        let det = reg * dsec - dreg * sec;
        let (b, db) = (iv.u.re, iv.du.re);
        let (ka, kb) = kummer_params(alpha, m, kc);
        let gamma_ratio = (gamma_c(ka) * rgamma_c(C64::new(kb, 0.0))).re;
        Ok(ChannelConstants {
            m,
            nu: (m as f64 + alpha).abs(),
            a: iv.v.re,
            da: iv.dv.re,
            b,
            db,
            gamma_ratio,
            frob,
            v_scale,
            u_c: (b * dsec - db * sec) / det,
            u_d: (reg * db - dreg * b) / det,
        })
    }

    /// `(v_m(0,r), u_m(0,r))` for `0 < r ≤ 1`.
    pub fn vu(&self, r: f64) -> (f64, f64) {
        let f = self.frob.eval(r);
        (f.reg.re * self.v_scale, self.u_c * f.reg.re + self.u_d * f.sec.re)
    }

    /// `(v, v', u, u')` at zero energy for `0 < r ≤ 1`.
    pub fn vu_d(&self, r: f64) -> (f64, f64, f64, f64) {
        let f = self.frob.eval(r);
        (
            f.reg.re * self.v_scale,
            f.dreg.re * self.v_scale,
            self.u_c * f.reg.re + self.u_d * f.sec.re,
            self.u_c * f.dreg.re + self.u_d * f.dsec.re,
        )
    }

    /// `a'_m + ν a_m`.
    pub fn plus(&self) -> f64 {
        self.da + self.nu * self.a
    }

    /// `(a'_m − ν a_m)/(a'_m + ν a_m)`.
    pub fn reflection(&self) -> f64 {
        (self.da - self.nu * self.a) / self.plus()
    }

    /// `G_{m,0}(r, r')`; for `ν = 0` the third region is `a/a' + log r_<`.
    pub fn g0(&self, r: f64, rp: f64) -> f64 {
        let (r, rp) = if r <= rp { (r, rp) } else { (rp, r) };
        let nu = self.nu;
        if rp <= 1.0 {
            let (v, _) = self.vu(r);
            let (v2, u2) = self.vu(rp);
            let beta = (self.db + nu * self.b) / self.plus();
            self.gamma_ratio * v * (u2 - beta * v2)
        } else if r <= 1.0 {
            self.vu(r).0 * rp.powf(-nu) / self.plus()
        } else if nu == 0.0 {
            self.a / self.da + r.ln()
        } else {
            ((r / rp).powf(nu) - self.reflection() * (r * rp).powf(-nu)) / (2.0 * nu)
        }
    }
}

/// Constants for channels `|m − k(α)| ≤ m_max` at fixed `α`.
#[derive(Debug, Clone)]
pub struct ThresholdConstants {
    pub flux: FluxParams,
    pub m_max: i64,
    k0: i64,
    channels: Vec<ChannelConstants>,
}

impl ThresholdConstants {
    pub fn new(alpha: f64, m_max: i64) -> Result<Self> {
        let flux = flux_params(alpha)?;
        if alpha == 0.0 {
            return Err(Error::Unsupported("alpha = 0 has no threshold constants".into()));
        }
        let k0 = flux.k_star.primary();
        let ms: Vec<i64> = (k0 - m_max..=k0 + m_max).collect();
        let channels = crate::par::map(&ms, |&m| ChannelConstants::new(alpha, m)).into_iter().collect::<Result<_>>()?;
        Ok(ThresholdConstants { flux, m_max, k0, channels })
    }

    /// Shared instance per `(α, m_max)`, built on first use.
    pub fn cached(alpha: f64, m_max: i64) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(u64, i64), Arc<ThresholdConstants>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (alpha.to_bits(), m_max);
        if let Some(c) = cache.lock().expect("cache poisoned").get(&key) {
            return Ok(c.clone());
        }
        let c = Arc::new(Self::new(alpha, m_max)?);
        cache.lock().expect("cache poisoned").insert(key, c.clone());
        Ok(c)
    }

    pub fn alpha(&self) -> f64 {
        self.flux.alpha
    }

    pub fn channel(&self, m: i64) -> Result<&ChannelConstants> {
        let i = m - (self.k0 - self.m_max);
        if i < 0 || i as usize >= self.channels.len() {
            return Err(Error::Domain(format!("channel {m} outside the tabulated range")));
        }
        Ok(&self.channels[i as usize])
    }

    pub fn channels(&self) -> &[ChannelConstants] {
        &self.channels
    }
}

/// `G_{m,0}(r, r')`. For the channel `m = −α` at integer flux this is `𝒢_{α,0}`.
pub fn threshold_g0(m: i64, r: f64, rp: f64, tc: &ThresholdConstants) -> Result<f64> {
    check_radii(r, rp)?;
    Ok(tc.channel(m)?.g0(r, rp))
}

/// `π(i − cot μπ)/(4^μ Γ²(μ))`.
pub fn g1_prefactor(mu: f64) -> C64 {
    let g = gamma_any(mu);
    C64::new(-1.0 / (mu * PI).tan(), 1.0) * (PI / (4f64.powf(mu) * g * g))
}

/// `g₁(r, r')`, the `λ^μ` coefficient of channel `k(α)`.
pub fn threshold_g1(r: f64, rp: f64, tc: &ThresholdConstants) -> Result<C64> {
    check_radii(r, rp)?;
    let f = &tc.flux;
    if f.integer_flux || f.is_tie() {
        return Err(Error::Unsupported(format!("g1 needs 0 < mu < 1/2, got mu = {}", f.mu)));
    }
    let mu = f.mu;
    let c = tc.channel(f.k()?)?;
    let (r, rp) = if r <= rp { (r, rp) } else { (rp, r) };
    let pre = g1_prefactor(mu);
    let refl = c.reflection();
    let ext = |x: f64| x.powf(mu) - refl * x.powf(-mu);
    let v = if rp <= 1.0 {
        2.0 * c.vu(r).0 * c.vu(rp).0 / (c.plus() * c.plus())
    } else if r <= 1.0 {
        c.vu(r).0 * ext(rp) / (mu * c.plus())
    } else {
        ext(r) * ext(rp) / (2.0 * mu * mu)
    };
    Ok(pre * v)
}

/// `(𝒢_{α,0}, k₁)` of channel `m = −α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegerKernel {
    pub g0: f64,
    pub k1: f64,
}

/// Integer-flux threshold pair: `R^{−α}(λ) = 𝒢_{α,0} + k₁/log λ + o(1/log λ)`.
pub fn threshold_integer(r: f64, rp: f64, tc: &ThresholdConstants) -> Result<IntegerKernel> {
    check_radii(r, rp)?;
    if !tc.flux.integer_flux || tc.alpha() == 0.0 {
        return Err(Error::Unsupported(format!("alpha = {} is not a nonzero integer", tc.alpha())));
    }
    let c = tc.channel(-(tc.alpha().round() as i64))?;
    let (r, rp) = if r <= rp { (r, rp) } else { (rp, r) };
    let ext = |x: f64| c.a / c.da + x.ln();
    let k1 = if rp <= 1.0 {
        2.0 * c.vu(r).0 * c.vu(rp).0 / (c.da * c.da)
    } else if r <= 1.0 {
        2.0 * c.vu(r).0 / c.da * ext(rp)
    } else {
        2.0 * ext(r) * ext(rp)
    };
    Ok(IntegerKernel { g0: c.g0(r, rp), k1 })
}

/// `R^m(λ) − G_{m,0} − λ^μ δ_{m,k} g₁` (non-integer flux) or
/// `R^m(λ) − 𝒢_{α,0} − k₁/log λ` for `m = −α` (integer flux). Below zero,
/// `λ^μ = |λ|^μ e^{iπμ}` and `log λ = log|λ| + iπ`; on `λ − i0` above zero the
/// subtracted coefficients are conjugated.
pub fn remainder_kernel(m: i64, point: SpectralPoint, r: f64, rp: f64, tc: &ThresholdConstants) -> Result<C64> {
    let alpha = tc.alpha();
    let rk = ChannelSolution::new(alpha, m, point)?.kernel(r, rp)?;
    let g0 = threshold_g0(m, r, rp, tc)?;
    let lam = point.lambda;
    let minus = point.side == super::Side::Minus && lam > 0.0;
    let fix = |z: C64| if minus { z.conj() } else { z };
    let f = &tc.flux;
    if f.integer_flux {
        if m != -(alpha.round() as i64) {
            return Ok(rk - g0);
        }
        let ik = threshold_integer(r, rp, tc)?;
        let log = if lam > 0.0 { C64::new(lam.ln(), 0.0) } else { C64::new((-lam).ln(), PI) };
        return Ok(rk - g0 - fix(C64::new(ik.k1, 0.0) / log));
    }
    if f.is_tie() {
        return Err(Error::Unsupported("remainder needs mu < 1/2".into()));
    }
    if m != f.k()? {
        return Ok(rk - g0);
    }
    let pw = if lam > 0.0 {
        C64::new(lam.powf(f.mu), 0.0)
    } else {
        C64::from_polar((-lam).powf(f.mu), PI * f.mu)
    };
    Ok(rk - g0 - fix(pw * threshold_g1(r, rp, tc)?))
}

fn check_radii(r: f64, rp: f64) -> Result<()> {
    if r > 0.0 && rp > 0.0 && r.is_finite() && rp.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("radii must be positive: r = {r}, r' = {rp}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::kummer::kummer_wronskian_factor;

    fn pt(l: f64) -> SpectralPoint {
        SpectralPoint::plus(l).unwrap()
    }

    #[test]
    fn constants_invariants() {
        for &alpha in &[0.3, 2.3, 1.7, 1.0, 2.0, -0.3] {
            let tc = ThresholdConstants::new(alpha, 12).unwrap();
            for c in tc.channels() {
                assert!(c.plus() > 0.0, "alpha={alpha} m={}", c.m);
                let (ka, kb) = kummer_params(alpha, c.m, C64::new(alpha.abs(), 0.0));
                let want = kummer_wronskian_factor(ka, kb).re;
                let w = c.da * c.b - c.a * c.db;
                assert!((w - want).abs() < 1e-9 * want.abs(), "alpha={alpha} m={} {w} {want}", c.m);
                // u via the Frobenius pair reproduces b at r = 1
                assert!((c.vu(1.0).1 - c.b).abs() < 1e-12 * c.b.abs());
            }
        }
        for alpha in [1.0, 2.0, 3.0] {
            let tc = ThresholdConstants::new(alpha, 3).unwrap();
            assert!(tc.channel(-(alpha as i64)).unwrap().da > 0.0);
        }
    }

    #[test]
    fn g0_continuity_and_region_three() {
        let tc = ThresholdConstants::new(0.3, 8).unwrap();
        for m in -3..=3 {
            let c = tc.channel(m).unwrap();
            let e = 1e-13;
            for &(r, rp) in &[(0.4, 1.0), (1.0, 2.0), (1.0, 1.0)] {
                let g = c.g0(r, rp);
                let g2 = c.g0(r + e * (r < 1.0 && rp == 1.0) as u8 as f64, rp + e);
                assert!((g - g2).abs() <= 1e-9 * g.abs(), "m={m} {r} {rp}: {g} {g2}");
            }
            assert_eq!(c.g0(0.3, 2.0), c.g0(2.0, 0.3));
        }
        let c = tc.channel(0).unwrap();
        let c0 = (c.da - 0.3 * c.a) / (c.da + 0.3 * c.a);
        let want = (0.5f64.powf(0.3) - c0 * 8f64.powf(-0.3)) / 0.6;
        assert!((threshold_g0(0, 2.0, 4.0, &tc).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn g0_is_small_lambda_limit() {
        let tc = ThresholdConstants::new(0.3, 4).unwrap();
        let g = threshold_g0(1, 0.5, 0.8, &tc).unwrap();
        let r = ChannelSolution::new(0.3, 1, pt(1e-10)).unwrap().kernel(0.5, 0.8).unwrap();
        assert!((r - g).norm() < 1e-4, "{r} {g}");
        // all three regions, including negative channels
        for m in [-2, -1, 0, 2] {
            for &(r, rp) in &[(0.3, 0.7), (0.6, 3.0), (1.5, 2.5)] {
                let g = threshold_g0(m, r, rp, &tc).unwrap();
                let rk = ChannelSolution::new(0.3, m, pt(-1e-12)).unwrap().kernel(r, rp).unwrap();
                assert!((rk.re - g).abs() < 1e-3 * g.abs(), "m={m} ({r},{rp}) {rk} {g}");
            }
        }
    }

    #[test]
    fn g0_channel_decay() {
        let tc = ThresholdConstants::new(0.3, 10).unwrap();
        let env = |m: i64| {
            let nu = (m as f64 + 0.3).abs();
            threshold_g0(m, 0.5, 2.0, &tc).unwrap() / (0.5f64.powi(m.abs() as i32) * 2f64.powf(-nu) / nu)
        };
        let (e3, e6) = (env(3), env(6));
        assert!(e3 > 0.0 && e6 > 0.0 && e6 / e3 < 2.0 && e3 / e6 < 2.0, "{e3} {e6}");
    }

    #[test]
    fn g1_phase_and_symmetry() {
        let mu: f64 = 0.3;
        let p = C64::new(-1.0 / (mu * PI).tan(), 1.0);
        let want = C64::from_polar(1.0 / (mu * PI).sin(), PI - mu * PI);
        assert!((p - want).norm() < 1e-14);
        let tc = ThresholdConstants::new(0.3, 4).unwrap();
        for &(r, s) in &[(0.2, 0.9), (0.5, 1.7), (1.2, 3.0)] {
            assert_eq!(threshold_g1(r, s, &tc).unwrap(), threshold_g1(s, r, &tc).unwrap());
        }
        assert!(threshold_g1(0.5, 0.7, &ThresholdConstants::new(0.5, 4).unwrap()).is_err());
        assert!(threshold_g1(0.5, 0.7, &ThresholdConstants::new(2.0, 4).unwrap()).is_err());
    }

    #[test]
    fn g1_matches_channel_kernel() {
        // (R(λ) − G0)/λ^μ → g1 with relative error O(λ^μ)
        for &alpha in &[0.3, 2.3, -0.3] {
            let tc = ThresholdConstants::new(alpha, 4).unwrap();
            let k = tc.flux.k().unwrap();
            for &(r, s) in &[(0.6, 0.9), (0.5, 2.0), (1.5, 3.0)] {
                let g1 = threshold_g1(r, s, &tc).unwrap();
                let lam: f64 = 1e-12;
                let rk = ChannelSolution::new(alpha, k, pt(lam)).unwrap().kernel(r, s).unwrap();
                let est = (rk - threshold_g0(k, r, s, &tc).unwrap()) / lam.powf(tc.flux.mu);
                assert!((est - g1).norm() < 1e-2 * g1.norm(), "alpha={alpha} ({r},{s}) {est} {g1}");
                // negative side: |λ|^μ e^{iπμ} g1
                let rk = ChannelSolution::new(alpha, k, pt(-lam)).unwrap().kernel(r, s).unwrap();
                let est = (rk - threshold_g0(k, r, s, &tc).unwrap()) / lam.powf(tc.flux.mu);
                let want = g1 * C64::from_polar(1.0, PI * tc.flux.mu);
                assert!(want.im.abs() < 1e-12 * want.norm());
                assert!((est - want).norm() < 1e-2 * want.norm(), "neg alpha={alpha} {est} {want}");
            }
        }
    }

    #[test]
    fn integer_flux_pair() {
        for alpha in [1.0, 2.0] {
            let tc = ThresholdConstants::new(alpha, 4).unwrap();
            let m = -(alpha as i64);
            for &(r, s) in &[(0.4, 0.8), (0.5, 2.0), (2.0, 5.0)] {
                let ik = threshold_integer(r, s, &tc).unwrap();
                // eliminate the O(1/log²λ) term with two λ values
                let est = |lam: f64| {
                    let rk = ChannelSolution::new(alpha, m, pt(lam)).unwrap().kernel(r, s).unwrap();
                    (rk.re, lam.ln())
                };
                let (a1, l1) = est(1e-20);
                let (a2, l2) = est(1e-40);
                // R ≈ g0 + k1/L + c/L²
                let k1_fit = {
                    let (d1, d2) = (a1 - ik.g0, a2 - ik.g0);
                    (d1 * l1 * l1 - d2 * l2 * l2) / (l1 - l2)
                };
                let second = (a2 - ik.g0 - ik.k1 / l2).abs();
                assert!(second < 0.1 * (ik.k1 / l2).abs(), "alpha={alpha} ({r},{s}) {a2} {}", ik.g0);
                assert!((k1_fit - ik.k1).abs() < 0.05 * ik.k1.abs(), "alpha={alpha} ({r},{s}) {k1_fit} {}", ik.k1);
            }
            let a = threshold_integer(std::f64::consts::E, 6.0, &tc).unwrap().g0;
            let b = threshold_integer(1.0, 6.0, &tc).unwrap().g0;
            assert!((a - b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn remainder_small() {
        let tc = ThresholdConstants::new(0.3, 4).unwrap();
        let lam: f64 = 1e-9;
        let rem = remainder_kernel(0, pt(lam), 0.5, 0.7, &tc).unwrap();
        let g1 = threshold_g1(0.5, 0.7, &tc).unwrap() * lam.powf(0.3);
        assert!(rem.norm() < 0.1 * g1.norm(), "{rem} {g1}");
        // channel m = k+1 remainder scales like λ^{min(2μ, 1/2)} or faster
        let a = remainder_kernel(1, pt(1e-6), 0.5, 0.7, &tc).unwrap().norm();
        let b = remainder_kernel(1, pt(1e-4), 0.5, 0.7, &tc).unwrap().norm();
        let slope = (b / a).log10() / 2.0;
        assert!(slope >= 0.5 - 0.05, "{slope}");
    }
}
