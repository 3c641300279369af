//! Channel Green's functions `R^m(λ ± i0; r, r')` assembled from the interior
//! Frobenius pair and exterior Bessel functions of order `ν = |m + α|`, and the
//! two-dimensional kernel by channel summation.

use super::interior::{interior_solutions, kummer_params, Frobenius};
use super::{flux_params, SpectralPoint};
use crate::specfun::gamma::{gamma_c, rgamma_c};
use crate::specfun::{ik, jy};
use crate::{par, Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy)]
enum Exterior {
    /// `J_ν(kr)`, `Y_ν(kr)`; outgoing `J + i·s·Y`.
    Oscillating { k: f64, s: f64 },
    /// `I_ν(kr)`, `K_ν(kr)`; decaying `K`.
    Decaying { k: f64 },
}

/// Basis values at `r`: `(e1, e1', e2, e2', out, out')`.
type Basis = (f64, f64, f64, f64, C64, C64);

impl Exterior {
    fn eval(&self, nu: f64, r: f64) -> Result<Basis> {
        match *self {
            Exterior::Oscillating { k, s } => {
                let (j, y, dj, dy) = jy(nu, k * r)?;
                let (dj, dy) = (k * dj, k * dy);
                Ok((j, dj, y, dy, C64::new(j, s * y), C64::new(dj, s * dy)))
            }
            Exterior::Decaying { k } => {
                let (i, kk, di, dk) = ik(nu, k * r)?;
                let (di, dk) = (k * di, k * dk);
                Ok((i, di, kk, dk, C64::new(kk, 0.0), C64::new(dk, 0.0)))
            }
        }
    }
}

/// Regular and outgoing (or decaying) solutions of one channel, normalized by
/// the Frobenius series at the origin.
#[derive(Debug, Clone)]
pub struct ChannelSolution {
    pub alpha: f64,
    pub m: i64,
    pub point: SpectralPoint,
    pub nu: f64,
    frob: Frobenius,
    ext: Exterior,
    /// Exterior regular solution `ext_a·e1 + ext_b·e2`.
    ext_a: C64,
    ext_b: C64,
    /// Interior outgoing solution `int_c·reg + int_d·sec`.
    int_c: C64,
    int_d: C64,
    wronskian: C64,
}

impl ChannelSolution {
    pub fn new(alpha: f64, m: i64, point: SpectralPoint) -> Result<Self> {
        let nu = (m as f64 + alpha).abs();
        let q = C64::new(alpha * alpha - point.lambda, 0.0);
        let frob = Frobenius::new(alpha, m, q)?;
        let k = point.lambda.abs().sqrt();
        let ext = if point.lambda > 0.0 {
            Exterior::Oscillating { k, s: point.side.sign() }
        } else {
            Exterior::Decaying { k }
        };
        let fv = frob.eval(1.0);
        let (e1, de1, e2, de2, out, dout) = ext.eval(nu, 1.0)?;
        let det = e1 * de2 - de1 * e2;
        let ext_a = (fv.reg * de2 - fv.dreg * e2) / det;
        let ext_b = (fv.dreg * e1 - fv.reg * de1) / det;
        let det_i = fv.reg * fv.dsec - fv.dreg * fv.sec;
        let int_c = (out * fv.dsec - dout * fv.sec) / det_i;
        let int_d = (fv.reg * dout - fv.dreg * out) / det_i;
        let wronskian = fv.dreg * out - fv.reg * dout;
        if !(wronskian.norm() > 0.0 && wronskian.norm().is_finite()) {
            return Err(Error::Singular(format!("channel {m}: Wronskian {wronskian}")));
        }
        Ok(ChannelSolution { alpha, m, point, nu, frob, ext, ext_a, ext_b, int_c, int_d, wronskian })
    }

    /// Regular solution and its `r`-derivative.
    pub fn f_reg(&self, r: f64) -> Result<(C64, C64)> {
        if r <= 1.0 {
            let v = self.frob.eval(r);
            Ok((v.reg, v.dreg))
        } else {
            let (e1, de1, e2, de2, _, _) = self.ext.eval(self.nu, r)?;
            Ok((self.ext_a * e1 + self.ext_b * e2, self.ext_a * de1 + self.ext_b * de2))
        }
    }

    /// Outgoing (`λ > 0`) or decaying (`λ < 0`) solution and its derivative.
    pub fn phi(&self, r: f64) -> Result<(C64, C64)> {
        if r <= 1.0 {
            let v = self.frob.eval(r);
            Ok((self.int_c * v.reg + self.int_d * v.sec, self.int_c * v.dreg + self.int_d * v.dsec))
        } else {
            let (_, _, _, _, out, dout) = self.ext.eval(self.nu, r)?;
            Ok((out, dout))
        }
    }

    /// `r(f' φ − f φ')`, independent of `r`.
    pub fn wronskian(&self) -> C64 {
        self.wronskian
    }

    /// `R^m(r, r') = f(r_<) φ(r_>) / W` in `L²(r dr)`.
    pub fn kernel(&self, r: f64, rp: f64) -> Result<C64> {
        if !(r > 0.0 && rp > 0.0) {
            return Err(Error::Domain(format!("radii must be positive: r = {r}, r' = {rp}")));
        }
        let (lo, hi) = if r <= rp { (r, rp) } else { (rp, r) };
        Ok(self.f_reg(lo)?.0 * self.phi(hi)?.0 / self.wronskian)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelEval {
    pub m: i64,
    pub point: SpectralPoint,
    pub r: f64,
    pub rp: f64,
    pub value: C64,
}

/// Single channel kernel value.
pub fn channel_kernel(alpha: f64, m: i64, point: SpectralPoint, r: f64, rp: f64) -> Result<ChannelEval> {
    let value = ChannelSolution::new(alpha, m, point)?.kernel(r, rp)?;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Singular(format!("channel {m}: kernel not finite at ({r}, {rp})")));
    }
    Ok(ChannelEval { m, point, r, rp, value })
}

/// Matching data at `r = 1` in the Kummer normalization `v_m`, `u_m`.
///
/// Positive side: `f = A J_ν + B Y_ν` outside, the outgoing solution is
/// `C v + D u` inside, `W = (2/π)(B − isA)` with `s = ±1` the side. Negative
/// side: `f = Ã I_ν + B̃ K_ν`, `W̃ = Ã`, `D̃ = Γ(a)Ã/Γ(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub positive: bool,
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    pub w: C64,
}

pub fn matching_coefficients(alpha: f64, m: i64, point: SpectralPoint) -> Result<Matching> {
    let iv = interior_solutions(alpha, m, &point, 1.0)?;
    let (v, dv, u, du) = (iv.v, iv.dv, iv.u, iv.du);
    let nu = (m as f64 + alpha).abs();
    let k = point.lambda.abs().sqrt();
    let (ka, kb) = kummer_params(alpha, m, point.kappa(alpha));
    let gratio = gamma_c(ka) * rgamma_c(C64::new(kb, 0.0));
    let (positive, a, b, out, dout) = if point.lambda > 0.0 {
        let s = point.side.sign();
        let (j, y, dj, dy) = jy(nu, k)?;
        let a = (v * k * dy - dv * y) * (PI / 2.0);
        let b = (dv * j - v * k * dj) * (PI / 2.0);
        (true, a, b, C64::new(j, s * y), C64::new(k * dj, s * k * dy))
    } else {
        let (i, kk, di, dk) = ik(nu, k)?;
        let a = dv * kk - v * k * dk;
        let b = v * k * di - dv * i;
        (false, a, b, C64::new(kk, 0.0), C64::new(k * dk, 0.0))
    };
    let w = if positive { (b - C64::i() * point.side.sign() * a) * (2.0 / PI) } else { a };
    let d = w * gratio;
    let c = (out * du - dout * u) / (v * du - dv * u);
    Ok(Matching { positive, a, b, c, d, w })
}

/// Two-dimensional kernel with its channel-truncation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullKernel {
    pub value: C64,
    pub tail_bound: f64,
    pub m_max: i64,
}

/// `(1/2π) Σ_{|m−k(α)| ≤ m_max} R^m(r, r') e^{im(θ−θ')}`.
///
/// The tail bound extrapolates the two outermost channels with the envelope
/// `|m+α|^{−3/2} (r_</r_>)^{|m+α|}`; it is an error if it exceeds
/// `1e-6·|value|` (or `1e-12`).
pub fn full_kernel(alpha: f64, point: SpectralPoint, x: [f64; 2], y: [f64; 2], m_max: i64) -> Result<FullKernel> {
    let fp = flux_params(alpha)?;
    let k0 = fp.k_star.primary();
    if m_max < 5 {
        return Err(Error::Domain(format!("m_max = {m_max} below 5")));
    }
    let (r, th) = polar(x);
    let (rp, thp) = polar(y);
    if x == y || r == 0.0 || rp == 0.0 {
        return Err(Error::Domain("full kernel needs x != y, both off the origin".into()));
    }
    let ms: Vec<i64> = (k0 - m_max..=k0 + m_max).collect();
    let vals = par::map(&ms, |&m| -> Result<C64> {
        let ph = C64::from_polar(1.0, m as f64 * (th - thp));
        Ok(ChannelSolution::new(alpha, m, point)?.kernel(r, rp)? * ph)
    });
    let mut sum = C64::new(0.0, 0.0);
    for v in &vals {
        sum += *v.as_ref().map_err(|e| e.clone())?;
    }
    let value = sum / (2.0 * PI);
    let q = r.min(rp) / r.max(rp);
    let edge = (vals[0].as_ref().unwrap().norm() + vals[vals.len() - 1].as_ref().unwrap().norm()) / (2.0 * PI);
    let mut tail = 0.0;
    let mut w = 1.0;
    for j in 1..2_000_000 {
        w *= q;
        let t = w * ((m_max + j) as f64 / m_max as f64).powf(-1.5);
        tail += t;
        if t < 1e-16 * tail {
            break;
        }
    }
    let tail_bound = edge * tail;
    if tail_bound > (1e-6 * value.norm()).max(1e-12) {
        return Err(Error::Check(format!("channel tail bound {tail_bound:e} too large at m_max = {m_max}")));
    }
    Ok(FullKernel { value, tail_bound, m_max })
}

fn polar(x: [f64; 2]) -> (f64, f64) {
    (x[0].hypot(x[1]), x[1].atan2(x[0]))
}

#[cfg(test)]
mod tests {
    use super::super::Side;
    use super::*;

    fn pt(l: f64) -> SpectralPoint {
        SpectralPoint::plus(l).unwrap()
    }

    #[test]
    fn free_case() {
        let (m, lam, r, rp) = (1, 0.3_f64, 0.5, 2.0);
        let k: f64 = lam.sqrt();
        let got = channel_kernel(0.0, m, pt(lam), r, rp).unwrap().value;
        let (j, _, _, _) = jy(1.0, k * r).unwrap();
        let (j2, y2, _, _) = jy(1.0, k * rp).unwrap();
        let want = C64::new(0.0, PI / 2.0) * j * C64::new(j2, y2);
        assert!((got - want).norm() < 1e-8 * want.norm(), "{got} {want}");
    }

    #[test]
    fn symmetric_continuous_and_jump() {
        let alpha = 0.3;
        let cs = ChannelSolution::new(alpha, 1, pt(0.02)).unwrap();
        assert_eq!(cs.kernel(0.4, 2.5).unwrap(), cs.kernel(2.5, 0.4).unwrap());
        for f in [ChannelSolution::f_reg, ChannelSolution::phi] {
            let (a, da) = f(&cs, 1.0).unwrap();
            let (b, db) = f(&cs, 1.0 + 1e-12).unwrap();
            assert!((a - b).norm() < 1e-8 * a.norm());
            assert!((da - db).norm() < 1e-8 * da.norm());
        }
        // Wronskian is r-independent
        for &r in &[0.3, 0.9, 3.0] {
            let (f, df) = cs.f_reg(r).unwrap();
            let (p, dp) = cs.phi(r).unwrap();
            let w = (df * p - f * dp) * r;
            assert!((w - cs.wronskian()).norm() < 1e-8 * w.norm());
        }
        // derivative jump of √(rr')R across the diagonal is −1
        let r0 = 0.7;
        let h = 1e-5;
        let g = |r: f64| cs.kernel(r, r0).unwrap() * (r * r0).sqrt();
        let jump = (g(r0 + h) - g(r0)) / h - (g(r0) - g(r0 - h)) / h;
        assert!((jump + 1.0).norm() < 1e-4, "{jump}");
    }

    #[test]
    fn negative_side_real_positive() {
        for m in -3..=3 {
            let cs = ChannelSolution::new(2.3, m, SpectralPoint::plus(-0.04).unwrap()).unwrap();
            for &(r, rp) in &[(0.5, 0.5), (0.3, 2.0), (3.0, 3.0)] {
                let v = cs.kernel(r, rp).unwrap();
                assert!(v.im.abs() <= 1e-10 * v.norm());
                if r == rp {
                    assert!(v.re > 0.0);
                }
            }
        }
    }

    #[test]
    fn stone_positivity() {
        for m in -2..=2 {
            for &l in &[0.01, 0.3, 2.0] {
                let cs = ChannelSolution::new(0.3, m, pt(l)).unwrap();
                for &r in &[0.2, 0.9, 1.5, 6.0] {
                    assert!(cs.kernel(r, r).unwrap().im >= -1e-10);
                }
            }
        }
    }

    #[test]
    fn matching_wronskians() {
        let mc = matching_coefficients(0.3, 0, pt(0.04)).unwrap();
        assert!(mc.positive);
        let want = (mc.b - C64::i() * mc.a) * (2.0 / PI);
        assert!((mc.w - want).norm() < 1e-14 * want.norm());
        // against the independently assembled kernel Wronskian (rescaled by v = reg·(2κ)^p)
        let cs = ChannelSolution::new(0.3, 0, pt(0.04)).unwrap();
        assert!((cs.wronskian() - mc.w).norm() < 1e-10 * mc.w.norm());
        let mc = matching_coefficients(2.3, -1, SpectralPoint::plus(-0.04).unwrap()).unwrap();
        assert!(!mc.positive);
        assert_eq!(mc.w, mc.a);
        let kappa = SpectralPoint::plus(-0.04).unwrap().kappa(2.3);
        let cs = ChannelSolution::new(2.3, -1, SpectralPoint::plus(-0.04).unwrap()).unwrap();
        assert!((cs.wronskian() * 2.0 * kappa - mc.w).norm() < 1e-10 * mc.w.norm());
        // v carries (2κ)^{|m|}, so W itself is not conjugated across sides; the kernel is
        let minus = SpectralPoint::new(0.2, Side::Minus).unwrap();
        let p = ChannelSolution::new(0.3, 1, pt(0.2)).unwrap().kernel(0.4, 1.9).unwrap();
        let q = ChannelSolution::new(0.3, 1, minus).unwrap().kernel(0.4, 1.9).unwrap();
        assert!((p.conj() - q).norm() < 1e-13 * p.norm(), "{p} {q}");
        let mp = matching_coefficients(0.3, 1, pt(0.2)).unwrap();
        let mm = matching_coefficients(0.3, 1, minus).unwrap();
        assert_eq!((mp.a, mp.b), (mm.a, mm.b));
    }

    #[test]
    fn matching_d_consistent_with_outgoing_derivative() {
        // C v' + D u' must reproduce the outgoing derivative at r = 1.
        let (alpha, m, lam) = (0.3, 1, 0.05);
        let p = pt(lam);
        let mc = matching_coefficients(alpha, m, p).unwrap();
        let iv = interior_solutions(alpha, m, &p, 1.0).unwrap();
        let k = lam.sqrt();
        let (_, _, dj, dy) = jy(1.3, k).unwrap();
        let want = C64::new(k * dj, k * dy);
        let got = mc.c * iv.dv + mc.d * iv.du;
        assert!((got - want).norm() < 1e-9 * want.norm(), "{got} {want}");
    }

    #[test]
    fn small_lambda_a_m() {
        use super::super::threshold::ThresholdConstants;
        let alpha = 0.3;
        let tc = ThresholdConstants::new(alpha, 3).unwrap();
        // the relative correction is O((√λ/2)^{2ν}): λ = 1e-8 suffices for ν ≥ 0.7,
        // ν = 0.3 needs λ = 1e-12 for 1e-3
        for (m, lam) in [(1, 1e-8), (-1, 1e-8), (0, 1e-12)] {
            let mc = matching_coefficients(alpha, m, pt(lam)).unwrap();
            let nu = (m as f64 + alpha).abs();
            let lead = mc.a * (lam.sqrt() / 2.0).powf(nu) * 2.0 / crate::specfun::gamma(nu).unwrap();
            let c = tc.channel(m).unwrap();
            let want = c.da + nu * c.a;
            assert!((lead.re - want).abs() < 1e-3 * want.abs(), "m={m} {lead} {want}");
        }
    }

    #[test]
    fn full_kernel_properties() {
        let neg = SpectralPoint::plus(-0.1).unwrap();
        let a = full_kernel(2.3, neg, [1.0, 0.0], [0.0, 2.0], 40).unwrap();
        let b = full_kernel(2.3, neg, [0.0, 2.0], [1.0, 0.0], 40).unwrap();
        assert!((a.value - b.value.conj()).norm() < 1e-10 * a.value.norm());
        let rot = |v: [f64; 2], t: f64| [v[0] * t.cos() - v[1] * t.sin(), v[0] * t.sin() + v[1] * t.cos()];
        let p = pt(0.05);
        let x = [0.8, 0.3];
        let y = [-1.2, 1.9];
        let k1 = full_kernel(0.3, p, x, y, 40).unwrap().value;
        let k2 = full_kernel(0.3, p, rot(x, PI / 3.0), rot(y, PI / 3.0), 40).unwrap().value;
        assert!((k1 - k2).norm() < 1e-10 * k1.norm());
        assert!(full_kernel(0.3, p, [1.0, 0.0], [0.0, 1.0], 40).is_err());
    }

    #[test]
    fn single_harmonic_projection() {
        // ∫∫ e^{-imθ} K(x,y) e^{imθ'} dθ dθ' = 2π·R^m
        let (alpha, m, lam) = (2.3, -2, 0.01);
        let p = pt(lam);
        let (r, rp) = (0.6, 1.7);
        let n = 32;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            let th = 2.0 * PI * i as f64 / n as f64;
            // rotation covariance reduces the double integral to one angle
            let k = full_kernel(alpha, p, [r * th.cos(), r * th.sin()], [rp, 0.0], 40).unwrap().value;
            acc += k * C64::from_polar(1.0, -(m as f64) * th);
        }
        let proj = acc * (2.0 * PI / n as f64);
        let want = channel_kernel(alpha, m, p, r, rp).unwrap().value;
        assert!((proj - want).norm() < 1e-8 * want.norm(), "{proj} {want}");
    }
}
