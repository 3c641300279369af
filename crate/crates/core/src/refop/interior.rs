//! Solutions of the interior channel equation
//! `r²F'' + rF' − (m² + βr + κ²r²)F = 0`, `β = 2mα`, on `0 < r ≤ 1`.
//!
//! Two representations: the Kummer form `v = e^{−κr}(2κr)^{|m|} M(a, b, 2κr)`,
//! `u` likewise with `U`, `a = 1/2 + |m| + mα/κ`, `b = 1 + 2|m|`; and a
//! Frobenius pair depending on `κ²` only, which stays valid at `κ = 0`.

use super::SpectralPoint;
use crate::specfun::kummer;
use crate::{Error, Result, C64};

const MAX_TERMS: usize = 4000;

/// `(v, v', u, u')` at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorValues {
    pub v: C64,
    pub dv: C64,
    pub u: C64,
    pub du: C64,
}

/// Kummer parameters `(a, b)` of channel `m` at `κ`.
pub fn kummer_params(alpha: f64, m: i64, kappa: C64) -> (C64, f64) {
    let p = m.unsigned_abs() as f64;
    (0.5 + p + m as f64 * alpha / kappa, 1.0 + 2.0 * p)
}

/// Kummer-form interior solutions with `r`-derivatives.
pub fn interior_solutions(alpha: f64, m: i64, point: &SpectralPoint, r: f64) -> Result<InteriorValues> {
    interior_at_kappa(alpha, m, point.kappa(alpha), r)
}

/// As [`interior_solutions`] for an explicit `κ` (`κ = |α|` gives `λ = 0`).
pub fn interior_at_kappa(alpha: f64, m: i64, kappa: C64, r: f64) -> Result<InteriorValues> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("interior radius r = {r} outside (0, 1]")));
    }
    if kappa.norm() == 0.0 {
        return Err(Error::Domain("kappa = 0: Kummer form undefined".into()));
    }
    let p = m.unsigned_abs() as i32;
    let (a, b) = kummer_params(alpha, m, kappa);
    let z = 2.0 * kappa * r;
    let pre = (-kappa * r).exp() * z.powi(p);
    let (mm, _) = kummer::kummer_m(a, b, z)?;
    let (uu, _) = kummer::kummer_u(a, b, z)?;
    let (dm, du) = kummer::kummer_derivatives(a, b, z)?;
    let log_d = -kappa + p as f64 / r;
    let v = pre * mm;
    let u = pre * uu;
    Ok(InteriorValues { v, dv: v * log_d + pre * 2.0 * kappa * dm, u, du: u * log_d + pre * 2.0 * kappa * du })
}

/// Frobenius pair about `r = 0`:
/// `reg = Σ c_n r^{n+p}` (`c₀ = 1`), and
/// `sec = C·reg·log r + Σ d_n r^{n−p}` (`d₀ = 1` for `p > 0`; `C = 1`, `d₀ = 0`
/// for `p = 0`). `r·(reg·sec' − reg'·sec) = −2p` for `p > 0` and `1` for `p = 0`.
#[derive(Debug, Clone)]
pub struct Frobenius {
    pub p: usize,
    pub log_coef: C64,
    c: Vec<C64>,
    d: Vec<C64>,
}

/// `(reg, reg', sec, sec')`.
#[derive(Debug, Clone, Copy)]
pub struct FrobeniusValues {
    pub reg: C64,
    pub dreg: C64,
    pub sec: C64,
    pub dsec: C64,
}

impl Frobenius {
    /// Coefficients for `β = 2mα`, `q = κ² = α² − λ`, converged for `r ≤ 1`.
    pub fn new(alpha: f64, m: i64, q: C64) -> Result<Self> {
        let p = m.unsigned_abs() as usize;
        let beta = 2.0 * m as f64 * alpha;
        let zero = C64::new(0.0, 0.0);
        let at = |v: &[C64], i: isize| if i < 0 { zero } else { v[i as usize] };

        let mut c = vec![C64::new(1.0, 0.0)];
        let mut csum = 1.0;
        let mut d: Vec<C64> = vec![if p == 0 { zero } else { C64::new(1.0, 0.0) }];
        let mut dsum = d[0].norm();
        let mut log_coef = if p == 0 { C64::new(1.0, 0.0) } else { zero };
        let mut quiet = 0;
        for n in 1..MAX_TERMS {
            let ni = n as isize;
            let nf = n as f64;
            let cn = (beta * at(&c, ni - 1) + q * at(&c, ni - 2)) / (nf * (nf + 2.0 * p as f64));
            c.push(cn);
            csum += cn.norm();
            let rhs = beta * at(&d, ni - 1) + q * at(&d, ni - 2);
            let dn = if p > 0 && n == 2 * p {
                log_coef = rhs / (2.0 * p as f64);
                zero
            } else {
                let forcing = if n >= 2 * p { 2.0 * log_coef * (nf - p as f64) * c[n - 2 * p] } else { zero };
                (rhs - forcing) / (nf * (nf - 2.0 * p as f64))
            };
            d.push(dn);
            dsum += dn.norm();
            let small = cn.norm() <= 1e-18 * csum && dn.norm() <= 1e-18 * dsum.max(log_coef.norm() * csum);
            if n > 2 * p + 4 && small {
                quiet += 1;
                if quiet >= 3 {
                    return Ok(Frobenius { p, log_coef, c, d });
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::NonConvergence(format!("Frobenius series for m = {m}, q = {q}")))
    }

    /// `r·W(reg, sec)`, constant in `r`.
    pub fn wronskian(&self) -> f64 {
        if self.p == 0 {
            1.0
        } else {
            -2.0 * self.p as f64
        }
    }

    /// Values at `0 < r ≤ 1`.
    pub fn eval(&self, r: f64) -> FrobeniusValues {
        let p = self.p as i32;
        // Horner in r for the power series parts.
        let mut s = C64::new(0.0, 0.0);
        let mut ds = C64::new(0.0, 0.0);
        for (n, cn) in self.c.iter().enumerate().rev() {
            s = s * r + cn;
            if n > 0 {
                ds = ds * r + cn * n as f64;
            }
        }
        // reg = r^p s(r), reg' = r^{p−1}(p s + r s')
        let rp = r.powi(p);
        let reg = s * rp;
        let dreg = (s * p as f64 + ds * r) * (rp / r);
        let mut t = C64::new(0.0, 0.0);
        let mut dt = C64::new(0.0, 0.0);
        for (n, dn) in self.d.iter().enumerate().rev() {
            t = t * r + dn;
            if n > 0 {
                dt = dt * r + dn * n as f64;
            }
        }
        let rm = r.powi(-p);
        let lr = r.ln();
        let sec = self.log_coef * reg * lr + t * rm;
        let dsec = self.log_coef * (dreg * lr + reg / r) + (dt * r - t * p as f64) * (rm / r);
        FrobeniusValues { reg, dreg, sec, dsec }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::{gamma_c, rgamma_c};

    fn residual(alpha: f64, m: i64, q: C64, f: impl Fn(f64) -> C64, r: f64) -> f64 {
        let h = 1e-4 * r;
        let (fm, f0, fp) = (f(r - h), f(r), f(r + h));
        let d2 = (fp - 2.0 * f0 + fm) / (h * h);
        let d1 = (fp - fm) / (2.0 * h);
        let beta = 2.0 * m as f64 * alpha;
        let res = d2 * r * r + d1 * r - (q * r * r + beta * r + (m * m) as f64) * f0;
        res.norm() / (f0.norm() * (1.0 + (m * m) as f64 + q.norm()))
    }

    #[test]
    fn frobenius_solves_and_wronskian() {
        for &(alpha, m, lam) in &[(0.3, 0, 0.05), (2.3, -2, -0.04), (1.0, 1, 1.0), (1.7, 3, 5.0), (0.3, -1, 0.01)] {
            let q = C64::new(alpha * alpha - lam, 0.0);
            let fr = Frobenius::new(alpha, m, q).unwrap();
            for &r in &[0.2, 0.6, 0.95] {
                assert!(residual(alpha, m, q, |x| fr.eval(x).reg, r) < 1e-5);
                assert!(residual(alpha, m, q, |x| fr.eval(x).sec, r) < 1e-5, "m={m} r={r}");
                let v = fr.eval(r);
                let w = (v.reg * v.dsec - v.dreg * v.sec) * r;
                assert!((w - fr.wronskian()).norm() < 1e-11 * fr.wronskian().abs(), "{w}");
            }
        }
    }

    #[test]
    fn frobenius_matches_kummer_v() {
        // v = (2κ)^p · reg
        for &(alpha, m, lam) in &[(0.3, 1, 0.01), (2.3, -2, -0.04), (1.7, 2, 0.0), (0.3, 0, 2.0)] {
            let pt = SpectralPoint { lambda: lam, side: super::super::Side::Plus };
            let kappa = if lam == 0.0 { C64::new(alpha, 0.0) } else { pt.kappa(alpha) };
            let fr = Frobenius::new(alpha, m, kappa * kappa).unwrap();
            let iv = interior_at_kappa(alpha, m, kappa, 0.5).unwrap();
            let want = fr.eval(0.5).reg * (2.0 * kappa).powi(m.abs() as i32);
            assert!((iv.v - want).norm() < 1e-12 * want.norm(), "{m} {lam}: {} {want}", iv.v);
        }
    }

    #[test]
    fn kummer_wronskian_at_one() {
        let (alpha, m) = (0.3, 1);
        let pt = SpectralPoint { lambda: 0.01, side: super::super::Side::Plus };
        let iv = interior_solutions(alpha, m, &pt, 1.0).unwrap();
        let (a, b) = kummer_params(alpha, m, pt.kappa(alpha));
        let want = gamma_c(C64::new(b, 0.0)) * rgamma_c(a);
        let w = iv.dv * iv.u - iv.v * iv.du;
        assert!((w - want).norm() < 1e-9 * want.norm(), "{w} {want}");
        assert!(iv.v.im == 0.0 && iv.u.im.abs() < 1e-14);
        let small = interior_solutions(alpha, 2, &pt, 1e-4).unwrap();
        assert!(small.v.norm() < 1e-7);
        assert!(interior_at_kappa(alpha, 0, C64::new(0.0, 0.0), 0.5).is_err());
    }
}
