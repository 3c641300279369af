//! Bessel functions of real order.
//!
//! `J_ν, Y_ν` and `I_ν, K_ν` for `ν ≥ 0` use the Temme series (small `x`) or
//! Steed's continued fraction (larger `x`) at the reduced order `|μ| ≤ 1/2`,
//! followed by recurrence in the order. `J_ν` and `I_ν` at small arguments, and
//! `J_ν` of negative non-integer order, come from the power series.

use super::gamma::{gamma_any, ln_gamma, temme_gammas};
use crate::{Error, Result};
use std::f64::consts::PI;

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-290;
const MAXIT: usize = 200_000;
const XMIN: f64 = 2.0;
pub const MAX_ORDER: f64 = 60.0;

/// `J_ν(x)` by its power series; valid for any real `ν` not a negative
/// integer and moderate `x`.
pub fn j_series(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        let kf = k as f64;
        term *= q / (kf * (nu + kf));
        sum += term;
        if term.abs() < EPS * sum.abs() && kf > -nu {
            break;
        }
    }
    series_prefactor(nu, x) * sum
}

/// `I_ν(x)` by its power series.
pub fn i_series(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..2000 {
        let kf = k as f64;
        term *= q / (kf * (nu + kf));
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    series_prefactor(nu, x) * sum
}

/// `(x/2)^ν / Γ(ν+1)`, computed in log form for large orders.
fn series_prefactor(nu: f64, x: f64) -> f64 {
    if nu + 1.0 > 0.0 {
        (nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)).exp()
    } else {
        (0.5 * x).powf(nu) / gamma_any(nu + 1.0)
    }
}

/// `(J_ν, Y_ν, J'_ν, Y'_ν)` at `x > 0`, `ν ≥ 0`.
pub fn jy(nu: f64, x: f64) -> Result<(f64, f64, f64, f64)> {
    if !(x > 0.0) || nu < 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("jy requires x > 0, nu >= 0 (nu={nu}, x={x})")));
    }
    if nu > MAX_ORDER {
        return Err(Error::OrderRange(format!("|nu| = {nu} exceeds {MAX_ORDER}")));
    }
    let nl = if x < XMIN { (nu + 0.5) as usize } else { ((nu - x + 1.5).max(0.0)) as usize };
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    let (rjmu, rymu, ry1, jfinal) = if x < XMIN {
        // Temme series for Y_μ, Y_{μ+1}; J directly from its series.
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = 2.0 / PI * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let e = e.exp();
        let mut p = e / (gampl * PI);
        let mut q = 1.0 / (e * PI * gammi);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < EPS { 1.0 } else { pimu2.sin() / pimu2 };
        let r = PI * pimu2 * fact3 * fact3;
        let mut c = 1.0;
        let d = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= d / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * (ff + r * q);
            sum += del;
            let del1 = c * p - fi * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::NonConvergence("Temme series for Y".into()));
        }
        let jv = j_series(nu, x);
        let jv1 = j_series(nu + 1.0, x);
        (0.0, -sum, -sum1 * xi2, Some((jv, nu * xi * jv - jv1)))
    } else {
        // CF1 for J'_ν/J_ν, downward recurrence to μ, then Steed's CF2.
        let mut isign = 1.0;
        let mut h = (nu * xi).max(FPMIN);
        let mut b = xi2 * nu;
        let mut d = 0.0;
        let mut c = h;
        let mut ok = false;
        for _ in 0..MAXIT {
            b += xi2;
            d = b - d;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = b - 1.0 / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let del = c * d;
            h *= del;
            if d < 0.0 {
                isign = -isign;
            }
            if (del - 1.0).abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::NonConvergence("CF1 in jy".into()));
        }
        let mut rjl = isign * 1e-200;
        let mut rjpl = h * rjl;
        let rjl1 = rjl;
        let rjp1 = rjpl;
        let mut fact = nu * xi;
        for _ in 0..nl {
            let rjtemp = fact * rjl + rjpl;
            fact -= xi;
            rjpl = fact * rjtemp - rjl;
            rjl = rjtemp;
        }
        if rjl == 0.0 {
            rjl = EPS;
        }
        let f = rjpl / rjl;
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let mut dlr = cr * dr - ci * di;
        let mut dli = cr * di + ci * dr;
        let mut temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        let mut ok = false;
        for i in 2..MAXIT {
            a += 2.0 * (i as f64 - 1.0);
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < FPMIN {
                dr = FPMIN;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < FPMIN {
                cr = FPMIN;
            }
            den = dr * dr + di * di;
            dr /= den;
            di /= -den;
            dlr = cr * dr - ci * di;
            dli = cr * di + ci * dr;
            temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::NonConvergence("CF2 in jy".into()));
        }
        let gam = (p - f) / q;
        let mut rjmu = (w / ((p - f) * gam + q)).sqrt();
        if rjl < 0.0 {
            rjmu = -rjmu;
        }
        let rymu = rjmu * gam;
        let rymup = rymu * (p + q / gam);
        let ry1 = xmu * xi * rymu - rymup;
        let fct = rjmu / rjl;
        (rjmu, rymu, ry1, Some((rjl1 * fct, rjp1 * fct)))
    };
    let _ = rjmu;
    let (rj, rjp) = jfinal.unwrap();
    let mut rymu = rymu;
    let mut ry1 = ry1;
    for i in 1..=nl {
        let rytemp = (xmu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = rytemp;
    }
    let ry = rymu;
    let ryp = nu * xi * rymu - ry1;
    Ok((rj, ry, rjp, ryp))
}

/// `(I_ν, K_ν, I'_ν, K'_ν)` at `x > 0`, `ν ≥ 0`.
pub fn ik(nu: f64, x: f64) -> Result<(f64, f64, f64, f64)> {
    if !(x > 0.0) || nu < 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("ik requires x > 0, nu >= 0 (nu={nu}, x={x})")));
    }
    if nu > MAX_ORDER {
        return Err(Error::OrderRange(format!("|nu| = {nu} exceeds {MAX_ORDER}")));
    }
    let nl = (nu + 0.5) as usize;
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let (mut rkmu, mut rk1) = if x < XMIN {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let e = e.exp();
        let mut p = 0.5 * e / gampl;
        let mut q = 0.5 / (e * gammi);
        let mut c = 1.0;
        let d = x2 * x2;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= d / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::NonConvergence("Temme series for K".into()));
        }
        (sum, sum1 * xi2)
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - xmu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut ok = false;
        for i in 2..MAXIT {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::NonConvergence("CF2 in ik".into()));
        }
        h *= a1;
        let rkmu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        let rk1 = rkmu * (xmu + x + 0.5 - h) * xi;
        (rkmu, rk1)
    };
    // I from its series at small x (no overflow in the downward recurrence),
    // else CF1 + downward recurrence normalised by the Wronskian.
    let (ri, rip) = if x < XMIN || x * x < 0.5 * (nu + 1.0) {
        let iv = i_series(nu, x);
        let iv1 = i_series(nu + 1.0, x);
        (iv, iv1 + nu * xi * iv)
    } else {
        let mut h = (nu * xi).max(FPMIN);
        let mut b = xi2 * nu;
        let mut d = 0.0;
        let mut c = h;
        let mut ok = false;
        for _ in 0..MAXIT {
            b += xi2;
            d = 1.0 / (b + d);
            c = b + 1.0 / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::NonConvergence("CF1 in ik".into()));
        }
        let mut ril = 1e-200;
        let mut ripl = h * ril;
        let ril1 = ril;
        let rip1 = ripl;
        let mut fact = nu * xi;
        for _ in 0..nl {
            let ritemp = fact * ril + ripl;
            fact -= xi;
            ripl = fact * ritemp + ril;
            ril = ritemp;
        }
        let f = ripl / ril;
        let rkmup = xmu * xi * rkmu - rk1;
        let rimu = xi / (f * rkmu - rkmup);
        (rimu * ril1 / ril, rimu * rip1 / ril)
    };
    for i in 1..=nl {
        let rktemp = (xmu + i as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = rktemp;
    }
    let rk = rkmu;
    let rkp = nu * xi * rkmu - rk1;
    Ok((ri, rk, rip, rkp))
}

/// `J_ν(x)` for real `ν` (negative non-integer orders via the series for
/// `x ≤ 12`, otherwise the reflection `J_{-ν} = cos(νπ)J_ν − sin(νπ)Y_ν`).
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if nu.abs() > MAX_ORDER {
        return Err(Error::OrderRange(format!("|nu| = {nu} exceeds {MAX_ORDER}")));
    }
    if nu >= 0.0 {
        return Ok(jy(nu, x)?.0);
    }
    if nu == nu.floor() {
        let n = -nu;
        let s = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(s * jy(n, x)?.0);
    }
    if x <= 12.0 {
        return Ok(j_series(nu, x));
    }
    let n = -nu;
    let (j, y, _, _) = jy(n, x)?;
    Ok((n * PI).cos() * j - (n * PI).sin() * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wronskian_jy_small_and_large() {
        for &nu in &[0.0, 0.3, 1.0, 2.5, 7.0, 10.5, 33.3] {
            for &x in &[1e-3, 0.1, 1.0, 1.99, 2.01, 5.0, 30.0, 50.0, 100.0] {
                let (j0, y0, _, _) = jy(nu, x).unwrap();
                let (j1, y1, _, _) = jy(nu + 1.0, x).unwrap();
                let w = j1 * y0 - y1 * j0;
                let want = 2.0 / (PI * x);
                assert!(((w - want) / want).abs() < 1e-12, "nu={nu} x={x} w={w} want={want}");
            }
        }
    }

    #[test]
    fn wronskian_ik_small_and_large() {
        for &nu in &[0.0, 0.4, 1.0, 3.5, 10.5, 40.0] {
            for &x in &[1e-3, 0.1, 1.0, 1.99, 2.01, 5.0, 30.0, 50.0] {
                let (i0, k0, _, _) = ik(nu, x).unwrap();
                let (i1, k1, _, _) = ik(nu + 1.0, x).unwrap();
                let w = k1 * i0 + k0 * i1;
                assert!(((w * x) - 1.0).abs() < 1e-12, "nu={nu} x={x} {}", w * x);
            }
        }
    }

    #[test]
    fn known_values() {
        // J0(1), Y0(1), I0(1), K0(1), J_{1/2}(x) = sqrt(2/(πx)) sin x
        assert!((jy(0.0, 1.0).unwrap().0 - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((jy(0.0, 1.0).unwrap().1 - 0.088_256_964_215_676_96).abs() < 1e-15);
        assert!((ik(0.0, 1.0).unwrap().0 - 1.266_065_877_752_008_4).abs() < 1e-14);
        assert!((ik(0.0, 1.0).unwrap().1 - 0.421_024_438_240_708_3).abs() < 1e-15);
        for &x in &[0.5, 3.0, 40.0] {
            let want = (2.0 / (PI * x)).sqrt() * x.sin();
            assert!((jy(0.5, x).unwrap().0 - want).abs() < 1e-14);
            let wk = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(((ik(0.5, x).unwrap().1 - wk) / wk).abs() < 1e-14);
        }
    }

    #[test]
    fn negative_order_reflection() {
        for &nu in &[0.3, 1.7, 2.5] {
            for &x in &[0.5, 3.0, 10.0] {
                let (j, y, _, _) = jy(nu, x).unwrap();
                let jm = bessel_j(-nu, x).unwrap();
                let d = (nu * PI).sin() * y + jm - (nu * PI).cos() * j;
                assert!(d.abs() < 1e-12, "nu={nu} x={x} d={d}");
            }
        }
    }
}
