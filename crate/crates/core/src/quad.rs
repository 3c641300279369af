//! Quadrature rules: Gauss–Legendre nodes, adaptive Gauss–Kronrod (real and
//! complex integrands), and Filon-type integration of `p(x) e^{-iωx}` for a
//! Chebyshev interpolant `p`.

use crate::{Error, Result, C64};
use std::ops::{Add, Mul, Sub};

/// Values an adaptive rule can integrate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn mag(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn mag(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn mag(self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).mag())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quad<T> {
    pub value: T,
    pub err: f64,
}

/// Globally adaptive Gauss–Kronrod 7/15 on a finite interval.
///
/// Stops once the summed error estimate is below `max(abs_tol, rel_tol·|I|)`
/// or falls to the rounding floor; fails after `max_intervals` bisections.
pub fn adaptive<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quad<T>> {
    adaptive_limit(f, a, b, abs_tol, rel_tol, 4000)
}

pub fn adaptive_limit<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Quad<T>> {
    if a == b {
        return Ok(Quad { value: T::zero(), err: 0.0 });
    }
    let (v, e) = gk15(&f, a, b);
    let mut segs: Vec<(f64, f64, T, f64)> = vec![(a, b, v, e)];
    loop {
        let mut total = T::zero();
        let mut err = 0.0;
        let mut worst = 0;
        let mut worst_err = -1.0;
        for (i, s) in segs.iter().enumerate() {
            total = total + s.2;
            err += s.3;
            if s.3 > worst_err {
                worst_err = s.3;
                worst = i;
            }
        }
        let target = abs_tol.max(rel_tol * total.mag());
        let floor = 1e-15 * segs.iter().map(|s| s.2.mag()).sum::<f64>();
        if err <= target || err <= floor {
            return Ok(Quad { value: total, err });
        }
        if segs.len() >= max_intervals {
            return Err(Error::Quadrature(format!(
                "adaptive GK on [{a}, {b}] stalled at error {err:e} (target {target:e})"
            )));
        }
        let (l, r, _, _) = segs.swap_remove(worst);
        let m = 0.5 * (l + r);
        if m <= l || m >= r {
            return Ok(Quad { value: total, err });
        }
        let (v1, e1) = gk15(&f, l, m);
        let (v2, e2) = gk15(&f, m, r);
        segs.push((l, m, v1, e1));
        segs.push((m, r, v2, e2));
    }
}

/// Integral over `[a, ∞)` split into geometrically growing panels until the
/// panel contribution drops below `abs_tol` twice in a row.
pub fn adaptive_to_inf<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    first_width: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quad<T>> {
    let mut total = T::zero();
    let mut err = 0.0;
    let mut lo = a;
    let mut w = first_width;
    let mut quiet = 0;
    for _ in 0..200 {
        let q = adaptive(&f, lo, lo + w, abs_tol * 0.1, rel_tol)?;
        total = total + q.value;
        err += q.err;
        if q.value.mag() <= abs_tol.max(rel_tol * total.mag()) * 1e-3 {
            quiet += 1;
            if quiet >= 2 {
                return Ok(Quad { value: total, err });
            }
        } else {
            quiet = 0;
        }
        lo += w;
        w *= 2.0;
    }
    Err(Error::Quadrature("semi-infinite integral did not settle".into()))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Legendre nodes/weights mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|t| h * t).collect())
}

/// Chebyshev points of the second kind `cos(jπ/n)`, `j = 0..=n`, on `[-1, 1]`.
pub fn cheb_points(n: usize) -> Vec<f64> {
    (0..=n).map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos()).collect()
}

/// Chebyshev coefficients of the interpolant through values at [`cheb_points`].
pub fn cheb_coeffs(vals: &[C64]) -> Vec<C64> {
    let n = vals.len() - 1;
    let nf = n as f64;
    (0..=n)
        .map(|k| {
            let mut s = C64::new(0.0, 0.0);
            for (j, v) in vals.iter().enumerate() {
                let wj = if j == 0 || j == n { 0.5 } else { 1.0 };
                s += v * (wj * (std::f64::consts::PI * (k * j) as f64 / nf).cos());
            }
            let ck = if k == 0 || k == n { 1.0 / nf } else { 2.0 / nf };
            s * ck
        })
        .collect()
}

/// Moments `∫_{-1}^{1} T_k(x) e^{-iωx} dx` for `k = 0..=n`.
///
/// Forward three-term recurrence when `ω` is large compared with `n`,
/// Gauss–Legendre otherwise.
pub fn cheb_fourier_moments(n: usize, omega: f64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n + 1];
    if omega.abs() > 2.0 * n as f64 + 4.0 {
        // I_k = ∫ T_k e^{iwx}, with w = -omega.
        let w = -omega;
        let ep = C64::from_polar(1.0, w);
        let em = C64::from_polar(1.0, -w);
        let iw = C64::new(0.0, w);
        let bnd = |j: usize| if j % 2 == 0 { ep - em } else { ep + em };
        out[0] = bnd(0) / iw;
        if n >= 1 {
            // ∫ x e^{iwx} = [x e^{iwx}/(iw)] - ∫ e^{iwx}/(iw)
            out[1] = (ep + em) / iw - out[0] / iw;
        }
        if n >= 2 {
            // 2 I_1 = ∫ T_2' e^{iwx}/2 ... handled by the general step with k=1:
            // T_1 = T_2'/4, so I_1 = (B_2 - iw I_2)/4.
            out[2] = (bnd(2) - out[1] * 4.0) / iw;
        }
        for k in 2..n {
            let kf = k as f64;
            // iw I_{k+1}/(k+1) = B_{k+1}/(k+1) - (B_{k-1} - iw I_{k-1})/(k-1) - 2 I_k
            let rhs = bnd(k + 1) / (kf + 1.0) - (bnd(k - 1) - iw * out[k - 1]) / (kf - 1.0) - out[k] * 2.0;
            out[k + 1] = rhs * (kf + 1.0) / iw;
        }
    } else {
        let m = n + omega.abs().ceil() as usize + 32;
        let (x, w) = gauss_legendre(m);
        for (xi, wi) in x.iter().zip(w.iter()) {
            let e = C64::from_polar(*wi, -omega * xi);
            let (mut t0, mut t1) = (1.0, *xi);
            out[0] += e;
            if n >= 1 {
                out[1] += e * t1;
            }
            for slot in out.iter_mut().skip(2) {
                let t2 = 2.0 * xi * t1 - t0;
                *slot += e * t2;
                t0 = t1;
                t1 = t2;
            }
        }
    }
    out
}

/// `∫_a^b h(λ) e^{-itλ} dλ` where `h` is given by its values at the Chebyshev
/// points mapped to `[a, b]` (Filon rule on one panel).
pub fn filon_panel(a: f64, b: f64, coeffs: &[C64], t: f64) -> C64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mom = cheb_fourier_moments(coeffs.len() - 1, t * h);
    let s: C64 = coeffs.iter().zip(mom.iter()).map(|(p, q)| p * q).sum();
    s * C64::from_polar(h, -t * c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(6)).sum();
        assert!((s - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let q = adaptive(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert!((q.value - 2.0).abs() < 1e-9, "{}", q.value);
        let q = adaptive_to_inf(|x: f64| (-x).exp(), 0.0, 1.0, 1e-14, 1e-13).unwrap();
        assert!((q.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments_agree_between_branches() {
        let n = 10;
        for &om in &[0.0, 3.0, 30.0, 300.0] {
            let a = cheb_fourier_moments(n, om);
            let m = n + om.ceil() as usize + 80;
            let (x, w) = gauss_legendre(m);
            for k in 0..=n {
                let s: C64 = x
                    .iter()
                    .zip(&w)
                    .map(|(x, w)| C64::from_polar(*w, -om * x) * (k as f64 * x.acos()).cos())
                    .sum();
                assert!((s - a[k]).norm() < 1e-12, "k={k} om={om} {s} {}", a[k]);
            }
        }
    }

    #[test]
    fn filon_matches_closed_form() {
        let n = 16;
        let (a, b) = (0.5, 2.0);
        let vals: Vec<C64> = cheb_points(n)
            .iter()
            .map(|x| {
                let l = 0.5 * (a + b) + 0.5 * (b - a) * x;
                C64::new(l * l, 0.0)
            })
            .collect();
        let c = cheb_coeffs(&vals);
        for &t in &[0.1, 7.0, 500.0] {
            let got = filon_panel(a, b, &c, t);
            let i = C64::i();
            let f = |l: f64| {
                let e = (-i * t * l).exp();
                e * (i * l * l / t + 2.0 * l / (t * t) - 2.0 * i / (t * t * t))
            };
            let want = f(b) - f(a);
            assert!((got - want).norm() < 1e-12 * want.norm().max(1e-3), "t={t} {got} {want}");
        }
    }
}
