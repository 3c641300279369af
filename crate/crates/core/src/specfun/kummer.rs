//! Kummer functions `M(a, b, z)` (series) and `U(a, b, z)` (Laplace-type
//! integral along a rotated ray, shifted in `a` by the contiguous relation when
//! `Re a` is small).

use super::gamma::{gamma_c, rgamma_c};
use crate::quad::{adaptive, adaptive_to_inf};
use crate::{Error, Result, C64};

const MAX_TERMS: usize = 10_000;

/// `M(a, b, z)` with its absolute error estimate.
pub fn kummer_m(a: C64, b: f64, z: C64) -> Result<(C64, f64)> {
    if b <= 0.0 && b == b.floor() {
        return Err(Error::Domain(format!("kummer_m: b = {b} is a non-positive integer")));
    }
    // Large negative real part: Kummer's transformation avoids cancellation.
    if z.re < -1.0 {
        let (m, e) = kummer_m_series(C64::new(b, 0.0) - a, b, -z)?;
        let ez = z.exp();
        return Ok((ez * m, e * ez.norm()));
    }
    kummer_m_series(a, b, z)
}

fn kummer_m_series(a: C64, b: f64, z: C64) -> Result<(C64, f64)> {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut mag = 1.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * z / ((b + nf) * (nf + 1.0));
        sum += term;
        mag += term.norm();
        if term.norm() <= 1e-17 * sum.norm() && nf > (a.norm() + z.norm()) {
            return Ok((sum, 4e-16 * mag));
        }
        if term.norm() == 0.0 {
            return Ok((sum, 4e-16 * mag));
        }
    }
    Err(Error::NonConvergence(format!("kummer_m series beyond {MAX_TERMS} terms")))
}

/// `Γ(a)·U(a, b, z)` by `∫₀^∞ e^{-zt} t^{a-1} (1+t)^{b-a-1} dt`, `Re a > 0`.
///
/// For complex `z` the ray is rotated to `arg t = -arg z`, so the exponential
/// is real and decaying along it.
fn gamma_u_integral(a: C64, b: f64, z: C64) -> Result<(C64, f64)> {
    let zeta = z.norm();
    let th = -z.arg();
    let rot = C64::from_polar(1.0, th);
    let bm = C64::new(b - 1.0, 0.0) - a;
    // σ = ζ s: Γ(a)U = e^{iθa} ζ^{-a} ∫ e^{-σ} σ^{a-1} (1 + σ e^{iθ}/ζ)^{b-a-1} dσ
    let g = |sigma: f64| -> C64 { (C64::new(1.0, 0.0) + rot * (sigma / zeta)).powc(bm) };
    // [0, 1]: subtract the endpoint value, ∫₀¹ σ^{a-1} dσ = 1/a, then σ = u².
    let two_a_m1 = 2.0 * a - 1.0;
    let head = adaptive(
        |u: f64| {
            if u == 0.0 {
                return C64::new(0.0, 0.0);
            }
            let s = u * u;
            C64::new(u, 0.0).powc(two_a_m1) * (g(s) * (-s).exp() - 1.0) * 2.0
        },
        0.0,
        1.0,
        1e-300,
        1e-14,
    )?;
    let head = crate::quad::Quad { value: head.value + 1.0 / a, err: head.err };
    let am1 = a - 1.0;
    let tail = adaptive_to_inf(
        |s: f64| C64::new(s, 0.0).powc(am1) * g(s) * (-s).exp(),
        1.0,
        4.0,
        1e-300_f64.max(head.value.norm() * 1e-17),
        1e-14,
    )?;
    let pre = (C64::i() * th * a).exp() * C64::new(zeta, 0.0).powc(-a);
    let v = pre * (head.value + tail.value);
    Ok((v, pre.norm() * (head.err + tail.err) + 1e-15 * v.norm()))
}

/// `U(a, b, z)` with error estimate, for `b > 0`, `z ≠ 0` off the negative real
/// axis. `Re a ≤ 0` is reached by downward recurrence in `a`.
pub fn kummer_u(a: C64, b: f64, z: C64) -> Result<(C64, f64)> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("kummer_u: b = {b} must be > 0")));
    }
    if z.norm() == 0.0 || (z.re < 0.0 && z.im == 0.0) {
        return Err(Error::Domain(format!("kummer_u: z = {z} not admissible")));
    }
    let shift = if a.re >= 1.0 { 0 } else { (1.0 - a.re).ceil() as usize };
    let u_at = |aa: C64| -> Result<(C64, f64)> {
        let (gu, e) = gamma_u_integral(aa, b, z)?;
        let rg = rgamma_c(aa);
        Ok((gu * rg, e * rg.norm()))
    };
    if shift == 0 {
        return u_at(a);
    }
    let top = a + shift as f64;
    let (mut u1, e1) = u_at(top + 1.0)?; // U(a+n+1)
    let (mut u0, e0) = u_at(top)?; // U(a+n)
    let rel = (e1 / u1.norm().max(1e-300)).max(e0 / u0.norm().max(1e-300));
    // U(c-1) = (2c - b + z) U(c) - c (c - b + 1) U(c+1)
    for k in (0..shift).rev() {
        let c = a + (k + 1) as f64;
        let um = (2.0 * c - b + z) * u0 - c * (c - b + 1.0) * u1;
        u1 = u0;
        u0 = um;
    }
    Ok((u0, rel * u0.norm() * (1.0 + shift as f64)))
}

/// `(dM/dz, dU/dz) = ((a/b) M(a+1, b+1, z), −a U(a+1, b+1, z))`.
pub fn kummer_derivatives(a: C64, b: f64, z: C64) -> Result<(C64, C64)> {
    let (m, _) = kummer_m(a + 1.0, b + 1.0, z)?;
    let (u, _) = kummer_u(a + 1.0, b + 1.0, z)?;
    Ok((a / b * m, -a * u))
}

/// `Γ(b)/Γ(a)`: the value of `z^b e^{-z}(M U' − M' U)` for Kummer's equation
/// (note the sign: `M'U − MU' = Γ(b)/Γ(a) z^{-b} e^{z}`).
pub fn kummer_wronskian_factor(a: C64, b: f64) -> C64 {
    gamma_c(C64::new(b, 0.0)) * rgamma_c(a)
}
