//! Gamma function by the Lanczos approximation (g = 7, nine terms), real and
//! complex, plus the series of `1/Γ(1+x)` used by the Temme Bessel sums.

use crate::{Error, Result, C64};
use std::f64::consts::PI;

const G: f64 = 7.0;
const P: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `Γ(x)` for `x ∈ (0, 60]`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 60.0) {
        return Err(Error::Domain(format!("gamma argument {x} outside (0, 60]")));
    }
    Ok(gamma_any(x))
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = P[0];
    let t = x + G + 0.5;
    for (i, p) in P.iter().enumerate().skip(1) {
        a += p / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `Γ(x)` for any real `x` away from the poles, via reflection below 1/2.
pub fn gamma_any(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_any(1.0 - x));
    }
    if x == x.floor() && x <= 171.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return f;
    }
    let y = x - 1.0;
    let mut a = P[0];
    let t = y + G + 0.5;
    for (i, p) in P.iter().enumerate().skip(1) {
        a += p / (y + i as f64);
    }
    (2.0 * PI).sqrt() * a * ((y + 0.5) * t.ln() - t).exp()
}

/// Principal-branch `ln Γ(z)` for complex `z` off the non-positive integers.
pub fn ln_gamma_c(z: C64) -> C64 {
    if z.re < 0.5 {
        // ln Γ(z) = ln π − ln sin(πz) − ln Γ(1−z); only exp() of this is used.
        return C64::new(PI.ln(), 0.0) - (z * PI).sin().ln() - ln_gamma_c(1.0 - z);
    }
    let y = z - 1.0;
    let mut a = C64::new(P[0], 0.0);
    let t = y + G + 0.5;
    for (i, p) in P.iter().enumerate().skip(1) {
        a += p / (y + i as f64);
    }
    C64::new(0.5 * (2.0 * PI).ln(), 0.0) + (y + 0.5) * t.ln() - t + a.ln()
}

/// `Γ(z)` for complex `z`.
pub fn gamma_c(z: C64) -> C64 {
    if z.im == 0.0 {
        return C64::new(gamma_any(z.re), 0.0);
    }
    ln_gamma_c(z).exp()
}

/// `1/Γ(z)` for complex `z`, zero at the poles.
pub fn rgamma_c(z: C64) -> C64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor() {
        return C64::new(0.0, 0.0);
    }
    if z.im == 0.0 {
        return C64::new(1.0 / gamma_any(z.re), 0.0);
    }
    (-ln_gamma_c(z)).exp()
}

/// Taylor coefficients of `1/Γ(z) = Σ c_k z^k`.
const RG: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Temme auxiliaries for `|μ| ≤ 1/2`:
/// `(γ₁, γ₂, 1/Γ(1+μ), 1/Γ(1−μ))` with
/// `γ₁ = (1/Γ(1−μ) − 1/Γ(1+μ))/(2μ)`, `γ₂ = (1/Γ(1−μ) + 1/Γ(1+μ))/2`.
pub fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // 1/Γ(1+x) = Σ_{k≥0} RG[k] x^k
    let mut even = 0.0;
    let mut odd = 0.0;
    let m2 = mu * mu;
    let mut p = 1.0;
    for k in (0..RG.len()).step_by(2) {
        even += RG[k] * p;
        if k + 1 < RG.len() {
            odd += RG[k + 1] * p;
        }
        p *= m2;
    }
    // 1/Γ(1±μ) = even ± μ·odd
    let gampl = even + mu * odd;
    let gammi = even - mu * odd;
    (-odd, even, gampl, gammi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert!((gamma(0.5).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0).unwrap() - 24.0).abs() < 1e-12);
        assert!(gamma(0.0).is_err());
        assert!(gamma(60.5).is_err());
    }

    #[test]
    fn recursion_consistency() {
        for &x in &[0.3, 1.7, 7.3, 20.1, 45.5] {
            let r = gamma(x + 1.0).unwrap() / (x * gamma(x).unwrap());
            assert!((r - 1.0).abs() < 1e-13, "x={x} r={r}");
        }
    }

    #[test]
    fn complex_matches_real_and_reflection() {
        let z = C64::new(2.5, 0.0);
        assert!((gamma_c(z + C64::new(0.0, 1e-300)) - gamma_any(2.5)).norm() < 1e-13);
        let z = C64::new(0.3, 1.2);
        let lhs = gamma_c(z) * gamma_c(1.0 - z);
        let rhs = PI / (z * PI).sin();
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
        let r = gamma_c(z + 1.0) / (z * gamma_c(z));
        assert!((r - 1.0).norm() < 1e-13);
    }

    #[test]
    fn temme_series_matches_lanczos() {
        for i in 0..=20 {
            let mu = -0.5 + i as f64 * 0.05;
            let (g1, g2, gp, gm) = temme_gammas(mu);
            assert!((gp - 1.0 / gamma_any(1.0 + mu)).abs() < 2e-15, "mu={mu}");
            assert!((gm - 1.0 / gamma_any(1.0 - mu)).abs() < 2e-15, "mu={mu}");
            assert!((g2 - 0.5 * (gm + gp)).abs() < 2e-15);
            if mu.abs() > 0.1 {
                assert!((g1 - (gm - gp) / (2.0 * mu)).abs() < 1e-14);
            }
        }
        assert!((temme_gammas(0.0).0 + EULER_GAMMA).abs() < 1e-16);
    }
}
