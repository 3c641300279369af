//! Special functions: Gamma, Bessel functions of real order, Kummer `M`/`U`.
//!
//! All evaluators are pure and thread-safe. Each public evaluator returns a
//! [`SpecialValue`] carrying an absolute error estimate.

pub mod bessel;
pub mod gamma;
pub mod kummer;

pub use bessel::{ik, jy};
pub use gamma::{gamma, gamma_any, gamma_c, ln_gamma, rgamma_c, EULER_GAMMA};

use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

/// Value plus absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialValue {
    pub value: C64,
    pub abs_err_estimate: f64,
}

impl SpecialValue {
    pub fn real(v: f64, err: f64) -> Self {
        SpecialValue { value: C64::new(v, 0.0), abs_err_estimate: err }
    }
    pub fn re(&self) -> f64 {
        self.value.re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesselKind {
    J,
    Y,
    I,
    K,
}

impl std::str::FromStr for BesselKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "J" | "j" => Ok(BesselKind::J),
            "Y" | "y" => Ok(BesselKind::Y),
            "I" | "i" => Ok(BesselKind::I),
            "K" | "k" => Ok(BesselKind::K),
            _ => Err(Error::Domain(format!("unknown Bessel kind {s}"))),
        }
    }
}

/// Arguments of the Kummer functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KummerArgs {
    pub a: C64,
    pub b: f64,
    pub z: C64,
}

impl KummerArgs {
    pub fn real(a: f64, b: f64, z: f64) -> Self {
        KummerArgs { a: C64::new(a, 0.0), b, z: C64::new(z, 0.0) }
    }
}

fn check_order(nu: f64) -> Result<()> {
    if !nu.is_finite() || nu.abs() > bessel::MAX_ORDER {
        return Err(Error::OrderRange(format!("|nu| = {nu} exceeds {}", bessel::MAX_ORDER)));
    }
    Ok(())
}

fn est(v: f64) -> f64 {
    4e-15 * v.abs().max(f64::MIN_POSITIVE)
}

/// `J_ν, Y_ν, I_ν, K_ν` at `z > 0`.
pub fn bessel(kind: BesselKind, nu: f64, z: f64) -> Result<SpecialValue> {
    check_order(nu)?;
    if !(z > 0.0) {
        return Err(Error::Domain(format!("bessel argument z = {z} must be > 0")));
    }
    let v = match kind {
        BesselKind::J => bessel::bessel_j(nu, z)?,
        BesselKind::Y => {
            if nu < 0.0 {
                return Err(Error::Domain("Y requires nu >= 0".into()));
            }
            jy(nu, z)?.1
        }
        BesselKind::I => {
            if nu < 0.0 {
                return Err(Error::Domain("I requires nu >= 0".into()));
            }
            ik(nu, z)?.0
        }
        BesselKind::K => {
            if nu < 0.0 {
                return Err(Error::Domain("K requires nu >= 0".into()));
            }
            ik(nu, z)?.1
        }
    };
    Ok(SpecialValue::real(v, est(v)))
}

/// `d/dz` of the Bessel function from the order recurrences:
/// `J' = J_{ν−1} − (ν/z)J_ν`, `Y' = (ν/z)Y_ν − Y_{ν+1}`,
/// `I' = I_{ν+1} + (ν/z)I_ν`, `K' = (ν/z)K_ν − K_{ν+1}`.
pub fn bessel_derivative(kind: BesselKind, nu: f64, z: f64) -> Result<SpecialValue> {
    let l = bessel(kind, nu, z)?.re();
    let v = match kind {
        BesselKind::J => bessel(kind, nu - 1.0, z)?.re() - nu / z * l,
        BesselKind::Y => nu / z * l - bessel(kind, nu + 1.0, z)?.re(),
        BesselKind::I => bessel(kind, nu + 1.0, z)?.re() + nu / z * l,
        BesselKind::K => nu / z * l - bessel(kind, nu + 1.0, z)?.re(),
    };
    Ok(SpecialValue::real(v, est(v) + est(l) * (1.0 + nu / z)))
}

/// Kummer's series `M(a, b, z)`.
pub fn kummer_m(args: KummerArgs) -> Result<SpecialValue> {
    let (v, e) = kummer::kummer_m(args.a, args.b, args.z)?;
    Ok(SpecialValue { value: v, abs_err_estimate: e })
}

/// Tricomi's `U(a, b, z)`.
pub fn kummer_u(args: KummerArgs) -> Result<SpecialValue> {
    let (v, e) = kummer::kummer_u(args.a, args.b, args.z)?;
    Ok(SpecialValue { value: v, abs_err_estimate: e })
}

/// `(dM/dz, dU/dz)`.
pub fn kummer_derivatives(args: KummerArgs) -> Result<(C64, C64)> {
    kummer::kummer_derivatives(args.a, args.b, args.z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn documented_examples() {
        let j0 = bessel(BesselKind::J, 0.0, 1e-12).unwrap().re();
        assert!((j0 - 1.0).abs() < 1e-15);
        let w = bessel(BesselKind::J, 1.3, 1.0).unwrap().re() * bessel(BesselKind::Y, 0.3, 1.0).unwrap().re()
            - bessel(BesselKind::Y, 1.3, 1.0).unwrap().re() * bessel(BesselKind::J, 0.3, 1.0).unwrap().re();
        assert!((w - 2.0 / PI).abs() < 1e-14);
        let j = bessel(BesselKind::J, 0.3, 0.01).unwrap().re();
        let lead = 0.005_f64.powf(0.3) / gamma(1.3).unwrap();
        assert!(((j - lead) / lead).abs() < 1e-4);
        let k0 = bessel(BesselKind::K, 0.0, 0.05).unwrap().re();
        assert!((k0 - (-(0.05f64.ln()) - EULER_GAMMA + 2f64.ln())).abs() < 5e-2);
        let p = bessel(BesselKind::I, 2.7, 3.1).unwrap().re() * bessel(BesselKind::K, 1.7, 3.1).unwrap().re();
        assert!(p <= 1.0 / (2.0 * 1.7));
    }

    #[test]
    fn derivative_examples() {
        let d = bessel_derivative(BesselKind::J, 0.0, 2.0).unwrap().re();
        assert!((d + bessel(BesselKind::J, 1.0, 2.0).unwrap().re()).abs() < 1e-15);
        let (nu, z) = (0.7, 1.5);
        let r = bessel_derivative(BesselKind::I, nu, z).unwrap().re()
            - bessel(BesselKind::I, nu + 1.0, z).unwrap().re()
            - nu / z * bessel(BesselKind::I, nu, z).unwrap().re();
        assert!(r.abs() < 1e-14);
        let fd = (bessel(BesselKind::J, 0.3, 1.001).unwrap().re() - bessel(BesselKind::J, 0.3, 0.999).unwrap().re())
            / 0.002;
        let d = bessel_derivative(BesselKind::J, 0.3, 1.0).unwrap().re();
        assert!(((fd - d) / d).abs() < 1e-6);
        for kind in [BesselKind::Y, BesselKind::K] {
            let h = 1e-5;
            let fd = (bessel(kind, 2.4, 3.0 + h).unwrap().re() - bessel(kind, 2.4, 3.0 - h).unwrap().re()) / (2.0 * h);
            let d = bessel_derivative(kind, 2.4, 3.0).unwrap().re();
            assert!(((fd - d) / d).abs() < 1e-8, "{kind:?}");
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(bessel(BesselKind::J, 61.0, 1.0), Err(Error::OrderRange(_))));
        assert!(bessel(BesselKind::Y, -0.5, 1.0).is_err());
        assert!(bessel(BesselKind::K, 1.0, 0.0).is_err());
    }

    #[test]
    fn kummer_examples() {
        let (a, b) = (1.5, 3.0);
        let d = kummer_derivatives(KummerArgs::real(a, b, 2.0)).unwrap().1;
        let u = kummer_u(KummerArgs::real(2.5, 4.0, 2.0)).unwrap().value;
        assert!((d + 1.5 * u).norm() < 1e-14);
        let dm0 = kummer_derivatives(KummerArgs::real(0.9, 2.4, 0.0)).unwrap_err();
        let _ = dm0; // U is undefined at z = 0; dM/dz is checked directly below
        let dm = kummer::kummer_m(C64::new(1.9, 0.0), 3.4, C64::new(0.0, 0.0)).unwrap().0 * (0.9 / 2.4);
        assert!((dm.re - 0.9 / 2.4).abs() < 1e-16);
        let (a, b, z) = (0.9, 2.4, 1.1);
        let h = 1e-5;
        let (dm, du) = kummer_derivatives(KummerArgs::real(a, b, z)).unwrap();
        let fm = (kummer_m(KummerArgs::real(a, b, z + h)).unwrap().value
            - kummer_m(KummerArgs::real(a, b, z - h)).unwrap().value)
            / (2.0 * h);
        let fu = (kummer_u(KummerArgs::real(a, b, z + h)).unwrap().value
            - kummer_u(KummerArgs::real(a, b, z - h)).unwrap().value)
            / (2.0 * h);
        assert!((fm - dm).norm() < 1e-6 * dm.norm());
        assert!((fu - du).norm() < 1e-6 * du.norm());
        // Γ(a)U(a,b,z) ≤ e^z z^{1−b} Γ(b−1)
        let (a, b, z) = (1.2, 3.0, 0.8);
        let lhs = gamma(a).unwrap() * kummer_u(KummerArgs::real(a, b, z)).unwrap().re();
        assert!(lhs <= z.exp() * z.powf(1.0 - b) * gamma(b - 1.0).unwrap());
    }
}
