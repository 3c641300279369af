use magthresh::gauge::cutoff;
use magthresh::par;
use magthresh::refop::{channel_kernel, flux_params, ChannelSolution, Side, SpectralPoint};
use magthresh::specfun::{ik, jy};
use magthresh::timedecay::TestState;
use proptest::prelude::*;
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bessel_wronskians(nu in 0.0f64..12.0, z in 0.05f64..60.0) {
        let (j, y, dj, dy) = jy(nu, z).unwrap();
        let w = (j * dy - dj * y) * PI * z / 2.0;
        prop_assert!((w - 1.0).abs() < 1e-10, "jy {w}");
        let (i, k, di, dk) = ik(nu, z).unwrap();
        prop_assert!(((i * dk - di * k) * z + 1.0).abs() < 1e-10);
    }

    #[test]
    fn mu_is_periodic_and_bounded(alpha in -6.0f64..6.0, shift in -3i64..=3) {
        let a = flux_params(alpha).unwrap();
        let b = flux_params(alpha + shift as f64).unwrap();
        prop_assert!((0.0..=0.5).contains(&a.mu));
        prop_assert!((a.mu - b.mu).abs() < 1e-9);
        prop_assert!((a.nu(a.k_star.primary()) - a.mu).abs() < 1e-9);
    }

    #[test]
    fn kernel_is_symmetric(alpha in 0.05f64..2.9, m in -3i64..=3, lam in 1e-4f64..2.0, r in 0.05f64..6.0, rp in 0.05f64..6.0) {
        prop_assume!((alpha - alpha.round()).abs() > 0.02);
        let side = if m % 2 == 0 { Side::Plus } else { Side::Minus };
        let pt = SpectralPoint::new(lam, side).unwrap();
        let a = channel_kernel(alpha, m, pt, r, rp).unwrap().value;
        let b = channel_kernel(alpha, m, pt, rp, r).unwrap().value;
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
    }

    #[test]
    fn kernel_is_real_below_spectrum(alpha in 0.05f64..2.9, m in -3i64..=3, lam in -3.0f64..-1e-4, r in 0.05f64..6.0, rp in 0.05f64..6.0) {
        let v = channel_kernel(alpha, m, SpectralPoint::plus(lam).unwrap(), r, rp).unwrap().value;
        prop_assert!(v.im.abs() <= 1e-10 * v.re.abs().max(1e-300));
    }

    #[test]
    fn channel_wronskian_is_constant(alpha in 0.05f64..2.9, m in -3i64..=3, lam in 1e-3f64..2.0, r in 0.1f64..8.0) {
        let cs = ChannelSolution::new(alpha, m, SpectralPoint::plus(lam).unwrap()).unwrap();
        let (f, df) = cs.f_reg(r).unwrap();
        let (p, dp) = cs.phi(r).unwrap();
        let w = (df * p - f * dp) * r;
        prop_assert!((w - cs.wronskian()).norm() <= 1e-7 * w.norm());
    }

    #[test]
    fn cutoff_is_a_monotone_step(r in -1.0f64..4.0, h in 1e-4f64..0.5) {
        let (a, da) = cutoff(r);
        let (b, _) = cutoff(r + h);
        prop_assert!((0.0..=1.0).contains(&a) && da >= 0.0 && b >= a);
    }

    #[test]
    fn state_overlaps_obey_cauchy_schwarz(m in -2i64..=2, seed in 0u64..1000) {
        let st = TestState::seeded(m, 2.6, seed, 2);
        prop_assert!((st[0].overlap(&st[0]) - 1.0).abs() < 1e-12);
        prop_assert!(st[0].overlap(&st[1]).abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn parallel_map_matches_sequential(xs in prop::collection::vec(-1e3f64..1e3, 0..200)) {
        let f = |x: &f64| x.sin() * x.exp2().ln_1p();
        prop_assert_eq!(par::map(&xs, f), par::map_seq(&xs, f));
    }
}
