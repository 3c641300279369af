use magthresh::oracle::ode_green_boundary;
use magthresh::refop::{channel_kernel, Side, SpectralPoint};

const PAIRS: [(f64, f64); 4] = [(0.3, 0.7), (0.7, 1.8), (1.5, 4.0), (0.05, 12.0)];

fn worst(alpha: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for m in -3..=3 {
        for &lam in &[-1.0, -0.04, 0.05, 1.0] {
            for &(r, rp) in &PAIRS {
                let pt = SpectralPoint::new(lam, Side::Plus).unwrap();
                let closed = channel_kernel(alpha, m, pt, r, rp).unwrap().value;
                let ode = ode_green_boundary(alpha, m, lam, 1.0, r, rp).unwrap();
                let rel = (closed - ode).norm() / closed.norm();
                if rel > 1e-7 {
                    eprintln!("alpha={alpha} m={m} lam={lam} ({r},{rp}) closed={closed} ode={ode} rel={rel:e}");
                }
                worst = worst.max(rel);
            }
        }
    }
    worst
}

#[test]
fn closed_form_matches_ode_shooting() {
    for alpha in [0.3, 2.3, 1.0] {
        let w = worst(alpha);
        assert!(w < 1e-6, "alpha={alpha}: worst relative difference {w:e}");
    }
}
