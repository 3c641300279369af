//! Weighted norms of partial-wave kernels and the threshold-expansion checks
//! built on them.
//!
//! Every channel kernel used here has the triangular form
//! `K(r, r') = Σ_t lo_t(r_<) up_t(r_>)`, so kernels are tabulated through
//! their factors once per grid node and norms reduce to sums over node pairs.
//! Diagonal panels are integrated over the triangle `r < r'` with a nested
//! rule, which keeps the kink of `K` on the diagonal out of the quadrature.

pub mod bounds;
pub mod hardy;
pub mod nystrom;
mod threshold;

pub use threshold::{
    branch_coefficients, gradient_remainder_norm, integer_threshold_fit, threshold_fit, BranchComparison,
    IntegerFit, ThresholdBranch, ThresholdFit,
};

use crate::quad::gauss_legendre_on;
use crate::refop::{ChannelConstants, ChannelSolution, SpectralPoint, ThresholdConstants};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

/// Composite Gauss–Legendre grid with log-spaced panels; `r = 1` is always a
/// panel edge. Each node also carries `order` auxiliary nodes on
/// `[panel start, node]` for the diagonal triangles.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    pub panel: Vec<usize>,
    pub edges: Vec<f64>,
    pub order: usize,
    aux_r: Vec<f64>,
    aux_w: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, panels_per_decade: usize, order: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && panels_per_decade > 0 && order > 1) {
            return Err(Error::Domain(format!("bad grid [{r_min}, {r_max}], {panels_per_decade}/decade")));
        }
        let decades = (r_max / r_min).log10();
        let n = ((decades * panels_per_decade as f64).ceil() as usize).max(1);
        let mut edges: Vec<f64> = (0..=n).map(|i| r_min * (r_max / r_min).powf(i as f64 / n as f64)).collect();
        if r_min < 1.0 && r_max > 1.0 {
            let (i, _) = edges
                .iter()
                .enumerate()
                .map(|(i, e)| (i, e.ln().abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if i == 0 || i == n {
                edges.push(1.0);
                edges.sort_by(f64::total_cmp);
            } else {
                edges[i] = 1.0;
            }
        }
        let (t, tw) = gauss_legendre_on(order, 0.0, 1.0);
        let mut g = RadialGrid { r: vec![], w: vec![], panel: vec![], edges: edges.clone(), order, aux_r: vec![], aux_w: vec![] };
        for (p, e) in edges.windows(2).enumerate() {
            let (a, b) = (e[0], e[1]);
            for (x, wx) in t.iter().zip(&tw) {
                let r = a + (b - a) * x;
                g.r.push(r);
                g.w.push((b - a) * wx);
                g.panel.push(p);
                for (y, wy) in t.iter().zip(&tw) {
                    g.aux_r.push(a + (r - a) * y);
                    g.aux_w.push((r - a) * wy);
                }
            }
        }
        Ok(g)
    }

    /// `[1e-3, 50]`, 12 panels per decade, 8 nodes per panel.
    pub fn standard() -> Self {
        Self::new(1e-3, 50.0, 12, 8).expect("valid default grid")
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.edges.last().unwrap()
    }
}

/// `ρ(r) = 1 + r`.
pub fn rho(r: f64) -> f64 {
    1.0 + r
}

/// Factor values at one radius: `lo_t`, `up_t` and their `r`-derivatives.
#[derive(Debug, Clone, Default)]
pub struct Factors {
    pub lo: Vec<C64>,
    pub up: Vec<C64>,
    pub dlo: Vec<C64>,
    pub dup: Vec<C64>,
}

impl Factors {
    fn single(lo: C64, up: C64, dlo: C64, dup: C64) -> Self {
        Factors { lo: vec![lo], up: vec![up], dlo: vec![dlo], dup: vec![dup] }
    }

    pub fn terms(&self) -> usize {
        self.lo.len()
    }
}

/// A channel kernel in triangular factor form.
pub trait ChannelFactors: Send + Sync {
    fn eval(&self, r: f64) -> Result<Factors>;
}

/// `K(x, y)` for `x ≤ y` from factors at `x` and `y`, term weights `c`.
pub fn pair_value(fx: &Factors, fy: &Factors, c: &[C64]) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for t in 0..c.len() {
        s += c[t] * fx.lo[t] * fy.up[t];
    }
    s
}

/// `R^m(λ) = f(r_<) φ(r_>)/W`.
pub struct ResolventFactors(pub ChannelSolution);

impl ChannelFactors for ResolventFactors {
    fn eval(&self, r: f64) -> Result<Factors> {
        let w = self.0.wronskian();
        let (f, df) = self.0.f_reg(r)?;
        let (p, dp) = self.0.phi(r)?;
        Ok(Factors::single(f / w, p, df / w, dp))
    }
}

/// `G_{m,0}`: `lo = v` inside, `plus·(r^ν − ϱ r^{−ν})/(2ν)` outside;
/// `up = Γ-ratio·(u − βv)` inside, `r^{−ν}/plus` outside.
pub struct G0Factors(pub ChannelConstants);

impl ChannelFactors for G0Factors {
    fn eval(&self, r: f64) -> Result<Factors> {
        let c = &self.0;
        let (nu, plus) = (c.nu, c.plus());
        let re = |x: f64| C64::new(x, 0.0);
        if r <= 1.0 {
            let (v, dv, u, du) = c.vu_d(r);
            let beta = (c.db + nu * c.b) / plus;
            let g = c.gamma_ratio;
            Ok(Factors::single(re(v), re(g * (u - beta * v)), re(dv), re(g * (du - beta * dv))))
        } else {
            let (lo, dlo) = if nu == 0.0 {
                (c.a + c.da * r.ln(), c.da / r)
            } else {
                let q = c.reflection();
                (
                    plus * (r.powf(nu) - q * r.powf(-nu)) / (2.0 * nu),
                    plus * (r.powf(nu - 1.0) + q * r.powf(-nu - 1.0)) / 2.0,
                )
            };
            Ok(Factors::single(re(lo), re(r.powf(-nu) / plus), re(dlo), re(-nu * r.powf(-nu - 1.0) / plus)))
        }
    }
}

/// `g₁ = pre·E(r)E(r')` with `E = √2 v/plus` inside and
/// `(r^μ − ϱ r^{−μ})/(√2 μ)` outside.
pub struct G1Factors {
    pub c: ChannelConstants,
    pub mu: f64,
    pub pre: C64,
}

impl G1Factors {
    pub fn new(tc: &ThresholdConstants) -> Result<Self> {
        let f = &tc.flux;
        if f.integer_flux || f.is_tie() {
            return Err(Error::Unsupported(format!("g1 needs 0 < mu < 1/2, got mu = {}", f.mu)));
        }
        let c = tc.channel(f.k()?)?.clone();
        Ok(G1Factors { c, mu: f.mu, pre: crate::refop::threshold::g1_prefactor(f.mu) })
    }
}

impl ChannelFactors for G1Factors {
    fn eval(&self, r: f64) -> Result<Factors> {
        let c = &self.c;
        let s2 = std::f64::consts::SQRT_2;
        let (e, de) = if r <= 1.0 {
            let (v, dv, _, _) = c.vu_d(r);
            (s2 * v / c.plus(), s2 * dv / c.plus())
        } else {
            let (mu, q) = (self.mu, c.reflection());
            ((r.powf(mu) - q * r.powf(-mu)) / (s2 * mu), (r.powf(mu - 1.0) + q * r.powf(-mu - 1.0)) / s2)
        };
        let (e, de) = (C64::new(e, 0.0), C64::new(de, 0.0));
        Ok(Factors::single(self.pre * e, e, self.pre * de, de))
    }
}

/// Integer-flux `k₁ = 2E(r)E(r')`, `E = v/a'` inside and `a/a' + log r` outside.
pub struct K1Factors(pub ChannelConstants);

impl ChannelFactors for K1Factors {
    fn eval(&self, r: f64) -> Result<Factors> {
        let c = &self.0;
        let (e, de) = if r <= 1.0 {
            let (v, dv, _, _) = c.vu_d(r);
            (v / c.da, dv / c.da)
        } else {
            (c.a / c.da + r.ln(), 1.0 / r)
        };
        let (e, de) = (C64::new(e, 0.0), C64::new(de, 0.0));
        Ok(Factors::single(2.0 * e, e, 2.0 * de, de))
    }
}

/// Concatenation of factor kernels; the kernel is the sum of the parts.
#[derive(Default)]
pub struct FactorSum {
    pub parts: Vec<Box<dyn ChannelFactors>>,
}

impl FactorSum {
    pub fn push(mut self, f: impl ChannelFactors + 'static) -> Self {
        self.parts.push(Box::new(f));
        self
    }
}

impl ChannelFactors for FactorSum {
    fn eval(&self, r: f64) -> Result<Factors> {
        let mut out = Factors::default();
        for p in &self.parts {
            let f = p.eval(r)?;
            out.lo.extend(f.lo);
            out.up.extend(f.up);
            out.dlo.extend(f.dlo);
            out.dup.extend(f.dup);
        }
        Ok(out)
    }
}

/// `R^m(λ)`, `G_{m,0}` and (channel `k(α)` only) `g₁` or `k₁` as one table:
/// term 0 is the resolvent, term 1 `G_{m,0}`, term 2 the threshold coefficient.
pub fn threshold_factors(tc: &ThresholdConstants, m: i64, point: SpectralPoint) -> Result<FactorSum> {
    let alpha = tc.alpha();
    let mut s = FactorSum::default()
        .push(ResolventFactors(ChannelSolution::new(alpha, m, point)?))
        .push(G0Factors(tc.channel(m)?.clone()));
    let f = &tc.flux;
    if f.integer_flux && m == -(alpha.round() as i64) {
        s = s.push(K1Factors(tc.channel(m)?.clone()));
    } else if !f.integer_flux && !f.is_tie() && m == f.k()? {
        s = s.push(G1Factors::new(tc)?);
    }
    Ok(s)
}

/// Factor values on all grid nodes and auxiliary nodes.
pub struct FactorTable {
    pub main: Vec<Factors>,
    aux: Vec<Factors>,
}

impl FactorTable {
    pub fn new(f: &dyn ChannelFactors, grid: &RadialGrid) -> Result<Self> {
        let main = crate::par::map(&grid.r, |&r| f.eval(r)).into_iter().collect::<Result<Vec<_>>>()?;
        let aux = crate::par::map(&grid.aux_r, |&r| f.eval(r)).into_iter().collect::<Result<Vec<_>>>()?;
        Ok(FactorTable { main, aux })
    }

    pub fn terms(&self) -> usize {
        self.main.first().map_or(0, |f| f.terms())
    }
}

/// Rectangle `[x_lo, x_hi] × [y_lo, y_hi]` restricted to `x < y`.
#[derive(Debug, Clone, Copy)]
struct Region {
    x: (f64, f64),
    y: (f64, f64),
}

impl Region {
    const ALL: Region = Region { x: (0.0, f64::INFINITY), y: (0.0, f64::INFINITY) };
    fn has(&self, x: f64, y: f64) -> bool {
        x >= self.x.0 && x <= self.x.1 && y >= self.y.0 && y <= self.y.1
    }
}

/// `∫∫_{x<y, region} g(x, y) W(x) W(y)` with `W(x) = ρ^{−2s}(x)·x`.
/// `g` receives the factor values at both points.
fn tri_sum<G>(grid: &RadialGrid, table: &FactorTable, s: f64, region: Region, g: G) -> f64
where
    G: Fn(&Factors, f64, &Factors, f64) -> f64 + Sync,
{
    let wt = |x: f64, w: f64| rho(x).powf(-2.0 * s) * x * w;
    let n = grid.len();
    let q = grid.order;
    let rows: Vec<f64> = crate::par::map_range(n, |j| {
        let y = grid.r[j];
        let wy = wt(y, grid.w[j]);
        let mut acc = 0.0;
        for i in 0..n {
            if grid.panel[i] >= grid.panel[j] {
                break;
            }
            let x = grid.r[i];
            if region.has(x, y) {
                acc += g(&table.main[i], x, &table.main[j], y) * wt(x, grid.w[i]);
            }
        }
        // diagonal panel: x in [panel start, y]
        let a = grid.edges[grid.panel[j]];
        if region.has(a, y) && region.has(y, y) {
            for l in 0..q {
                let k = j * q + l;
                let x = grid.aux_r[k];
                acc += g(&table.aux[k], x, &table.main[j], y) * wt(x, grid.aux_w[k]);
            }
        }
        acc * wy
    });
    rows.iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormMethod {
    HilbertSchmidt,
    SchurHolmgrenHybrid,
}

impl std::str::FromStr for NormMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hilbert-schmidt" | "hs" => Ok(NormMethod::HilbertSchmidt),
            "schur-holmgren-hybrid" | "hybrid" => Ok(NormMethod::SchurHolmgrenHybrid),
            _ => Err(Error::Domain(format!("unknown norm method {s}"))),
        }
    }
}

/// Norm surrogate of `ρ^{−s} K ρ^{−s}` on `L²(ℝ₊, r dr)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormEstimate {
    pub s: f64,
    pub lambda: Option<f64>,
    /// `None` for a supremum over channels.
    pub channel: Option<i64>,
    pub value: f64,
    pub method: NormMethod,
}

/// Norm of `Σ_t c_t lo_t(r_<) up_t(r_>)` tabulated in `table`.
pub fn table_norm(grid: &RadialGrid, table: &FactorTable, c: &[C64], s: f64, method: NormMethod) -> f64 {
    if c.is_empty() || table.terms() == 0 {
        return 0.0;
    }
    let sq = |fx: &Factors, _x: f64, fy: &Factors, _y: f64| pair_value(fx, fy, c).norm_sqr();
    match method {
        NormMethod::HilbertSchmidt => (2.0 * tri_sum(grid, table, s, Region::ALL, sq)).sqrt(),
        NormMethod::SchurHolmgrenHybrid => {
            let inner: Vec<usize> = (0..grid.len()).filter(|&i| grid.r[i] < 1.0).collect();
            let rs = |x: f64| rho(x).powf(-s);
            let rows = crate::par::map(&inner, |&i| {
                inner
                    .iter()
                    .map(|&j| {
                        let (a, b) = if i <= j { (i, j) } else { (j, i) };
                        pair_value(&table.main[a], &table.main[b], c).norm() * rs(grid.r[j]) * grid.r[j] * grid.w[j]
                    })
                    .sum::<f64>()
                    * rs(grid.r[i])
            });
            let m1 = rows.iter().cloned().fold(0.0, f64::max);
            let cross = Region { x: (0.0, 1.0), y: (1.0, f64::INFINITY) };
            let outer = Region { x: (1.0, f64::INFINITY), y: (1.0, f64::INFINITY) };
            let hs = 2.0 * tri_sum(grid, table, s, cross, sq) + 2.0 * tri_sum(grid, table, s, outer, sq);
            (m1 * m1 + hs).sqrt()
        }
    }
}

/// Weighted norm of a channel kernel given by its factors.
pub fn weighted_channel_norm(
    kernel: &dyn ChannelFactors,
    m: Option<i64>,
    lambda: Option<f64>,
    s: f64,
    method: NormMethod,
    grid: &RadialGrid,
) -> Result<WeightedNormEstimate> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("weight exponent s = {s} must be positive")));
    }
    let table = FactorTable::new(kernel, grid)?;
    let c = vec![C64::new(1.0, 0.0); table.terms()];
    Ok(WeightedNormEstimate { s, lambda, channel: m, value: table_norm(grid, &table, &c, s, method), method })
}

/// HS norm of `ρ^{−s}(∂_{r'}K, (m/r')K)ρ^{−s}`.
pub fn gradient_norm(grid: &RadialGrid, table: &FactorTable, c: &[C64], m: i64, s: f64) -> f64 {
    let m2 = (m * m) as f64;
    // r < r': x = r, y = r'
    let upper = tri_sum(grid, table, s, Region::ALL, |fx, _x, fy, y| {
        let mut d = C64::new(0.0, 0.0);
        for t in 0..c.len() {
            d += c[t] * fx.lo[t] * fy.dup[t];
        }
        d.norm_sqr() + m2 / (y * y) * pair_value(fx, fy, c).norm_sqr()
    });
    // r > r': x = r', y = r
    let lower = tri_sum(grid, table, s, Region::ALL, |fx, x, fy, _y| {
        let mut d = C64::new(0.0, 0.0);
        for t in 0..c.len() {
            d += c[t] * fx.dlo[t] * fy.up[t];
        }
        d.norm_sqr() + m2 / (x * x) * pair_value(fx, fy, c).norm_sqr()
    });
    (upper + lower).sqrt()
}

/// Lower bound for the operator norm of `ρ^{−s}Kρ^{−s}`: largest
/// `‖Au‖/‖u‖` over `trials` random vectors, `A` the symmetrized Nyström matrix.
pub fn rayleigh_lower_bound(grid: &RadialGrid, table: &FactorTable, c: &[C64], s: f64, trials: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let n = grid.len();
    let d: Vec<f64> = (0..n).map(|i| (grid.r[i] * grid.w[i]).sqrt() * rho(grid.r[i]).powf(-s)).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let un: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let au: Vec<C64> = crate::par::map_range(n, |i| {
            (0..n)
                .map(|j| {
                    let (a, b) = if i <= j { (i, j) } else { (j, i) };
                    pair_value(&table.main[a], &table.main[b], c) * d[i] * d[j] * u[j]
                })
                .sum()
        });
        let an: f64 = au.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        best = best.max(an / un);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;

    struct Sep<F: Fn(f64) -> f64 + Send + Sync>(F);
    impl<F: Fn(f64) -> f64 + Send + Sync> ChannelFactors for Sep<F> {
        fn eval(&self, r: f64) -> Result<Factors> {
            let v = C64::new((self.0)(r), 0.0);
            Ok(Factors::single(v, v, v, v))
        }
    }

    /// `r_<^ν r_>^{−ν}`, the interior envelope of `G_{m,0}`.
    struct Envelope(f64);
    impl ChannelFactors for Envelope {
        fn eval(&self, r: f64) -> Result<Factors> {
            let nu = self.0;
            let c = |x: f64| C64::new(x, 0.0);
            Ok(Factors::single(c(r.powf(nu)), c(r.powf(-nu)), c(nu * r.powf(nu - 1.0)), c(-nu * r.powf(-nu - 1.0))))
        }
    }

    #[test]
    fn zero_kernel() {
        let g = RadialGrid::standard();
        let z = FactorSum::default();
        let n = weighted_channel_norm(&z, Some(0), None, 1.7, NormMethod::HilbertSchmidt, &g).unwrap();
        assert_eq!(n.value, 0.0);
    }

    #[test]
    fn rank_one_hs() {
        let g = RadialGrid::standard();
        let s = 1.7;
        let k = Sep(|r: f64| (-r).exp());
        let hs = weighted_channel_norm(&k, None, None, s, NormMethod::HilbertSchmidt, &g).unwrap().value;
        let one = adaptive(|r: f64| (-2.0 * r).exp() * rho(r).powf(-2.0 * s) * r, 1e-3, 50.0, 1e-15, 1e-13).unwrap().value;
        assert!((hs - one).abs() < 1e-8 * one, "{hs} {one}");
    }

    #[test]
    fn envelope_exactness() {
        let g = RadialGrid::standard();
        let (nu, s) = (0.7, 1.7);
        let hs = weighted_channel_norm(&Envelope(nu), None, None, s, NormMethod::HilbertSchmidt, &g).unwrap().value;
        let w = |r: f64| rho(r).powf(-2.0 * s) * r;
        let inner = |y: f64| {
            adaptive(|x: f64| x.powf(2.0 * nu) * w(x), 1e-3, y, 1e-16, 1e-12).unwrap().value * y.powf(-2.0 * nu) * w(y)
        };
        let mut want = 0.0;
        for e in g.edges.windows(2) {
            want += adaptive(inner, e[0], e[1], 1e-16, 1e-11).unwrap().value;
        }
        let want = (2.0 * want).sqrt();
        assert!((hs - want).abs() < 1e-6 * want, "{hs} {want}");
    }

    #[test]
    fn hybrid_sandwich() {
        let g = RadialGrid::standard();
        let tc = ThresholdConstants::cached(0.3, 4).unwrap();
        let f = threshold_factors(&tc, 0, SpectralPoint::plus(1e-4).unwrap()).unwrap();
        let table = FactorTable::new(&f, &g).unwrap();
        let c = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        let s = 1.7;
        let hyb = table_norm(&g, &table, &c, s, NormMethod::SchurHolmgrenHybrid);
        let hs = table_norm(&g, &table, &c, s, NormMethod::HilbertSchmidt);
        let lb = rayleigh_lower_bound(&g, &table, &c, s, 20, 7);
        assert!(hyb >= lb / 2f64.sqrt(), "{hyb} {lb}");
        assert!(hs >= lb * 0.999, "{hs} {lb}");
        // scaling the kernel scales the surrogate
        let c2 = [C64::new(2.0, 0.0), C64::new(-2.0, 0.0)];
        assert!((table_norm(&g, &table, &c2, s, NormMethod::SchurHolmgrenHybrid) - 2.0 * hyb).abs() < 1e-12 * hyb);
    }

    #[test]
    fn factors_reproduce_kernels() {
        let tc = ThresholdConstants::cached(0.3, 4).unwrap();
        let pt = SpectralPoint::plus(0.01).unwrap();
        let f = threshold_factors(&tc, 0, pt).unwrap();
        for &(r, rp) in &[(0.3, 0.7), (0.5, 2.0), (1.5, 4.0)] {
            let (a, b) = (f.eval(r).unwrap(), f.eval(rp).unwrap());
            let one = C64::new(1.0, 0.0);
            let z = C64::new(0.0, 0.0);
            let rk = ChannelSolution::new(0.3, 0, pt).unwrap().kernel(r, rp).unwrap();
            assert!((pair_value(&a, &b, &[one, z, z]) - rk).norm() < 1e-12 * rk.norm());
            let g0 = crate::refop::threshold_g0(0, r, rp, &tc).unwrap();
            assert!((pair_value(&a, &b, &[z, one, z]).re - g0).abs() < 1e-10 * g0.abs());
            let g1 = crate::refop::threshold_g1(r, rp, &tc).unwrap();
            assert!((pair_value(&a, &b, &[z, z, one]) - g1).norm() < 1e-10 * g1.norm());
        }
        // derivatives against differences
        let h = 1e-6;
        for &r in &[0.4, 2.5] {
            let (p, m, c) = (f.eval(r + h).unwrap(), f.eval(r - h).unwrap(), f.eval(r).unwrap());
            for t in 0..3 {
                let dl = (p.lo[t] - m.lo[t]) / (2.0 * h);
                let du = (p.up[t] - m.up[t]) / (2.0 * h);
                assert!((dl - c.dlo[t]).norm() < 1e-6 * (1.0 + c.dlo[t].norm()), "lo {t} {r}");
                assert!((du - c.dup[t]).norm() < 1e-6 * (1.0 + c.dup[t].norm()), "up {t} {r}");
            }
        }
    }
}
