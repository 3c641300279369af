//! Propagator matrix elements `⟨f, e^{−itH} g⟩` for the reference operator
//! `H(B₀)` and fits of their large-`t` decay.
//!
//! Stone's formula gives
//! `⟨f, e^{−itH} g⟩ = (1/π) ∫₀^Λ e^{−itλ} Im⟨f, R(λ+i0) g⟩ dλ`
//! (`H ≥ 0` has no eigenvalues). The spectral density is sampled once per
//! state pair on Chebyshev nodes of geometric panels and every `t` is then a
//! Filon sum, exact in the oscillation for the panel interpolant.

use crate::expansion::rho;
use crate::fit::{fixed_exponent_coefficient, linear_fit, loglog_slope};
use crate::gauge::cutoff;
use crate::quad::{adaptive, cheb_coeffs, cheb_points, filon_panel, gauss_legendre_on};
use crate::refop::{flux_params, ChannelSolution, SpectralPoint, ThresholdConstants};
use crate::specfun::gamma_any;
use crate::{par, Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Support window for test states.
pub const SUPPORT: (f64, f64) = (0.2, 5.0);
pub const DEFAULT_CUTOFF: f64 = 20.0;
const RADIAL_ORDER: usize = 12;
const RADIAL_WIDTH: f64 = 0.25;

/// `ψ(r) = N ρ(r)^{−s} exp(−(r − c)²/(2w²)) χ(r)` in channel `m`, normalized
/// in `L²(r dr)`. `χ` is a `C^∞` window equal to 1 on `[a + δ, b − δ]` and 0
/// outside `[a, b]`, `δ = 0.3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestState {
    pub m: i64,
    pub center: f64,
    pub width: f64,
    pub s: f64,
    pub support: (f64, f64),
    norm: f64,
}

const EDGE: f64 = 0.3;

impl TestState {
    pub fn new(m: i64, center: f64, width: f64, s: f64, support: (f64, f64)) -> Result<Self> {
        let (a, b) = support;
        if !(width > 0.0 && a >= SUPPORT.0 - 1e-12 && b <= SUPPORT.1 + 1e-12 && b - a > 2.0 * EDGE) {
            return Err(Error::Domain(format!("support [{a}, {b}] must fit in [{}, {}]", SUPPORT.0, SUPPORT.1)));
        }
        let mut st = TestState { m, center, width, s, support, norm: 1.0 };
        let mass: f64 = st.nodes().iter().map(|&(r, w)| w * r * st.profile(r).powi(2)).sum();
        st.norm = 1.0 / mass.sqrt();
        Ok(st)
    }

    /// Full-window state centered at `center`.
    pub fn centered(m: i64, center: f64, width: f64, s: f64) -> Result<Self> {
        TestState::new(m, center, width, s, SUPPORT)
    }

    /// `count` full-window states with seeded centers in `[2.8, 3.2]` and widths in `[0.65, 0.75]`.
    pub fn seeded(m: i64, s: f64, seed: u64, count: usize) -> Vec<TestState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let c = rng.gen_range(2.8..3.2);
                let w = rng.gen_range(0.65..0.75);
                TestState::centered(m, c, w, s).expect("seeded state inside the window")
            })
            .collect()
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn profile(&self, r: f64) -> f64 {
        let (a, b) = self.support;
        if r <= a || r >= b {
            return 0.0;
        }
        let win = cutoff(1.0 + (r - a) / EDGE).0 * cutoff(1.0 + (b - r) / EDGE).0;
        let u = (r - self.center) / self.width;
        self.norm * rho(r).powf(-self.s) * (-0.5 * u * u).exp() * win
    }

    fn nodes(&self) -> Vec<(f64, f64)> {
        let (a, b) = self.support();
        let n = 16;
        let mut out = Vec::new();
        for p in 0..n {
            let (x, w) = gauss_legendre_on(20, a + (b - a) * p as f64 / n as f64, a + (b - a) * (p + 1) as f64 / n as f64);
            out.extend(x.into_iter().zip(w));
        }
        out
    }

    /// `⟨self, other⟩` in `L²(ℝ²)`.
    pub fn overlap(&self, other: &TestState) -> f64 {
        if self.m != other.m {
            return 0.0;
        }
        self.nodes().iter().map(|&(r, w)| w * r * self.profile(r) * other.profile(r)).sum()
    }
}

/// Radial panels covering both supports, with `r = 1` as an edge.
fn radial_panels(f: &TestState, g: &TestState) -> Vec<(f64, f64)> {
    let a = f.support().0.min(g.support().0);
    let b = f.support().1.max(g.support().1);
    let mut cuts = vec![a];
    if a < 1.0 && b > 1.0 {
        cuts.push(1.0);
    }
    cuts.push(b);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let n = ((w[1] - w[0]) / RADIAL_WIDTH).ceil().max(1.0) as usize;
        for p in 0..n {
            out.push((w[0] + (w[1] - w[0]) * p as f64 / n as f64, w[0] + (w[1] - w[0]) * (p + 1) as f64 / n as f64));
        }
    }
    out
}

/// `∫∫ f(r) K(r, r') g(r') r r' dr dr'` for `K = lo(r_<) up(r_>)`.
///
/// Off-diagonal panel pairs by running sums, diagonal panels with a nested
/// rule on `[r, panel end]`.
pub fn triangular_pairing<K>(f: &TestState, g: &TestState, kernel: K) -> Result<C64>
where
    K: Fn(f64) -> Result<(C64, C64)>,
{
    let zero = C64::new(0.0, 0.0);
    let (mut acc_f, mut acc_g) = (zero, zero);
    let mut total = zero;
    for (a, b) in radial_panels(f, g) {
        let (x, w) = gauss_legendre_on(RADIAL_ORDER, a, b);
        let mut vals = Vec::with_capacity(x.len());
        for (&r, &wr) in x.iter().zip(&w) {
            let (lo, up) = kernel(r)?;
            let (fr, gr) = (f.profile(r), g.profile(r));
            total += up * r * wr * (acc_f * gr + acc_g * fr);
            // diagonal: r is the smaller point, r' in [r, b]
            let (y, wy) = gauss_legendre_on(RADIAL_ORDER, r, b);
            for (&rp, &wp) in y.iter().zip(&wy) {
                let (_, upp) = kernel(rp)?;
                total += lo * upp * (r * wr * rp * wp) * (fr * g.profile(rp) + gr * f.profile(rp));
            }
            vals.push((lo, fr, gr, r * wr));
        }
        for (lo, fr, gr, rw) in vals {
            acc_f += lo * fr * rw;
            acc_g += lo * gr * rw;
        }
    }
    Ok(total)
}

/// `⟨f, R(λ+i0) g⟩` in the common channel.
pub fn resolvent_pairing(alpha: f64, f: &TestState, g: &TestState, lambda: f64) -> Result<C64> {
    if f.m != g.m {
        return Ok(C64::new(0.0, 0.0));
    }
    let sol = ChannelSolution::new(alpha, f.m, SpectralPoint::plus(lambda)?)?;
    let w = sol.wronskian();
    triangular_pairing(f, g, |r| Ok((sol.f_reg(r)?.0 / w, sol.phi(r)?.0)))
}

/// `⟨f, G₁ g⟩`, zero unless both states sit in channel `k(α)`.
pub fn g1_pairing(alpha: f64, f: &TestState, g: &TestState) -> Result<C64> {
    let fp = flux_params(alpha)?;
    let k = fp.k()?;
    if f.m != k || g.m != k {
        return Ok(C64::new(0.0, 0.0));
    }
    let tc = ThresholdConstants::new(alpha, k.abs() + 1)?;
    let mut s = C64::new(0.0, 0.0);
    let pf: Vec<(f64, f64)> = radial_panels(f, f).into_iter().flat_map(|(a, b)| {
        let (x, w) = gauss_legendre_on(RADIAL_ORDER, a, b);
        x.into_iter().zip(w)
    }).collect();
    let pg: Vec<(f64, f64)> = radial_panels(g, g).into_iter().flat_map(|(a, b)| {
        let (x, w) = gauss_legendre_on(RADIAL_ORDER, a, b);
        x.into_iter().zip(w)
    }).collect();
    for &(r, wr) in &pf {
        for &(rp, wp) in &pg {
            s += crate::refop::threshold_g1(r, rp, &tc)? * (wr * r * f.profile(r) * wp * rp * g.profile(rp));
        }
    }
    Ok(s)
}

/// Quadrature settings for the `λ`-integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    /// Energy cutoff `Λ`; a `C^∞` taper runs over `[3Λ/4, Λ]`.
    pub cutoff: f64,
    /// First geometric edge; `[0, lambda_min]` uses the local power model.
    pub lambda_min: f64,
    /// Widest panel above `λ = 1`.
    pub max_width: f64,
    pub degree: usize,
    /// Largest accepted `interpolation_error + truncation_estimate`.
    pub max_error: f64,
}

impl Default for SpectralGrid {
    fn default() -> Self {
        SpectralGrid { cutoff: DEFAULT_CUTOFF, lambda_min: 1e-8, max_width: 1.0, degree: 24, max_error: 1e-2 }
    }
}

impl SpectralGrid {
    pub fn with_cutoff(cutoff: f64) -> Self {
        SpectralGrid { cutoff, ..Default::default() }
    }

    fn edges(&self) -> Vec<f64> {
        let mut e = vec![self.lambda_min];
        let mut x = self.lambda_min;
        while 2.0 * x < 1.0_f64.min(self.cutoff) {
            x *= 2.0;
            e.push(x);
        }
        let start = *e.last().unwrap();
        let n = ((self.cutoff - start) / self.max_width).ceil().max(1.0) as usize;
        for j in 1..=n {
            e.push(start + (self.cutoff - start) * j as f64 / n as f64);
        }
        e
    }

    fn taper(&self, lambda: f64) -> f64 {
        1.0 - cutoff(1.0 + 4.0 * (lambda / self.cutoff - 0.75)).0
    }
}

/// Filon data for `(1/π) Im⟨f, R(λ+i0) g⟩` times the taper.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub alpha: f64,
    pub grid: SpectralGrid,
    panels: Vec<(f64, f64, Vec<C64>)>,
    /// `c λ^p` on `[0, lambda_min]`.
    pub local_coef: f64,
    pub local_power: f64,
    /// `(1/π) ∫_{3Λ/4}^{Λ} |Im⟨f, R g⟩| dλ`, the part the taper touches.
    pub truncation_estimate: f64,
    /// Chebyshev tail of the density interpolants plus a tenth of the local panel.
    pub interpolation_error: f64,
}

impl SpectralDensity {
    pub fn new(alpha: f64, f: &TestState, g: &TestState, grid: SpectralGrid) -> Result<Self> {
        let edges = grid.edges();
        let x = cheb_points(grid.degree);
        let mut nodes = Vec::new();
        for w in edges.windows(2) {
            let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            nodes.extend(x.iter().map(|t| c + h * t));
        }
        let raw = par::map(&nodes, |&l| resolvent_pairing(alpha, f, g, l).map(|v| v.im / PI));
        let raw = raw.into_iter().collect::<Result<Vec<f64>>>()?;
        let n1 = grid.degree + 1;
        let mut panels = Vec::new();
        let (mut tail, mut trunc) = (0.0, 0.0);
        for (j, w) in edges.windows(2).enumerate() {
            let vals: Vec<C64> = (0..n1)
                .map(|i| C64::new(raw[j * n1 + i] * grid.taper(nodes[j * n1 + i]), 0.0))
                .collect();
            let coeffs = cheb_coeffs(&vals);
            let h = 0.5 * (w[1] - w[0]);
            tail += 2.0 * h * (coeffs[grid.degree].norm() + coeffs[grid.degree - 1].norm());
            if w[1] > 0.75 * grid.cutoff {
                let cheb_abs: Vec<C64> = (0..n1).map(|i| C64::new(raw[j * n1 + i].abs(), 0.0)).collect();
                let ca = cheb_coeffs(&cheb_abs);
                // ∫T_k = 2/(1−k²) for even k
                let a = w[0].max(0.75 * grid.cutoff);
                let frac = (w[1] - a) / (w[1] - w[0]);
                let integral: f64 =
                    ca.iter().enumerate().step_by(2).map(|(k, c)| c.re * 2.0 / (1.0 - (k * k) as f64)).sum();
                trunc += h * integral * frac;
            }
            panels.push((w[0], w[1], coeffs));
        }
        // local model from the first two nodes of the first panel (x = −1, then next)
        let (l0, l1) = (nodes[grid.degree], nodes[grid.degree - 1]);
        let (v0, v1) = (raw[grid.degree], raw[grid.degree - 1]);
        let (local_coef, local_power) = if v0 != 0.0 && v0.signum() == v1.signum() {
            let p = ((v1 / v0).ln() / (l1 / l0).ln()).clamp(0.0, 4.0);
            (v0 / l0.powf(p), p)
        } else {
            (0.0, 0.0)
        };
        let local_mass = (local_coef * grid.lambda_min.powf(local_power + 1.0) / (local_power + 1.0)).abs();
        let err = tail + 0.1 * local_mass + trunc;
        if !(err <= grid.max_error) {
            return Err(Error::Quadrature(format!("spectral density error {err:e} above {:e}", grid.max_error)));
        }
        Ok(SpectralDensity {
            alpha,
            grid,
            panels,
            local_coef,
            local_power,
            truncation_estimate: trunc,
            interpolation_error: tail + 0.1 * local_mass,
        })
    }

    /// `(1/π) ∫₀^Λ e^{−itλ} Im⟨f, R g⟩ χ dλ`.
    pub fn transform(&self, t: f64) -> C64 {
        let mut s: C64 = self.panels.iter().map(|(a, b, c)| filon_panel(*a, *b, c, t)).sum();
        s += power_moment(self.local_coef, self.local_power, self.grid.lambda_min, t, -1.0);
        s
    }

    pub fn element(&self, t: f64) -> PropagatorElement {
        PropagatorElement {
            t,
            value: self.transform(t),
            quadrature_error: self.interpolation_error + self.truncation_estimate,
        }
    }
}

/// `∫₀^a e^{iσtλ} c λ^p dλ` by the power series of the exponential.
fn power_moment(c: f64, p: f64, a: f64, t: f64, sigma: f64) -> C64 {
    if c == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let z = C64::new(0.0, sigma * t * a);
    let mut term = C64::new(1.0, 0.0);
    let mut s = C64::new(0.0, 0.0);
    for n in 0..200 {
        let add = term / (n as f64 + p + 1.0);
        s += add;
        if add.norm() < 1e-17 * s.norm() {
            break;
        }
        term *= z / (n as f64 + 1.0);
    }
    s * (c * a.powf(p + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorElement {
    pub t: f64,
    pub value: C64,
    pub quadrature_error: f64,
}

/// `⟨f, e^{−itH(B₀)} g⟩` at flux `α` for each `t`.
pub fn propagator_elements(alpha: f64, f: &TestState, g: &TestState, ts: &[f64], grid: SpectralGrid) -> Result<Vec<PropagatorElement>> {
    if let Some(t) = ts.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
    }
    if f.m != g.m {
        return Ok(ts.iter().map(|&t| PropagatorElement { t, value: C64::new(0.0, 0.0), quadrature_error: 0.0 }).collect());
    }
    let d = SpectralDensity::new(alpha, f, g, grid)?;
    Ok(ts.iter().map(|&t| d.element(t)).collect())
}

/// Single element with the default grid.
pub fn propagator_element(alpha: f64, f: &TestState, g: &TestState, t: f64) -> Result<PropagatorElement> {
    Ok(propagator_elements(alpha, f, g, &[t], SpectralGrid::default())?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayModel {
    /// `|v| = C t^{−p}`.
    Power,
    /// `|v| = C t^{−1} (log t)^{−2}`.
    PowerLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub exponent: f64,
    /// Complex least-squares coefficient of the model's `t`-profile.
    pub coefficient: C64,
    pub r_squared: f64,
    /// RMS residual of `log|v|`.
    pub residual: f64,
}

/// Both fits and `residual(power-log) / residual(power)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayComparison {
    pub power: DecayFit,
    pub power_log: DecayFit,
    pub residual_ratio: f64,
    pub best: DecayModel,
}

fn check_window(samples: &[PropagatorElement]) -> Result<()> {
    if samples.len() < 8 {
        return Err(Error::Domain(format!("need at least 8 samples, got {}", samples.len())));
    }
    let lo = samples.iter().map(|s| s.t).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.t).fold(0.0, f64::max);
    if !(lo > 1.0 && (hi / lo).log10() >= 1.5 - 1e-12) {
        return Err(Error::Domain(format!("fit window [{lo}, {hi}] must lie in t > 1 and span 1.5 decades")));
    }
    if samples.iter().any(|s| !(s.value.norm() > 0.0)) {
        return Err(Error::Check("degenerate fit: a sample vanishes".into()));
    }
    Ok(())
}

fn profile_coefficient(samples: &[PropagatorElement], profile: impl Fn(f64) -> f64) -> C64 {
    let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
    for s in samples {
        let w = profile(s.t);
        num += s.value * w;
        den += w * w;
    }
    num / den
}

fn fit_model(samples: &[PropagatorElement], model: DecayModel) -> DecayFit {
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let ly: Vec<f64> = samples.iter().map(|s| s.value.norm().ln()).collect();
    let n = t.len() as f64;
    let mean = ly.iter().sum::<f64>() / n;
    let ss_tot: f64 = ly.iter().map(|v| (v - mean).powi(2)).sum();
    match model {
        DecayModel::Power => {
            let mags: Vec<f64> = samples.iter().map(|s| s.value.norm()).collect();
            let sl = loglog_slope(&t, &mags);
            let ss: f64 = t.iter().zip(&ly).map(|(x, y)| (y - sl.slope * x.ln() - sl.intercept).powi(2)).sum();
            let p = -sl.slope;
            DecayFit {
                model,
                exponent: p,
                coefficient: profile_coefficient(samples, |x| x.powf(-p)),
                r_squared: sl.r_squared,
                residual: (ss / n).sqrt(),
            }
        }
        DecayModel::PowerLog => {
            let base = |x: f64| -x.ln() - 2.0 * x.ln().ln();
            let lc = t.iter().zip(&ly).map(|(x, y)| y - base(*x)).sum::<f64>() / n;
            let ss: f64 = t.iter().zip(&ly).map(|(x, y)| (y - lc - base(*x)).powi(2)).sum();
            DecayFit {
                model,
                exponent: 1.0,
                coefficient: profile_coefficient(samples, |x| 1.0 / (x * x.ln().powi(2))),
                r_squared: if ss_tot > 0.0 { 1.0 - ss / ss_tot } else { 1.0 },
                residual: (ss / n).sqrt(),
            }
        }
    }
}

/// Fits `model`, or the better of both by residual when `model` is `None`.
pub fn decay_fit(samples: &[PropagatorElement], model: Option<DecayModel>) -> Result<DecayFit> {
    check_window(samples)?;
    Ok(match model {
        Some(m) => fit_model(samples, m),
        None => {
            let c = compare_models(samples)?;
            if c.best == DecayModel::Power {
                c.power
            } else {
                c.power_log
            }
        }
    })
}

pub fn compare_models(samples: &[PropagatorElement]) -> Result<DecayComparison> {
    check_window(samples)?;
    let power = fit_model(samples, DecayModel::Power);
    let power_log = fit_model(samples, DecayModel::PowerLog);
    let residual_ratio = power_log.residual / power.residual;
    let best = if residual_ratio < 1.0 { DecayModel::PowerLog } else { DecayModel::Power };
    Ok(DecayComparison { power, power_log, residual_ratio, best })
}

/// `|v| = C t^{−1} (log t + β)^{−2}` with `β` free; a diagnostic for integer
/// flux, where the threshold logarithm carries an `O(1)` shift. Returns
/// `(β, C, RMS residual of log|v|)`.
pub fn shifted_log_fit(samples: &[PropagatorElement]) -> Result<(f64, f64, f64)> {
    check_window(samples)?;
    let n = samples.len() as f64;
    let eval = |beta: f64| -> (f64, f64) {
        let base = |t: f64| -t.ln() - 2.0 * (t.ln() + beta).ln();
        let lc = samples.iter().map(|s| s.value.norm().ln() - base(s.t)).sum::<f64>() / n;
        let ss: f64 = samples.iter().map(|s| (s.value.norm().ln() - lc - base(s.t)).powi(2)).sum();
        (lc.exp(), (ss / n).sqrt())
    };
    // golden section on β ∈ (−log t_min, 50]
    let tmin = samples.iter().map(|s| s.t).fold(f64::INFINITY, f64::min);
    let (mut a, mut b) = (-tmin.ln() + 0.5, 50.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let (x1, x2) = (b - g * (b - a), a + g * (b - a));
        if eval(x1).1 < eval(x2).1 {
            b = x2;
        } else {
            a = x1;
        }
    }
    let beta = 0.5 * (a + b);
    let (c, res) = eval(beta);
    Ok((beta, c, res))
}

/// `(i sin πν / π) e^{iπν/2} Γ(1+ν) t^{−1−ν}`.
pub fn fourier_closed_form(nu: f64, t: f64) -> C64 {
    C64::new(0.0, (PI * nu).sin() / PI) * C64::from_polar(gamma_any(1.0 + nu) * t.powf(-1.0 - nu), 0.5 * PI * nu)
}

/// `(1/2πi) ∫ e^{−itλ} h(λ) dλ` over `[−b, b]`; `h(±u)` from `pos`/`neg`,
/// geometric panels from `a0` to `1`, then panels of width at most `width`.
fn line_transform<P, N>(pos: P, neg: N, a0: f64, b: f64, width: f64, t: f64, degree: usize) -> C64
where
    P: Fn(f64) -> C64 + Sync,
    N: Fn(f64) -> C64 + Sync,
{
    let mut e = vec![a0];
    while *e.last().unwrap() * 2.0 < b.min(1.0) {
        let x = *e.last().unwrap() * 2.0;
        e.push(x);
    }
    let start = *e.last().unwrap();
    let n = ((b - start) / width).ceil().max(1.0) as usize;
    for j in 1..=n {
        e.push(start + (b - start) * j as f64 / n as f64);
    }
    let x = cheb_points(degree);
    let panels: Vec<(f64, f64)> = e.windows(2).map(|w| (w[0], w[1])).collect();
    let parts = par::map(&panels, |&(a, bb)| {
        let (c, h) = (0.5 * (a + bb), 0.5 * (bb - a));
        let vp: Vec<C64> = x.iter().map(|s| pos(c + h * s)).collect();
        let vn: Vec<C64> = x.iter().map(|s| neg(c + h * s)).collect();
        // negative side: ∫_a^b e^{+itu} h(−u) du
        filon_panel(a, bb, &cheb_coeffs(&vp), t) + filon_panel(a, bb, &cheb_coeffs(&vn), -t)
    });
    let mut s: C64 = parts.into_iter().sum();
    // [0, a0]: endpoint value, the integrand is bounded there
    s += (pos(a0) + neg(a0)) * a0;
    s / C64::new(0.0, 2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierCheck {
    pub nu: f64,
    pub t: f64,
    /// Transform of `(λ+i0)^ν e^{−λ²}`.
    pub numeric: C64,
    /// Asymptotic contribution of the Gaussian's Taylor terms `λ^{ν+2n}`, `n ≥ 1`.
    pub cutoff_correction: C64,
    pub closed_form: C64,
    pub modulus_ratio: f64,
    pub phase_difference: f64,
}

/// Regularized transform of `(λ+i0)^ν` against its closed form.
pub fn fourier_check(nu: f64, t: f64) -> Result<FourierCheck> {
    if !(nu > 0.0 && nu <= 0.5) || !(t >= 10.0) {
        return Err(Error::Domain(format!("need 0 < nu <= 1/2 and t >= 10, got nu = {nu}, t = {t}")));
    }
    let a0 = 1e-12;
    let ph = C64::from_polar(1.0, PI * nu);
    let pos = |u: f64| C64::new(u.powf(nu) * (-u * u).exp(), 0.0);
    let neg = |u: f64| ph * (u.powf(nu) * (-u * u).exp());
    let mut numeric = line_transform(pos, neg, a0, 8.0, 0.25, t, 32);
    // the [0, a0] endpoint rule is crude for u^ν; replace it by the exact moment
    numeric -= (pos(a0) + neg(a0)) * a0 / C64::new(0.0, 2.0 * PI);
    numeric += (power_moment(1.0, nu, a0, t, -1.0) + ph * power_moment(1.0, nu, a0, t, 1.0)) / C64::new(0.0, 2.0 * PI);
    let closed_form = fourier_closed_form(nu, t);
    let mut cutoff_correction = C64::new(0.0, 0.0);
    let mut fact = 1.0;
    for n in 1..=4 {
        fact *= n as f64;
        // (−1)^n/n! · g(ν+2n, t); the phase of g contributes another (−1)^n
        cutoff_correction += closed_form * (gamma_any(1.0 + nu + 2.0 * n as f64) / gamma_any(1.0 + nu) / fact * t.powi(-2 * n as i32));
    }
    let corrected = numeric - cutoff_correction;
    Ok(FourierCheck {
        nu,
        t,
        numeric,
        cutoff_correction,
        closed_form,
        modulus_ratio: corrected.norm() / closed_form.norm(),
        phase_difference: (corrected / closed_form).arg(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierLogCheck {
    pub k: u32,
    pub t: f64,
    /// Transform of `χ(λ) (log(λ+i0))^{−k}`.
    pub numeric: C64,
    /// `i (−1)^k k t^{−1} (log t)^{−k−1}`.
    pub leading: C64,
    /// Full asymptotic value `∓(i/t) ∫₀^∞ x^{k−1} q(x) t^{−x} dx`, `q(x) = sin(πx)/π e^{iπx/2} Γ(1+x)`.
    pub asymptotic: C64,
    pub modulus_ratio: f64,
    pub phase_difference: f64,
    /// `|numeric / asymptotic|`.
    pub asymptotic_ratio: C64,
}

/// Regularized transform of `(log(λ+i0))^{−k}`, cut off smoothly to `|λ| < 0.8`.
pub fn fourier_log_check(k: u32, t: f64) -> Result<FourierLogCheck> {
    if !(k == 1 || k == 2) || !(t >= 10.0) {
        return Err(Error::Domain(format!("need k in {{1, 2}} and t >= 10, got k = {k}, t = {t}")));
    }
    let chi = |u: f64| 1.0 - cutoff(u / 0.4).0;
    let kk = k as i32;
    let pos = |u: f64| C64::new(chi(u) * u.ln().powi(-kk), 0.0);
    let neg = |u: f64| C64::new(u.ln(), PI).powi(-kk) * chi(u);
    let numeric = line_transform(pos, neg, 1e-14, 0.8, 0.02, t, 32);
    let lt = t.ln();
    let sign = if k == 1 { -1.0 } else { 1.0 };
    let leading = C64::new(0.0, sign * k as f64 / (t * lt.powi(kk + 1)));
    let q = |x: f64| -> C64 {
        C64::from_polar((PI * x).sin() / PI * gamma_any(1.0 + x) * (-x * lt).exp() * x.powi(kk - 1), 0.5 * PI * x)
    };
    let re = adaptive(|x| q(x).re, 0.0, 40.0, 1e-16, 1e-12)?.value;
    let im = adaptive(|x| q(x).im, 0.0, 40.0, 1e-16, 1e-12)?.value;
    let asymptotic = C64::new(0.0, sign / t) * C64::new(re, im);
    Ok(FourierLogCheck {
        k,
        t,
        numeric,
        leading,
        asymptotic,
        modulus_ratio: numeric.norm() / leading.norm(),
        phase_difference: (numeric / leading).arg(),
        asymptotic_ratio: numeric / asymptotic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrefactorCheck {
    pub alpha: f64,
    pub mu: f64,
    pub fitted: C64,
    /// `(i/π) sin(πμ) e^{iπμ/2} Γ(1+μ) ⟨f, G₁ g⟩`.
    pub predicted: C64,
    pub g1_pairing: C64,
    pub ratio: C64,
    pub modulus: f64,
    pub phase: f64,
    pub fit: DecayFit,
}

/// Coefficient of `t^{−1−μ}` from samples, with an optional `t^{−1−2μ}`
/// correction column.
pub fn threshold_coefficient(samples: &[PropagatorElement], mu: f64, correction: bool) -> Result<C64> {
    check_window(samples)?;
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let y: Vec<C64> = samples.iter().map(|s| s.value).collect();
    if !correction {
        return Ok(fixed_exponent_coefficient(&t, &y, -1.0 - mu).0);
    }
    // two-column complex least squares in the scaled variable y t^{1+μ} = c₀ + c₁ t^{−μ}
    let x: Vec<f64> = t.iter().map(|v| v.powf(-mu)).collect();
    let yr: Vec<f64> = y.iter().zip(&t).map(|(v, s)| v.re * s.powf(1.0 + mu)).collect();
    let yi: Vec<f64> = y.iter().zip(&t).map(|(v, s)| v.im * s.powf(1.0 + mu)).collect();
    let (_, br, _, _) = linear_fit(&x, &yr);
    let (_, bi, _, _) = linear_fit(&x, &yi);
    Ok(C64::new(br, bi))
}

/// Fitted threshold coefficient against the closed-form prefactor.
pub fn prefactor_check(alpha: f64, f: &TestState, g: &TestState, ts: &[f64]) -> Result<PrefactorCheck> {
    let fp = flux_params(alpha)?;
    if fp.integer_flux || fp.mu >= 0.5 {
        return Err(Error::Unsupported(format!("prefactor check needs non-integer flux with mu < 1/2, got mu = {}", fp.mu)));
    }
    let mu = fp.mu;
    let samples = propagator_elements(alpha, f, g, ts, SpectralGrid::default())?;
    let fit = decay_fit(&samples, Some(DecayModel::Power))?;
    let fitted = threshold_coefficient(&samples, mu, true)?;
    let g1 = g1_pairing(alpha, f, g)?;
    let predicted = C64::new(0.0, (PI * mu).sin() / PI) * C64::from_polar(gamma_any(1.0 + mu), 0.5 * PI * mu) * g1;
    let ratio = fitted / predicted;
    Ok(PrefactorCheck { alpha, mu, fitted, predicted, g1_pairing: g1, ratio, modulus: ratio.norm(), phase: ratio.arg(), fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::logspace;

    #[test]
    fn states_are_normalized() {
        for s in TestState::seeded(0, 2.6, 7, 4) {
            assert!((s.overlap(&s) - 1.0).abs() < 1e-12);
            let (a, b) = s.support();
            assert!(a >= 0.2 && b <= 5.0);
        }
        assert!(TestState::new(0, 2.0, 1.0, 2.6, (0.1, 3.0)).is_err());
    }

    #[test]
    fn power_moment_matches_quadrature() {
        let (p, a, t) = (0.3, 0.5, 7.0);
        let re = adaptive(|x: f64| x.powf(p) * (t * x).cos(), 0.0, a, 1e-14, 1e-12).unwrap().value;
        let im = adaptive(|x: f64| -x.powf(p) * (t * x).sin(), 0.0, a, 1e-14, 1e-12).unwrap().value;
        assert!((power_moment(1.0, p, a, t, -1.0) - C64::new(re, im)).norm() < 1e-10);
    }

    #[test]
    fn triangular_pairing_matches_rank_one() {
        // Im R = c f(r) f(r') is rank one, so Im⟨f, R g⟩ = c ⟨f, F⟩⟨g, F⟩.
        let (alpha, lam) = (0.3, 0.7);
        let st = TestState::seeded(0, 2.6, 3, 2);
        let sol = ChannelSolution::new(alpha, 0, SpectralPoint::plus(lam).unwrap()).unwrap();
        let w = sol.wronskian();
        let fr = |r: f64| sol.f_reg(r).unwrap().0;
        let c = (sol.phi(2.0).unwrap().0 / w).im / fr(2.0).re;
        let proj = |s: &TestState| -> f64 {
            let mut acc = 0.0;
            for (a, b) in radial_panels(s, s) {
                let (x, wx) = gauss_legendre_on(RADIAL_ORDER, a, b);
                acc += x.iter().zip(&wx).map(|(r, q)| q * r * s.profile(*r) * fr(*r).re).sum::<f64>();
            }
            acc
        };
        let got = resolvent_pairing(alpha, &st[0], &st[1], lam).unwrap().im;
        let want = c * proj(&st[0]) * proj(&st[1]);
        assert!((got - want).abs() < 1e-9 * want.abs().max(1e-3), "{got} {want}");
    }

    #[test]
    fn normalization_unitarity_and_channels() {
        let alpha = 0.3;
        let f = TestState::seeded(0, 2.6, 11, 1)[0];
        let d = SpectralDensity::new(alpha, &f, &f, SpectralGrid::default()).unwrap();
        let e0 = d.element(1e-6);
        assert!((e0.value - 1.0).norm() < 1e-3, "{}", e0.value);
        for t in logspace(1.0, 1e4, 9) {
            assert!(d.element(t).value.norm() <= 1.0 + 1e-6);
        }
        let g = TestState::centered(1, f.center, f.width, 2.6).unwrap();
        let cross = propagator_elements(alpha, &f, &g, &[1.0, 10.0], SpectralGrid::default()).unwrap();
        assert!(cross.iter().all(|e| e.value.norm() == 0.0));
        assert_eq!(g1_pairing(alpha, &g, &g).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn truncation_estimate_shrinks_when_cutoff_doubles() {
        let f = TestState::seeded(0, 2.6, 5, 1)[0];
        let a = SpectralDensity::new(0.3, &f, &f, SpectralGrid::with_cutoff(20.0)).unwrap();
        let b = SpectralDensity::new(0.3, &f, &f, SpectralGrid::with_cutoff(40.0)).unwrap();
        assert!(b.truncation_estimate <= a.truncation_estimate / 2f64.sqrt(), "{} {}", a.truncation_estimate, b.truncation_estimate);
    }

    #[test]
    fn fourier_power_closed_form() {
        let c = fourier_check(0.3, 100.0).unwrap();
        assert!((c.modulus_ratio - 1.0).abs() < 1e-3 && c.phase_difference.abs() < 1e-3, "{c:?}");
    }

    #[test]
    fn fourier_log_matches_full_asymptotic() {
        for k in [1, 2] {
            let c = fourier_log_check(k, 1e3).unwrap();
            assert!((c.asymptotic_ratio - 1.0).norm() < 1e-2, "{c:?}");
        }
    }

    #[test]
    fn fits_recover_synthetic_laws() {
        let ts = logspace(1e2, 1e4, 10);
        let mk = |f: &dyn Fn(f64) -> C64| ts.iter().map(|&t| PropagatorElement { t, value: f(t), quadrature_error: 0.0 }).collect::<Vec<_>>();
        let c = C64::new(0.2, -0.5);
        let p = mk(&|t| c * t.powf(-1.3));
        let fit = decay_fit(&p, None).unwrap();
        assert_eq!(fit.model, DecayModel::Power);
        assert!((fit.exponent - 1.3).abs() < 1e-10 && (fit.coefficient - c).norm() < 1e-10);
        let l = mk(&|t| c / (t * t.ln().powi(2)));
        let cmp = compare_models(&l).unwrap();
        assert_eq!(cmp.best, DecayModel::PowerLog);
        assert!((cmp.power_log.coefficient - c).norm() < 1e-10);
        assert!(decay_fit(&p[..5], None).is_err());
        let sh = mk(&|t| c / (t * (t.ln() + 4.0).powi(2)));
        let (beta, cc, res) = shifted_log_fit(&sh).unwrap();
        assert!((beta - 4.0).abs() < 1e-5 && (cc - c.norm()).abs() < 1e-5 && res < 1e-8);
    }
}
