//! Subcommand implementations. Each returns a [`Report`].

use crate::config::Config;
use crate::emit::{Cell, Report, Table};
use clap::{Args, ValueEnum};
use magthresh::expansion::bounds::{bound_check, BoundGrid, LemmaId};
use magthresh::expansion::hardy::{default_trials, hardy_sweep, HardyWeight};
use magthresh::expansion::nystrom::{default_channels, nystrom_perturbed, RadialPotential};
use magthresh::expansion::{integer_threshold_fit, threshold_fit as run_threshold_fit, ThresholdBranch};
use magthresh::fit::logspace;
use magthresh::gauge::{gauge_report, Field, FieldKind};
use magthresh::oracle::ode_green_boundary;
use magthresh::refop::{channel_kernel, full_kernel, flux_params, ChannelSolution, KStar, Side, SpectralPoint};
use magthresh::timedecay::{
    compare_models, g1_pairing, propagator_elements, shifted_log_fit, threshold_coefficient, SpectralGrid, TestState,
};
use magthresh::{Error, C64};
use serde_json::{json, Value};
use std::f64::consts::PI;

pub enum Failure {
    Usage(String),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(m) | Error::OrderRange(m) => Failure::Usage(m),
            other => Failure::Numeric(other),
        }
    }
}

type Out = Result<Report, Failure>;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn c64(v: C64) -> Value {
    json!({ "re": v.re, "im": v.im })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Plus,
    Minus,
}

impl SideArg {
    fn side(self) -> Side {
        match self {
            SideArg::Plus => Side::Plus,
            SideArg::Minus => Side::Minus,
        }
    }
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub m: i64,
    /// Spectral parameter; the boundary value is taken on `--side` when positive.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub rp: f64,
    #[arg(long, value_enum, default_value = "plus")]
    pub side: SideArg,
    /// Also report the channel sum at angle difference `θ − θ'` (kernel only;
    /// `m_max` from the config).
    #[arg(long, allow_hyphen_values = true)]
    pub dtheta: Option<f64>,
}

pub fn mu(alpha: f64) -> Out {
    let f = flux_params(alpha)?;
    let mut body = json!({ "alpha": f.alpha, "mu": f.mu, "k_star": f.k_star.primary(), "integer_flux": f.integer_flux });
    if let KStar::Tie(a, b) = f.k_star {
        body["k_star_pair"] = json!([a, b]);
    }
    let table = Table {
        header: vec!["alpha", "mu", "k_star", "integer_flux"],
        rows: vec![vec![Cell::F(f.alpha), Cell::F(f.mu), Cell::I(f.k_star.primary()), Cell::B(f.integer_flux)]],
    };
    Ok(Report { body, table: Some(table), pass: true })
}

/// Kernel value; `err` is the relative drift of `r(f'φ − fφ')` between `r` and `r'`.
pub fn kernel(a: &KernelArgs, cfg: &Config) -> Out {
    let pt = SpectralPoint::new(a.lambda, a.side.side())?;
    let v = channel_kernel(a.alpha, a.m, pt, a.r, a.rp)?.value;
    let sol = ChannelSolution::new(a.alpha, a.m, pt)?;
    let wr = |x: f64| -> Result<C64, Error> {
        let (f, df) = sol.f_reg(x)?;
        let (p, dp) = sol.phi(x)?;
        Ok((df * p - f * dp) * x)
    };
    let w = sol.wronskian();
    let err = ((wr(a.r)? - w).norm()).max((wr(a.rp)? - w).norm()) / w.norm();
    let real_ok = a.lambda >= 0.0 || v.im.abs() <= 1e-10 * v.re.abs().max(1.0);
    let side = if a.side == SideArg::Plus { "plus" } else { "minus" };
    let mut body = json!({ "m": a.m, "lambda": a.lambda, "side": side, "r": a.r, "rp": a.rp, "re": v.re, "im": v.im, "err": err });
    if let Some(dt) = a.dtheta {
        let full = full_kernel(a.alpha, pt, [a.r, 0.0], [a.rp * dt.cos(), -a.rp * dt.sin()], cfg.m_max)?;
        body["full"] = json!({ "dtheta": dt, "re": full.value.re, "im": full.value.im, "tail_bound": full.tail_bound, "m_max": full.m_max });
    }
    let table = Table {
        header: vec!["m", "lambda", "side", "r", "rp", "re", "im", "err"],
        rows: vec![vec![
            Cell::I(a.m),
            Cell::F(a.lambda),
            Cell::S(side.into()),
            Cell::F(a.r),
            Cell::F(a.rp),
            Cell::F(v.re),
            Cell::F(v.im),
            Cell::F(err),
        ]],
    };
    Ok(Report { body, table: Some(table), pass: real_ok && err < 1e-6 })
}

pub fn oracle_check(a: &KernelArgs) -> Out {
    let pt = SpectralPoint::new(a.lambda, a.side.side())?;
    let closed = channel_kernel(a.alpha, a.m, pt, a.r, a.rp)?.value;
    let sign = if a.side == SideArg::Plus { 1.0 } else { -1.0 };
    let oracle = ode_green_boundary(a.alpha, a.m, a.lambda, sign, a.r, a.rp)?;
    let rel = (closed - oracle).norm() / closed.norm();
    let body = json!({
        "alpha": a.alpha, "m": a.m, "lambda": a.lambda, "r": a.r, "rp": a.rp,
        "closed": c64(closed), "oracle": c64(oracle), "relative_diff": rel,
    });
    let table = Table {
        header: vec!["alpha", "m", "lambda", "r", "rp", "closed_re", "closed_im", "oracle_re", "oracle_im", "relative_diff"],
        rows: vec![vec![
            Cell::F(a.alpha),
            Cell::I(a.m),
            Cell::F(a.lambda),
            Cell::F(a.r),
            Cell::F(a.rp),
            Cell::F(closed.re),
            Cell::F(closed.im),
            Cell::F(oracle.re),
            Cell::F(oracle.im),
            Cell::F(rel),
        ]],
    };
    Ok(Report { body, table: Some(table), pass: rel <= 1e-6 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    /// `λ + i0`.
    Plus,
    /// `λ − i0`.
    Minus,
    /// `−λ`, below the spectrum.
    Below,
}

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.7)]
    pub s: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 8)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "plus")]
    pub branch: BranchArg,
    /// Channels `k(α) ± halfwidth` enter the supremum.
    #[arg(long, default_value_t = 2)]
    pub halfwidth: i64,
}

pub fn threshold_fit(a: &ThresholdArgs, cfg: &Config) -> Out {
    let branch = match a.branch {
        BranchArg::Plus => ThresholdBranch::Above(Side::Plus),
        BranchArg::Minus => ThresholdBranch::Above(Side::Minus),
        BranchArg::Below => ThresholdBranch::Below,
    };
    let lams = logspace(a.lambda_min, a.lambda_max, a.points);
    let fit = run_threshold_fit(a.alpha, a.s, &lams, branch, &cfg.radial_grid()?, a.halfwidth)?;
    let rows = fit
        .lambdas
        .iter()
        .zip(fit.leading_norms.iter().zip(&fit.remainder_norms))
        .map(|(l, (n, r))| {
            vec![Cell::F(*l), Cell::F(*n), Cell::F(*r), Cell::F(fit.leading.exponent), Cell::F(fit.remainder.exponent)]
        })
        .collect();
    let table = Table { header: vec!["lambda", "norm", "remainder_norm", "leading_exponent", "remainder_exponent"], rows };
    let pass = fit.leading_pass && fit.remainder_pass;
    Ok(Report { body: to_value(&fit), table: Some(table), pass })
}

#[derive(Args, Debug)]
pub struct IntegerArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.7)]
    pub s: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 9)]
    pub points: usize,
    #[arg(long, default_value_t = 2)]
    pub halfwidth: i64,
}

pub fn integer_fit(a: &IntegerArgs, cfg: &Config) -> Out {
    let lams = logspace(a.lambda_min, a.lambda_max, a.points);
    let fit = integer_threshold_fit(a.alpha, a.s, &lams, &cfg.radial_grid()?, a.halfwidth)?;
    let rows = (0..fit.lambdas.len())
        .map(|i| {
            vec![
                Cell::F(fit.lambdas[i]),
                Cell::F(fit.norms[i]),
                Cell::F(fit.scaled[i]),
                Cell::F(fit.remainder_scaled[i]),
                Cell::F(fit.variation),
            ]
        })
        .collect();
    let table = Table { header: vec!["lambda", "norm", "scaled", "remainder_scaled", "variation"], rows };
    Ok(Report { body: to_value(&fit), table: Some(table), pass: fit.pass })
}

#[derive(Args, Debug)]
pub struct DecayArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub m: i64,
    #[arg(long, default_value_t = 2.6)]
    pub s: f64,
    #[arg(long, default_value_t = 100.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1e4)]
    pub t_max: f64,
    #[arg(long, default_value_t = 13)]
    pub points: usize,
    /// Use ⟨f, e^{−itH} f⟩ instead of two seeded states.
    #[arg(long)]
    pub diagonal: bool,
}

pub fn decay_fit(a: &DecayArgs, cfg: &Config) -> Out {
    if !(a.t_min > 0.0 && a.t_max > a.t_min) {
        return Err(Failure::Usage(format!("need 0 < t-min < t-max, got [{}, {}]", a.t_min, a.t_max)));
    }
    let states = TestState::seeded(a.m, a.s, cfg.seed, 2);
    let (f, g) = if a.diagonal { (states[0], states[0]) } else { (states[0], states[1]) };
    let ts = logspace(a.t_min, a.t_max, a.points);
    let grid = SpectralGrid::with_cutoff(cfg.energy_cutoff);
    let samples = propagator_elements(a.alpha, &f, &g, &ts, grid)?;
    let unitary = samples.iter().all(|s| s.value.norm() <= 1.0 + 1e-6);
    let cmp = compare_models(&samples)?;
    let mut body = json!({
        "alpha": a.alpha,
        "m": a.m,
        "states": [to_value(&f), to_value(&g)],
        "samples": to_value(&samples),
        "power": to_value(&cmp.power),
        "power_log": to_value(&cmp.power_log),
        "residual_ratio": cmp.residual_ratio,
        "best": to_value(&cmp.best),
        "unitary": unitary,
    });
    let fp = flux_params(a.alpha)?;
    if fp.integer_flux {
        let (beta, c, res) = shifted_log_fit(&samples)?;
        body["shifted_log"] = json!({ "beta": beta, "coefficient": c, "residual": res });
    } else if fp.mu < 0.5 && fp.k().ok() == Some(a.m) {
        let fitted = threshold_coefficient(&samples, fp.mu, true)?;
        let g1 = g1_pairing(a.alpha, &f, &g)?;
        let mu = fp.mu;
        let predicted = C64::new(0.0, (PI * mu).sin() / PI)
            * C64::from_polar(magthresh::specfun::gamma_any(1.0 + mu), 0.5 * PI * mu)
            * g1;
        let ratio = fitted / predicted;
        body["prefactor"] = json!({
            "fitted": c64(fitted), "predicted": c64(predicted), "g1_pairing": c64(g1),
            "modulus": ratio.norm(), "phase": ratio.arg(),
        });
    }
    let rows = samples
        .iter()
        .map(|s| vec![Cell::F(s.t), Cell::F(s.value.re), Cell::F(s.value.im), Cell::F(s.value.norm()), Cell::F(s.quadrature_error)])
        .collect();
    let table = Table { header: vec!["t", "re", "im", "abs", "quad_err"], rows };
    Ok(Report { body, table: Some(table), pass: unitary })
}

/// `gaussian:flux,width`, `bump:amp,radius` or `b0:alpha`.
pub fn parse_field(spec: &str) -> Result<Field, Failure> {
    let (kind, args) = spec.split_once(':').ok_or_else(|| Failure::Usage(format!("field spec {spec} needs kind:params")))?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad number {x} in {spec}"))))
        .collect::<Result<_, _>>()?;
    let need = |n: usize| if nums.len() == n { Ok(()) } else { Err(Failure::Usage(format!("{kind} takes {n} parameters"))) };
    Ok(match kind {
        "gaussian" => {
            need(2)?;
            Field::gaussian(nums[0], nums[1])
        }
        "bump" => {
            need(2)?;
            Field::new(FieldKind::Bump { amplitude: nums[0], radius: nums[1] })
        }
        "b0" => {
            need(1)?;
            Field::b0(nums[0])
        }
        _ => return Err(Failure::Usage(format!("unknown field kind {kind}; use gaussian, bump or b0"))),
    })
}

#[derive(Args, Debug)]
pub struct GaugeArgs {
    /// `gaussian:flux,width`, `bump:amp,radius` or `b0:alpha`.
    #[arg(long, allow_hyphen_values = true)]
    pub field: String,
    /// Radii of the curl samples (8 angles each).
    #[arg(long, value_delimiter = ',', default_value = "0.5,1.5,3,5")]
    pub radii: Vec<f64>,
}

pub fn gauge_check(a: &GaugeArgs) -> Out {
    let field = parse_field(&a.field)?;
    let mut samples = Vec::new();
    for &r in &a.radii {
        for k in 0..8 {
            let th = 0.1 + 2.0 * PI * k as f64 / 8.0;
            samples.push([r * th.cos(), r * th.sin()]);
        }
    }
    let (body, pass, rep) = match gauge_report(&field, &samples) {
        Ok(rep) => (to_value(&rep), true, Some(rep)),
        Err(Error::Check(msg)) => (json!({ "check_failed": msg }), false, None),
        Err(e) => return Err(e.into()),
    };
    let table = rep.map(|r| Table {
        header: vec!["flux", "curl_max_err", "decay_slope_a_minus_a0", "decay_exact", "stokes_defect", "div_decay_slope"],
        rows: vec![vec![
            Cell::F(r.flux),
            Cell::F(r.curl_max_err),
            Cell::F(r.decay_slope_a_minus_a0),
            Cell::B(r.decay_exact),
            Cell::F(r.stokes_defect),
            Cell::F(r.div_decay_slope),
        ]],
    });
    Ok(Report { body, table, pass })
}

#[derive(Args, Debug)]
pub struct PerturbedArgs {
    /// Radial field: `gaussian:flux,width`, `bump:amp,radius` or `b0:alpha`.
    #[arg(long, default_value = "gaussian:0.3,1")]
    pub field: String,
    #[arg(long, default_value_t = 0.01, allow_hyphen_values = true)]
    pub v_amp: f64,
    #[arg(long, default_value_t = 4.0)]
    pub v_exp: f64,
    #[arg(long, default_value_t = 1.7)]
    pub s: f64,
    /// Compare F₀ with the resolvent at this λ + i0.
    #[arg(long)]
    pub limit_lambda: Option<f64>,
    /// Channels; default `k(α) − 2 … k(α) + 2`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub channels: Vec<i64>,
}

pub fn perturbed(a: &PerturbedArgs, cfg: &Config) -> Out {
    let field = parse_field(&a.field)?;
    let alpha = magthresh::gauge::flux(&field)?;
    let v = RadialPotential::new(a.v_amp, a.v_exp)?;
    let channels = if a.channels.is_empty() { default_channels(alpha)? } else { a.channels.clone() };
    let rep = nystrom_perturbed(alpha, &field, &v, a.s, &channels, &cfg.radial_grid()?, a.limit_lambda)?;
    let pass = rep.max_residual() <= 1e-10 && rep.min_margin() > 1e-6;
    let rows = rep
        .channels
        .iter()
        .map(|c| {
            vec![
                Cell::I(c.m),
                Cell::F(c.margin),
                Cell::F(c.identity_residual),
                Cell::F(c.duality_residual),
                Cell::F(c.f0_norm),
                Cell::F(c.f1_norm),
                Cell::F(c.limit.map_or(f64::NAN, |l| l.rel_diff)),
                Cell::F(c.limit.map_or(f64::NAN, |l| l.rel_diff_first_order)),
            ]
        })
        .collect();
    let table = Table {
        header: vec!["m", "margin", "identity_residual", "duality_residual", "f0_norm", "f1_norm", "limit_rel_diff", "limit_rel_diff_first_order"],
        rows,
    };
    Ok(Report { body: to_value(&rep), table: Some(table), pass })
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Lemma id (e.g. `lem-jj`, `ik`) or `all`.
    #[arg(long, default_value = "all")]
    pub lemma: String,
}

pub fn bounds(a: &BoundsArgs) -> Out {
    let ids: Vec<LemmaId> = if a.lemma == "all" { LemmaId::ALL.to_vec() } else { vec![a.lemma.parse()?] };
    let mut tables = Vec::new();
    let mut rows = Vec::new();
    for id in ids {
        let t = bound_check(id, &BoundGrid::default_for(id))?;
        for r in &t.rows {
            rows.push(vec![Cell::S(id.as_str().into()), Cell::S(r.part.clone()), Cell::F(r.level), Cell::F(r.max_ratio), Cell::B(t.pass)]);
        }
        tables.push(t);
    }
    let pass = tables.iter().all(|t| t.pass);
    let summary: Vec<Value> = tables.iter().map(|t| json!({ "lemma": t.lemma.as_str(), "pass": t.pass, "constant": t.constant() })).collect();
    let body = json!({ "summary": summary, "tables": to_value(&tables) });
    let table = Table { header: vec!["lemma", "part", "level", "max_ratio", "lemma_pass"], rows };
    Ok(Report { body, table: Some(table), pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    /// Logarithmic iff the flux is an integer.
    Auto,
    Polynomial,
    Logarithmic,
}

#[derive(Args, Debug)]
pub struct HardyArgs {
    #[arg(long, default_value = "gaussian:0.5,1", allow_hyphen_values = true)]
    pub field: String,
    #[arg(long, value_delimiter = ',')]
    pub widths: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub offsets: Vec<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub weight: WeightArg,
}

pub fn hardy(a: &HardyArgs) -> Out {
    let field = parse_field(&a.field)?;
    let widths = if a.widths.is_empty() { logspace(1.0, 10.0, 7) } else { a.widths.clone() };
    let weight = match a.weight {
        WeightArg::Auto => None,
        WeightArg::Polynomial => Some(HardyWeight::Polynomial),
        WeightArg::Logarithmic => Some(HardyWeight::Logarithmic),
    };
    let sw = hardy_sweep(&field, weight, &default_trials(&widths, &a.offsets))?;
    let rows = sw
        .ratios
        .iter()
        .map(|r| {
            vec![
                Cell::F(r.trial.center[0]),
                Cell::F(r.trial.center[1]),
                Cell::F(r.trial.width),
                Cell::F(r.kinetic),
                Cell::F(r.magnetic),
                Cell::F(r.weighted_mass),
                Cell::F(r.ratio),
            ]
        })
        .collect();
    let table = Table { header: vec!["center_x", "center_y", "width", "kinetic", "magnetic", "weighted_mass", "ratio"], rows };
    let pass = sw.ratios.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0);
    Ok(Report { body: to_value(&sw), table: Some(table), pass })
}
