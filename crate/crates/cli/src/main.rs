//! `magthresh`: command-line front end.
//!
//! Exit codes: 0 when the run succeeds and its checks pass, 1 on a failed
//! check or numerical failure (diagnostics as JSON on stdout), 2 on usage
//! errors (message on stderr).

mod commands;
mod config;
mod emit;

use clap::{Args, Parser, Subcommand};
use config::Config;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "magthresh", version, about = "Threshold kernels, gauge checks and decay fits for 2D magnetic Schroedinger operators")]
struct Cli {
    #[command(flatten)]
    out: OutputArgs,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Emit a single JSON document.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit a CSV table with a header row.
    #[arg(long, global = true)]
    csv: bool,
    /// JSON config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// μ(α), k(α) and integrality of the flux.
    Mu {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
    },
    /// One channel kernel value R^m(r, r') at λ ± i0.
    Kernel(commands::KernelArgs),
    /// Threshold exponents of R₀(λ) − G₀ and of the remainder after λ^μ G₁.
    ThresholdFit(commands::ThresholdArgs),
    /// ‖R₀(λ) − 𝒢₀‖·|log λ| plateau at integer flux.
    IntegerFit(commands::IntegerArgs),
    /// Propagator matrix elements and decay-law fits.
    DecayFit(commands::DecayArgs),
    /// Flux, curl, decay and Stokes checks of the corrected gauge.
    GaugeCheck(commands::GaugeArgs),
    /// Closed-form channel kernel against ODE shooting.
    OracleCheck(commands::KernelArgs),
    /// Nyström threshold coefficients of the perturbed operator.
    Perturbed(commands::PerturbedArgs),
    /// Numeric checks of the integral-estimate lemmas.
    Bounds(commands::BoundsArgs),
    /// Magnetic Hardy ratios over Gaussian trials.
    Hardy(commands::HardyArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match Config::load(cli.out.config.as_deref()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.cmd {
        Command::Mu { alpha } => commands::mu(*alpha),
        Command::Kernel(a) => commands::kernel(a, &cfg),
        Command::ThresholdFit(a) => commands::threshold_fit(a, &cfg),
        Command::IntegerFit(a) => commands::integer_fit(a, &cfg),
        Command::DecayFit(a) => commands::decay_fit(a, &cfg),
        Command::GaugeCheck(a) => commands::gauge_check(a),
        Command::OracleCheck(a) => commands::oracle_check(a),
        Command::Perturbed(a) => commands::perturbed(a, &cfg),
        Command::Bounds(a) => commands::bounds(a),
        Command::Hardy(a) => commands::hardy(a),
    };
    match result {
        Ok(report) => {
            if cli.out.csv {
                match emit::csv_document(&report, &cfg) {
                    Some(s) => print!("{s}"),
                    None => {
                        eprintln!("error: this subcommand has no tabular output; use --json");
                        return ExitCode::from(2);
                    }
                }
            } else if cli.out.json {
                println!("{}", emit::json_document(&report, &cfg));
            } else {
                let doc: serde_json::Value = serde_json::from_str(&emit::json_document(&report, &cfg)).expect("valid JSON");
                println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
            }
            ExitCode::from(if report.pass { 0 } else { 1 })
        }
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("usage: magthresh [--json|--csv] [--config PATH] <SUBCOMMAND> [ARGS]; see --help");
            ExitCode::from(2)
        }
        Err(commands::Failure::Numeric(e)) => {
            let doc = serde_json::json!({ "error": e.to_string(), "pass": false, "config_hash": cfg.hash() });
            println!("{doc}");
            ExitCode::from(1)
        }
    }
}
