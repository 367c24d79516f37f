use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use qp_spectra_cli::commands;
use qp_spectra_cli::config::ExperimentConfig;
use qp_spectra_cli::output::Output;

/// Numerical experiments for quasi-periodic Schrödinger operators.
#[derive(Parser)]
#[command(name = "qp-spectra", version = qp_spectra_cli::output::VERSION)]
struct Cli {
    /// Experiment configuration (TOML, or JSON by extension).
    #[arg(long, global = true, default_value = "configs/default.toml")]
    config: PathBuf,
    /// Output directory; `QP_SPECTRA_OUT` overrides the default.
    #[arg(long, global = true, env = "QP_SPECTRA_OUT", default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-volume Lyapunov exponents and the multiscale estimate.
    Lyap,
    /// Large-deviation fractions.
    Ldt,
    /// Green's function entries against a dense inverse.
    Green,
    /// Eigenvector localization and eigenvalue separation.
    Localize,
    /// Eigenpair matching across nested scales.
    Stabilize,
    /// Non-double-resonance scans and the lacunary ladder.
    Ndr,
    /// Resonant-frequency fractions.
    Resonance,
    /// Zero counts of Dirichlet determinants.
    Prep,
    /// Restricted spectrum sets and their reference comparison.
    Spectrum,
    /// Homogeneity ratios of a restricted spectrum set.
    Homog,
    /// Runs the property suites.
    Selftest {
        /// Criteria to run (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        /// `quick` or `full`; overrides the configured profile.
        #[arg(long)]
        profile: Option<String>,
    },
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("--threads")?;
    }
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let (name, sub) = match &cli.command {
        Command::Lyap => ("lyap", None),
        Command::Ldt => ("ldt", None),
        Command::Green => ("green", None),
        Command::Localize => ("localize", None),
        Command::Stabilize => ("stabilize", None),
        Command::Ndr => ("ndr", None),
        Command::Resonance => ("resonance", None),
        Command::Prep => ("prep", None),
        Command::Spectrum => ("spectrum", None),
        Command::Homog => ("homog", None),
        Command::Selftest { only, profile } => {
            if let Some(p) = profile {
                cfg.selftest.profile = serde_json::from_value(serde_json::Value::String(p.clone()))
                    .with_context(|| format!("--profile: expected `quick` or `full`, got `{p}`"))?;
            }
            ("selftest", Some(only.clone()))
        }
    };
    let out = Output::new(&cli.out)?;
    match name {
        "lyap" => commands::lyap(&cfg, &out),
        "ldt" => commands::ldt(&cfg, &out),
        "green" => commands::green(&cfg, &out),
        "localize" => commands::localize(&cfg, &out),
        "stabilize" => commands::stabilize(&cfg, &out),
        "ndr" => commands::ndr(&cfg, &out),
        "resonance" => commands::resonance(&cfg, &out),
        "prep" => commands::prep(&cfg, &out),
        "spectrum" => commands::spectrum(&cfg, &out),
        "homog" => commands::homog(&cfg, &out),
        _ => commands::selftest(&cfg, &out, &sub.unwrap_or_default()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("checks failed; see summary.json");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
