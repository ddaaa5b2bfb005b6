use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use limitgen::adversaries::{
    default_generation_counterexample, identification_counterexample, index_pair_instance, lower_density_instance,
    sperner_hard_instance, window_hard_instance, HardInstance,
};
use limitgen::combinatorics::symmetric_chain_decomposition;
use limitgen::domain::{Element, ProbePolicy};
use limitgen::harness::{run_experiment, write_artifacts, ExperimentConfig, Overrides, TranscriptFormat};
use limitgen::suites::{run_suite, SUITES};

#[derive(Parser)]
#[command(name = "limitgen", version, about = "Generation-in-the-limit experiments")]
struct Cli {
    /// Probe horizon for opaque sets (overrides LIMITGEN_PROBE_HORIZON).
    #[arg(long, global = true)]
    probe_horizon: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config: writes a transcript, a summary and a plot.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run a named check suite and write its JSON report.
    Suite {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        name: String,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Print the symmetric chain decomposition of the subsets of [n], one
    /// chain of masks per line.
    Scd {
        #[arg(long)]
        n: usize,
    },
    /// Build a hard instance and write it as JSON.
    Instance {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        k: Option<usize>,
        /// Output file; stdout when absent.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sperner,
    Window,
    LowerDensity,
    IndexPair,
    Identification,
    Generation,
}

/// Exit status: 0 pass, 1 failed check, 2 bad input.
enum Failure {
    Check(String),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn policy(horizon: Option<u64>) -> Result<ProbePolicy> {
    let mut p = ProbePolicy::from_env()?;
    if let Some(h) = horizon {
        p.horizon = Element::new(h);
    }
    Ok(p)
}

fn run(
    config_path: &Path,
    overrides: Overrides,
    out_dir: Option<PathBuf>,
    format: Format,
) -> std::result::Result<(), Failure> {
    let config = ExperimentConfig::load(config_path).context("config error")?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let outcome = run_experiment(&config, base, &overrides).context("config error")?;
    let dir =
        out_dir.or_else(|| config.output.dir.as_ref().map(|d| base.join(d))).unwrap_or_else(|| PathBuf::from("out"));
    let format = match format {
        Format::Csv => TranscriptFormat::Csv,
        Format::Json => TranscriptFormat::Json,
    };
    let written = write_artifacts(&outcome, &dir, &config.stem(), format)
        .with_context(|| format!("writing artifacts to {}", dir.display()))?;
    println!("{}", serde_json::to_string_pretty(&outcome.summary).context("summary")?);
    for p in written {
        println!("wrote {}", p.display());
    }
    if outcome.passed() {
        Ok(())
    } else {
        Err(Failure::Check(outcome.failures.join("\n")))
    }
}

fn suite(name: &str, out_dir: &Path, policy: &ProbePolicy) -> std::result::Result<(), Failure> {
    let report = run_suite(name, policy).with_context(|| format!("suite {name}"))?;
    println!("{report}");
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let path = out_dir.join(format!("suite-{name}.json"));
    let text = serde_json::to_string_pretty(&report).context("report")? + "\n";
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<String> = report.rows.iter().filter(|r| !r.pass).map(|r| r.case.clone()).collect();
        Err(Failure::Check(format!("failed: {}", failed.join(", "))))
    }
}

fn scd(n: usize) -> Result<()> {
    for chain in symmetric_chain_decomposition(n)? {
        println!("{}", serde_json::to_string(&chain)?);
    }
    Ok(())
}

fn instance(kind: Kind, k: Option<usize>, emit: Option<&Path>) -> Result<()> {
    let need_k = || k.context("--k is required for this kind");
    let inst: HardInstance = match kind {
        Kind::Sperner => sperner_hard_instance(need_k()?)?,
        Kind::Window => window_hard_instance(need_k()?)?,
        Kind::LowerDensity => lower_density_instance(need_k()?)?,
        Kind::IndexPair => index_pair_instance()?,
        Kind::Identification => identification_counterexample()?,
        Kind::Generation => default_generation_counterexample()?,
    };
    if k.is_some() && matches!(kind, Kind::IndexPair | Kind::Identification | Kind::Generation) {
        bail!("--k does not apply to this kind");
    }
    let text = serde_json::to_string_pretty(&inst)? + "\n";
    match emit {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = policy(cli.probe_horizon).map_err(Failure::Input).and_then(|policy| match cli.command {
        Command::Run { config, seed, rounds, out_dir, format } => {
            run(&config, Overrides { seed, rounds, policy: Some(policy) }, out_dir, format)
        }
        Command::Suite { name, out_dir } => suite(&name, &out_dir, &policy),
        Command::Scd { n } => scd(n).map_err(Failure::Input),
        Command::Instance { kind, k, emit } => instance(kind, k, emit.as_deref()).map_err(Failure::Input),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
