//! Experiment front end: builds Ising models from a config document, runs
//! exact oracles or Monte Carlo estimators, cross-verifies the oracles, and
//! reruns the preset convergence experiments.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical verification
//! failure, 3 I/O error.

mod config;
mod experiment;
mod reproduce;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_config, ConfigIssue, OutputFormat};
use experiment::{run_experiment, write_outputs, RunError};
use ising_duality::{per_site_log2, transfer_matrix_2d_ln_z};
use reproduce::Figure;

#[derive(Parser)]
#[command(
    name = "isingz",
    about = "Partition functions of 1D/2D Ising models, exactly and by Monte Carlo on the primal or modified dual factor graph",
    version
)]
struct Cli {
    /// Worker threads for multi-chain runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an exact oracle from a config with a [method.exact] block.
    Exact {
        /// TOML configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Override the output path from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo estimator from a config with a [method.mc] block.
    Estimate {
        /// TOML configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Override the chain seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output path from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Verify the parity constraints of every visited dual sample.
        #[arg(long)]
        check_constraints: bool,
    },
    /// Cross-check all exact oracles on random models.
    Verify {
        #[arg(long, default_value_t = 4)]
        max_m: usize,
        #[arg(long, default_value_t = 16)]
        max_n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rerun a preset convergence experiment and emit its CSV plus manifest.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the preset chain seed (couplings stay fixed).
        #[arg(long)]
        seed: Option<u64>,
        /// Verify the parity constraints of every visited dual sample.
        #[arg(long)]
        check_constraints: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure {threads} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code())
        }
    }
}

enum CliError {
    Config(Vec<ConfigIssue>),
    Verification(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(issues) => CliError::Config(issues),
            RunError::Io(e) => CliError::Io(e.to_string()),
        }
    }
}

fn report(e: &CliError) {
    match e {
        CliError::Config(issues) => {
            eprintln!("configuration error ({} issue(s)):", issues.len());
            for issue in issues {
                eprintln!("  {issue}");
            }
        }
        CliError::Verification(msg) => eprintln!("verification failure: {msg}"),
        CliError::Io(msg) => eprintln!("i/o error: {msg}"),
    }
}

fn read_config(path: &PathBuf) -> Result<config::ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(CliError::Config)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Exact { config, out } => {
            let cfg = read_config(&config)?;
            if cfg.method.exact.is_none() {
                return Err(CliError::Config(vec![ConfigIssue {
                    path: "method.exact".into(),
                    message: "the `exact` subcommand needs a [method.exact] block".into(),
                }]));
            }
            execute(&cfg, out, false)
        }
        Command::Estimate {
            config,
            seed,
            out,
            check_constraints,
        } => {
            let mut cfg = read_config(&config)?;
            let Some(mc) = cfg.method.mc.as_mut() else {
                return Err(CliError::Config(vec![ConfigIssue {
                    path: "method.mc".into(),
                    message: "the `estimate` subcommand needs a [method.mc] block".into(),
                }]));
            };
            if let Some(seed) = seed {
                mc.seed = seed;
            }
            execute(&cfg, out, check_constraints)
        }
        Command::Verify {
            max_m,
            max_n,
            trials,
            seed,
        } => {
            let report = verify::run_verify(max_m, max_n, trials, seed);
            println!(
                "verify: {} comparisons, worst relative discrepancy {:.3e} ({})",
                report.checks, report.worst_rel_err, report.worst_case
            );
            if report.passed() {
                println!("verify: PASS at tolerance {:.1e}", verify::REL_TOLERANCE);
                Ok(())
            } else {
                for m in &report.mismatches {
                    eprintln!("MISMATCH (rel {:.3e}): {}", m.rel_err, m.description);
                }
                Err(CliError::Verification(format!(
                    "{} oracle comparison(s) beyond {:.1e} relative",
                    report.mismatches.len(),
                    verify::REL_TOLERANCE
                )))
            }
        }
        Command::Reproduce {
            figure,
            out,
            seed,
            check_constraints,
        } => {
            let cfg = figure.config(seed);
            let mut output = run_experiment(&cfg, check_constraints)?;

            // exact reference for the preset's grid (m <= 20 always here)
            let model = config::build_model(&cfg.model).map_err(CliError::Config)?;
            let reference = transfer_matrix_2d_ln_z(&model)
                .map(|r| per_site_log2(r.ln_z, model.site_count()))
                .ok();
            output.manifest.reference_per_site_log2 = reference;

            let path = out.join(format!("{}.csv", figure.name()));
            write_outputs(&output, &path, OutputFormat::Csv).map_err(CliError::from)?;
            if let Some(reference) = reference {
                println!(
                    "{}: exact transfer reference per-site log2 Z = {reference:.6}",
                    figure.name()
                );
            }
            for fin in &output.manifest.final_estimates {
                println!(
                    "{} chain {}: per-site log2 Z = {:.6}",
                    figure.name(),
                    fin.chain_id,
                    fin.per_site_log2_z
                );
            }
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn execute(
    cfg: &config::ExperimentConfig,
    out_override: Option<PathBuf>,
    check_constraints: bool,
) -> Result<(), CliError> {
    let output = run_experiment(cfg, check_constraints)?;
    let path = out_override
        .or_else(|| cfg.output.path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("run.csv"));
    write_outputs(&output, &path, cfg.output.format).map_err(CliError::from)?;
    for fin in &output.manifest.final_estimates {
        let label = if fin.chain_id < 0 {
            "exact".to_string()
        } else {
            format!("chain {}", fin.chain_id)
        };
        println!(
            "{label}: ln Z = {:.9}, per-site log2 Z = {:.9}",
            fin.ln_z, fin.per_site_log2_z
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}
