//! Command-line driver: binds a JSON experiment config to the harness and
//! writes reproducible CSV result files.
//!
//! Exit codes: 0 success, 2 config error, 3 runtime error.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qbandit::config::ExperimentConfig;
use qbandit::harness::{
    phase_trace, run_experiment, sweep_k, write_final_csv, write_phase_csv, write_regret_csv,
};
use qbandit::policies::ScheduleParams;
use qbandit::selftest;

#[derive(Parser)]
#[command(name = "qbandit", about = "Quantum-amplification bandit simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Experiment config JSON; embedded defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Base seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Repetition count override.
    #[arg(long)]
    reps: Option<usize>,
    /// Horizon (rounds) override.
    #[arg(long)]
    horizon: Option<usize>,
    /// Comma-separated policy list override.
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured policies and write regret.csv.
    Run {
        #[command(flatten)]
        common: CommonOpts,
        /// Print the effective config as JSON and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Sweep arm counts and write final.csv.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated arm counts.
        #[arg(long, value_delimiter = ',', default_value = "5,10,15")]
        k: Vec<usize>,
    },
    /// Trace per-round (p_m, dbar, phi, sigma) rows and write phase_trace.csv.
    Trace {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the built-in property suites and print pass/fail counts.
    Selftest,
}

fn load_config(common: &CommonOpts) -> Result<ExperimentConfig, String> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::from_path(path)
            .map_err(|e| format!("{}: {e}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(reps) = common.reps {
        config.repetitions = reps;
    }
    if let Some(horizon) = common.horizon {
        config.environment.set_horizon(horizon);
    }
    if let Some(policies) = &common.policies {
        config.policies = policies.clone();
    }
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn warn_schedule_conditions(config: &ExperimentConfig) {
    if !config.policies.iter().any(|p| p == "qb" || p == "exp3ix") {
        return;
    }
    let schedule =
        ScheduleParams::anytime(config.environment.arms(), config.environment.horizon());
    let violations = schedule.condition_violations();
    if !violations.is_empty() {
        eprintln!(
            "warning: eta_t > 1/t, gamma_t > 1/(2t) conditions fail at {} of {} rounds (first t = {})",
            violations.len(),
            config.environment.horizon(),
            violations[0]
        );
    }
}

fn open_out(dir: &PathBuf, name: &str) -> std::io::Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn cmd_run(common: &CommonOpts, print_config: bool) -> Result<(), ExitCode> {
    let config = load_config(common).map_err(config_err)?;
    if print_config {
        println!("{}", config.to_json_pretty());
        return Ok(());
    }
    warn_schedule_conditions(&config);
    let result = run_experiment(&config).map_err(runtime_err)?;
    let writer = open_out(&common.out, "regret.csv").map_err(runtime_err)?;
    write_regret_csv(&result, writer).map_err(runtime_err)?;
    for agg in &result.policies {
        println!(
            "{}: final regret mean {:.3} std {:.3} over {} reps",
            agg.policy,
            agg.final_mean(),
            agg.final_std(),
            agg.repetitions
        );
    }
    println!("wrote {}", common.out.join("regret.csv").display());
    Ok(())
}

fn cmd_sweep(common: &CommonOpts, k: &[usize]) -> Result<(), ExitCode> {
    let config = load_config(common).map_err(config_err)?;
    if k.iter().any(|&v| v < 2) {
        return Err(config_err("arm counts must be at least 2"));
    }
    warn_schedule_conditions(&config);
    let sweeps = sweep_k(&config, k).map_err(runtime_err)?;
    let writer = open_out(&common.out, "final.csv").map_err(runtime_err)?;
    write_final_csv(&sweeps, writer).map_err(runtime_err)?;
    for (k, result) in &sweeps {
        for agg in &result.policies {
            println!("K={k} {}: final regret mean {:.3}", agg.policy, agg.final_mean());
        }
    }
    println!("wrote {}", common.out.join("final.csv").display());
    Ok(())
}

fn cmd_trace(common: &CommonOpts) -> Result<(), ExitCode> {
    let config = load_config(common).map_err(config_err)?;
    let rows = phase_trace(&config).map_err(runtime_err)?;
    let writer = open_out(&common.out, "phase_trace.csv").map_err(runtime_err)?;
    write_phase_csv(&rows, writer).map_err(runtime_err)?;
    println!(
        "wrote {} ({} rows)",
        common.out.join("phase_trace.csv").display(),
        rows.len()
    );
    Ok(())
}

fn cmd_selftest() -> Result<(), ExitCode> {
    let results = selftest::run_all();
    let mut failed = 0;
    for (name, result) in &results {
        match result {
            Ok(()) => println!("PASS {name}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        return Err(ExitCode::from(3));
    }
    Ok(())
}

fn config_err<E: std::fmt::Display>(e: E) -> ExitCode {
    eprintln!("config error: {e}");
    ExitCode::from(2)
}

fn runtime_err<E: std::fmt::Display>(e: E) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(3)
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("QBANDIT_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("config error: QBANDIT_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            common,
            print_config,
        } => cmd_run(common, *print_config),
        Command::Sweep { common, k } => cmd_sweep(common, k),
        Command::Trace { common } => cmd_trace(common),
        Command::Selftest => cmd_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
