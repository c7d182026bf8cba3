//! `dwell`: run one double-well instance, a full separation sweep, or
//! re-render the report of an earlier sweep.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dwell_core::harness::{build_problem, emit_report, tables_from_csv, Assessment};
use dwell_core::hartree::solve_double_well;
use dwell_core::spectrum::spectral_summary;
use dwell_core::{parse_config_over, run_all, RunConfig};

/// Environment variable naming the default output directory.
const OUT_DIR_VAR: &str = "DWELL_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "dwell",
    version,
    about = "Hartree double-well tunneling laboratory"
)]
struct Cli {
    /// TOML configuration file overlaid on the defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set L=6` or `--set scf.tol=1e-12`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (takes precedence over the configuration).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for the sweep.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one instance at `L` and `lambda` and print its spectral summary.
    Solve,
    /// Sweep over `L_list` for every coupling in `lambda_list` and write the outputs.
    Sweep,
    /// Re-render the report from the CSV files in the output directory.
    Report,
}

enum Outcome {
    Passed,
    ThresholdFailed,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if informational {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(&cli) {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::ThresholdFailed) => ExitCode::from(2),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, String> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err("--jobs must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let mut base = RunConfig::default();
    if let Ok(dir) = std::env::var(OUT_DIR_VAR) {
        if !dir.is_empty() {
            base.output.dir = PathBuf::from(dir);
        }
    }
    let mut cfg = parse_config_over(&base, cli.config.as_deref(), &cli.overrides)
        .map_err(|e| e.to_string())?;
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    match cli.command {
        Command::Solve => solve(&cfg),
        Command::Sweep => {
            let tables = run_all(&cfg).map_err(|e| e.to_string())?;
            write_outputs(&cfg, &tables)
        }
        Command::Report => {
            let tables = tables_from_csv(&cfg, &cfg.output.dir).map_err(|e| e.to_string())?;
            write_outputs(&cfg, &tables)
        }
    }
}

fn solve(cfg: &RunConfig) -> Result<Outcome, String> {
    let problem = build_problem(cfg, cfg.separation, cfg.lambda).map_err(|e| e.to_string())?;
    let dw = solve_double_well(&problem, &cfg.scf_options()).map_err(|e| e.to_string())?;
    let s = spectral_summary(&problem, &dw, cfg.eig.summary, &cfg.eigen_options())
        .map_err(|e| e.to_string())?;
    let lines = [
        ("L", cfg.separation),
        ("lambda", cfg.lambda),
        ("mu_plus", s.mu_plus),
        ("mu_minus", s.mu_minus),
        ("mu_ex", s.mu_ex),
        ("gap1", s.gap1),
        ("gap2", s.gap2),
        ("T", s.tunneling),
        ("energy", dw.energy),
        ("chemical_potential", dw.chemical_potential),
    ];
    for (name, value) in lines {
        println!("{name} = {value:.16e}");
    }
    println!("scf_iterations = {}", dw.iterations);
    let ordered = s.mu_plus < s.mu_minus && s.mu_minus <= s.mu_ex && s.gap1 > 0.0;
    let gap2_ok = s.gap2 >= cfg.sweep.gap2_floor;
    if !ordered {
        println!("FAIL ordering mu_plus < mu_minus <= mu_ex");
    }
    if !gap2_ok {
        println!("FAIL gap2 below floor {:.16e}", cfg.sweep.gap2_floor);
    }
    Ok(if ordered && gap2_ok {
        Outcome::Passed
    } else {
        Outcome::ThresholdFailed
    })
}

fn write_outputs(cfg: &RunConfig, tables: &[dwell_core::SweepTable]) -> Result<Outcome, String> {
    let dir = cfg.output.dir.as_path();
    let files = emit_report(cfg, tables, dir).map_err(|e| e.to_string())?;
    for a in &files.assessments {
        print_assessment(a);
    }
    println!("report = {}", files.report.display());
    let all = files.assessments.iter().all(|a| a.passed);
    Ok(if all {
        Outcome::Passed
    } else {
        Outcome::ThresholdFailed
    })
}

fn print_assessment(a: &Assessment) {
    let tag = if a.passed { "PASS" } else { "FAIL" };
    println!(
        "{tag} [lambda = {:.16e}] {}: {}",
        a.lambda, a.name, a.detail
    );
}
