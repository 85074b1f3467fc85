//! `semcom`: run scenarios, check scenario files, and re-derive KPIs from a
//! saved trace.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use semcom::harness::{
    export, kpi_csv, kpi_from_trace, parse_trace, run_experiment, HarnessError, Scenario,
    SCENARIO_FILE,
};

#[derive(Parser)]
#[command(
    name = "semcom",
    version,
    about = "Teacher/apprentice semantic communication simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Skip the semantic path and send everything classically.
        #[arg(long)]
        baseline_only: bool,
    },
    /// Check a scenario file without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Recompute kpi.csv rows from a trace.csv.
    Kpi {
        #[arg(long)]
        trace: PathBuf,
        /// Scenario supplying the channel and omega; defaults to the
        /// scenario.toml next to the trace.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn run(scenario: &Path, out: &Path, seed: Option<u64>, baseline_only: bool) -> Result<(), Failure> {
    let mut s = Scenario::load(scenario)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    s.semantic.baseline_only |= baseline_only;
    let report = run_experiment(&s)?;
    for path in export(&report, out)? {
        println!("wrote {}", path.display());
    }
    if let Some(d) = &report.dominance {
        println!("{}", d.statement);
    }
    if let Some(a) = &report.aggregate {
        println!(
            "aggregate: c_c={} c_r={} c_t={} regime={}",
            a.c_c, a.c_r, a.c_t, a.regime
        );
    } else {
        println!(
            "baseline: {} packets, c_c={}",
            report.baseline_total.packets, report.shannon_capacity
        );
    }
    Ok(())
}

fn validate(scenario: &Path) -> Result<(), Failure> {
    let s = Scenario::load(scenario)?;
    println!(
        "ok: {} sessions, {} elements of {} variables, seed {}",
        s.sessions, s.content.elements, s.content.variables, s.seed
    );
    Ok(())
}

fn kpi(trace: &Path, scenario: Option<&Path>) -> Result<(), Failure> {
    let scenario_path = match scenario {
        Some(p) => p.to_path_buf(),
        None => trace.with_file_name(SCENARIO_FILE),
    };
    let s = Scenario::load(&scenario_path)?;
    let text = std::fs::read_to_string(trace)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", trace.display())))?;
    let records = parse_trace(&text)?;
    let rows = kpi_from_trace(&records, &s.channel, s.semantic.omega)?;
    print!("{}", kpi_csv(&rows));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            baseline_only,
        } => run(scenario, out, *seed, *baseline_only),
        Command::Validate { scenario } => validate(scenario),
        Command::Kpi { trace, scenario } => kpi(trace, scenario.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
