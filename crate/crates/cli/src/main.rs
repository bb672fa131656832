//! Command-line front end: `run`, `list`, `verify` and `sigma`.
//!
//! Exit codes: 0 all checks pass, 2 some check fails, 64 usage error or
//! unknown scenario, 65 unreadable or malformed config.

use std::path::PathBuf;
use std::process::ExitCode;

use alignlab::acceptance::{filter_matches, run_all};
use alignlab::error::Error;
use alignlab::experiments::{list_scenarios, run_scenario, ExperimentConfig, Tolerances};
use alignlab::fourier::{default_k_max, sigma_phi};
use alignlab::geometry::{normalize_kernel, DomainSpec, KernelSpec};
use clap::{Parser, Subcommand};

const EXIT_FAIL: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATAERR: u8 = 65;

#[derive(Parser)]
#[command(name = "alignlab", version, about = "Alignment dynamics experiments and certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a JSON config and write its bundle.
    Run {
        config: PathBuf,
        /// Tolerance override, e.g. `sigma_1d=1e-12`. Repeatable.
        #[arg(long = "tol", value_name = "K=V")]
        tol: Vec<String>,
    },
    /// List built-in scenarios.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Run the acceptance suite and print a pass/fail table.
    Verify {
        /// Criterion id (A1..A8) or scenario name.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long = "tol", value_name = "K=V")]
        tol: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Fourier gap of a kernel on the 2π torus, as JSON.
    Sigma {
        /// Kernel spec, e.g. `{"family":"indicator","radius":1.0}`.
        kernel: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        k_max: Option<usize>,
        /// Number of coefficients to keep in the output.
        #[arg(long, default_value_t = 16)]
        keep: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::Json(_) => EXIT_DATAERR,
                Error::UnknownScenario(_) => EXIT_USAGE,
                _ => EXIT_FAIL,
            })
        }
    }
}

fn tolerances(overrides: &[String]) -> Result<Tolerances, Error> {
    let mut tol = Tolerances::default();
    for o in overrides {
        tol.set(o)?;
    }
    Ok(tol)
}

fn dispatch(command: Command) -> Result<u8, Error> {
    match command {
        Command::Run { config, tol } => {
            let tol = tolerances(&tol)?;
            let cfg = ExperimentConfig::load(&config)?;
            let bundle = run_scenario(&cfg, &tol)?;
            for c in &bundle.manifest.checks {
                println!(
                    "{:<4} {:<40} value {:.6e}  limit {:.6e}",
                    if c.passed { "ok" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.limit
                );
            }
            println!("bundle {}  sha256 {}", bundle.dir.display(), bundle.manifest.bundle_sha256);
            Ok(if bundle.passed() { 0 } else { EXIT_FAIL })
        }
        Command::List { json } => {
            if json {
                println!("{}", serde_json::to_string_pretty(list_scenarios())?);
            } else {
                for s in list_scenarios() {
                    println!("{:<26} {}  [{}]", s.name, s.description, s.topic);
                }
            }
            Ok(0)
        }
        Command::Verify { filter, tol, json } => {
            let tol = tolerances(&tol)?;
            if let Some(f) = &filter {
                if !filter_matches(f) {
                    return Err(Error::UnknownScenario(f.clone()));
                }
            }
            let results = run_all(&tol, filter.as_deref());
            if json {
                println!("{}", serde_json::to_string_pretty(&results)?);
            } else {
                for r in &results {
                    println!("{}", r.line());
                }
            }
            Ok(if results.iter().all(|r| r.passed) { 0 } else { EXIT_FAIL })
        }
        Command::Sigma { kernel, dim, k_max, keep } => {
            let spec: KernelSpec = serde_json::from_str(&kernel).map_err(|e| Error::Config(e.to_string()))?;
            let domain = DomainSpec::standard_torus(dim);
            let mut result =
                sigma_phi(&normalize_kernel(&spec, &domain)?, &domain, k_max.unwrap_or_else(|| default_k_max(dim)))?;
            result.coefficients.truncate(keep);
            println!("{}", serde_json::to_string_pretty(&result)?);
            Ok(0)
        }
    }
}
