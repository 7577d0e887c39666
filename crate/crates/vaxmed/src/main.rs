use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vaxmed::builtin;
use vaxmed::report::{render_csv, render_table};
use vaxmed::runner::{run_scenario, RunError, RunOptions};
use vaxmed::scenario::{read_scenario_file, Scenario, ScenarioError};

/// Exact mediation, detection and interference analysis for small
/// structural causal models, driven by scenario files.
#[derive(Parser)]
#[command(name = "vaxmed", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or built-in scenario and print its report.
    Run {
        /// Path to a scenario file, or a built-in name (see `list`).
        scenario: String,
        /// Overrides the scenario's sampling seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the scenario's sample size.
        #[arg(long)]
        n: Option<usize>,
        /// Directory to receive `<name>-report.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// List the built-in scenarios.
    List,
    /// Parse and validate a scenario, then print its identification
    /// assumption report without running anything.
    Check { scenario: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
}

/// What went wrong plus the process exit code: 1 for invalid input,
/// 2 for runtime and capacity failures.
struct Failure {
    code: u8,
    message: String,
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 1,
        message: e.to_string(),
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: e.to_string(),
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Failure {
        match e {
            RunError::Scenario(inner) => invalid(inner),
            RunError::Capacity(_) | RunError::Runtime(_) => runtime(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Writes to stdout, treating a closed pipe (e.g. `vaxmed run ... | head`)
/// as a normal early exit rather than an error.
fn emit(text: &str) -> Result<(), Failure> {
    use std::io::Write;
    match std::io::stdout().write_all(text.as_bytes()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => Err(runtime(e)),
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            scenario,
            seed,
            n,
            out,
            format,
        } => {
            let s = load(&scenario)?;
            let rows = run_scenario(&s, &RunOptions { seed, n })?;
            let csv = render_csv(&rows);
            match format {
                Format::Table => emit(&render_table(&rows))?,
                Format::Csv => emit(&csv)?,
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(runtime)?;
                let path = dir.join(format!("{}-report.csv", s.name));
                std::fs::write(&path, csv).map_err(runtime)?;
            }
            Ok(())
        }
        Command::List => {
            let mut listing = String::new();
            for name in builtin::names() {
                listing.push_str(name);
                listing.push('\n');
            }
            emit(&listing)
        }
        Command::Check { scenario } => {
            let s = load(&scenario)?;
            let mut report = format!("scenario: {}\nvalid\n", s.name);
            for line in assumption_lines(&s) {
                report.push_str(&line);
                report.push('\n');
            }
            emit(&report)
        }
    }
}

/// A file path when one exists, a built-in name otherwise.
fn load(source: &str) -> Result<Scenario, Failure> {
    if Path::new(source).exists() {
        return read_scenario_file(source).map_err(|e| match e {
            ScenarioError::Capacity(msg) => runtime(msg),
            other => invalid(other),
        });
    }
    builtin::get(source).ok_or_else(|| {
        invalid(format!(
            "`{source}` is neither a scenario file nor a built-in name; `vaxmed list` shows the built-ins"
        ))
    })
}

/// Identification assumption verdicts for every bound behaviour node,
/// read from the scenario's graph alone.
fn assumption_lines(s: &Scenario) -> Vec<String> {
    let (Some(model), Some(roles)) = (&s.model, &s.roles) else {
        return Vec::new();
    };
    let dag = match model.dag() {
        Ok(dag) => dag,
        Err(e) => return vec![format!("assumptions: error({e})")],
    };
    let l = roles.l_refs();
    let behaviours = roles.behaviour_nodes();
    let label = behaviours.len() > 1;
    let mut lines = Vec::new();
    for b in behaviours {
        let prefix = if label {
            format!("[{b}] ")
        } else {
            String::new()
        };
        match dag.check_nde_assumptions(&roles.a, b, &roles.y, &l) {
            Ok(report) => {
                for (k, verdict) in report.iter() {
                    lines.push(format!("{prefix}assumption{k}: {verdict}"));
                }
            }
            Err(e) => lines.push(format!("{prefix}assumptions: error({e})")),
        }
    }
    lines
}
