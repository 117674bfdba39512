use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use convorder::driver::{self, DriverError};
use convorder::harness::synthetic::default_models;
use convorder::harness::{
    emit_summary, emit_table, run_grid, verify_propositions, GridConfig, GridReport, HarnessError,
    SyntheticModel, TableFormat,
};
use convorder::problems::{self, ProblemError};
use convorder::{EstimatorMode, MethodId, PrecisionPolicy, ProblemId};

#[derive(Parser)]
#[command(
    name = "convorder",
    version,
    about = "Computational orders of convergence under adaptive precision"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method on one problem and print its I and Δλ row.
    Run {
        #[arg(long)]
        method: MethodId,
        #[arg(long)]
        problem: ProblemId,
        #[arg(long)]
        mode: EstimatorMode,
        #[arg(long, default_value_t = 2200)]
        eta: u32,
        /// Write the full JSON trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: TableFormat,
    },
    /// Run the method x problem x mode grid and write table and summary files.
    Grid {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        eta: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        format: Option<TableFormat>,
        /// Also write every run's JSON trace under <out>/traces.
        #[arg(long)]
        traces: bool,
    },
    /// Check the asymptotic-error propositions on synthetic sequences.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// JSON array of models; the built-in 48-model grid when absent.
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Print a reference root to the requested number of digits.
    Root {
        #[arg(long)]
        problem: ProblemId,
        #[arg(long)]
        digits: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Propositions,
}

enum Failure {
    /// A run or check finished but did not succeed.
    Run(String),
    /// Bad input: flags, config or files.
    Usage(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::ModelInvalid(_) => Failure::Run(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<DriverError> for Failure {
    fn from(e: DriverError) -> Self {
        match e {
            DriverError::Root(_) => Failure::Run(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<ProblemError> for Failure {
    fn from(e: ProblemError) -> Self {
        Failure::Run(e.to_string())
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn run_one(
    method: MethodId,
    problem: ProblemId,
    mode: EstimatorMode,
    eta: u32,
    trace: Option<PathBuf>,
    format: TableFormat,
) -> Result<(), Failure> {
    if eta == 0 {
        return Err(Failure::Usage("eta must be positive".into()));
    }
    let report = driver::run(method, problem, mode, eta, &PrecisionPolicy::default())?;
    if let Some(path) = trace {
        write(&path, &report.to_json())?;
    }
    let stop = report.stop_reason;
    print!("{}", emit_table(&GridReport::from_run(report), format)?);
    if !stop.is_success() {
        return Err(Failure::Run(format!(
            "{method}/{problem} stopped with {stop:?}"
        )));
    }
    Ok(())
}

fn grid(
    config: Option<PathBuf>,
    eta: Option<u32>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    format: Option<TableFormat>,
    traces: bool,
) -> Result<(), Failure> {
    let mut config = match config {
        Some(path) => GridConfig::load(&path)?,
        None => GridConfig::default(),
    };
    if let Some(eta) = eta {
        config.eta = eta;
    }
    if let Some(out) = out {
        config.output_dir = out;
    }
    if let Some(jobs) = jobs {
        config.parallelism = jobs;
    }
    if let Some(format) = format {
        config.format = format;
    }
    config.validate()?;

    let report = run_grid(&config)?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    let ext = config.format.extension();
    write(
        &dir.join(format!("table.{ext}")),
        &emit_table(&report, config.format)?,
    )?;
    let summary = emit_summary(&report, config.format)?;
    write(&dir.join(format!("summary.{ext}")), &summary)?;
    if traces {
        let trace_dir = dir.join("traces");
        fs::create_dir_all(&trace_dir)
            .map_err(|e| Failure::Usage(format!("{}: {e}", trace_dir.display())))?;
        for cell in &report.cells {
            for run in cell.runs.iter().filter_map(|r| r.report.as_ref()) {
                let name = format!("{}_{}_{}.json", run.method_id, run.problem_id, run.mode);
                write(&trace_dir.join(name), &run.to_json())?;
            }
        }
    }
    print!("{summary}");

    let failed: Vec<String> = report
        .cells
        .iter()
        .flat_map(|c| c.runs.iter().map(move |r| (c, r)))
        .filter(|(_, r)| !r.succeeded())
        .map(|(c, r)| format!("{}/{}/{}", c.method, c.problem, r.mode))
        .collect();
    if !failed.is_empty() {
        return Err(Failure::Run(format!(
            "unsuccessful runs: {}",
            failed.join(", ")
        )));
    }
    Ok(())
}

fn verify(models: Option<PathBuf>) -> Result<(), Failure> {
    let models: Vec<SyntheticModel> = match models {
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => default_models(),
    };
    let report = verify_propositions(&models)?;
    println!("{}", report.to_json());
    if !report.all_passed {
        return Err(Failure::Run("proposition checks failed".into()));
    }
    Ok(())
}

fn root(problem: ProblemId, digits: u32) -> Result<(), Failure> {
    if digits == 0 {
        return Err(Failure::Usage("digits must be positive".into()));
    }
    let root = problems::reference_root(&problems::problem(problem), digits)?;
    println!("{}", root.value_string());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            method,
            problem,
            mode,
            eta,
            trace,
            format,
        } => run_one(method, problem, mode, eta, trace, format),
        Command::Grid {
            config,
            eta,
            out,
            jobs,
            format,
            traces,
        } => grid(config, eta, out, jobs, format, traces),
        Command::Verify {
            suite: Suite::Propositions,
            models,
        } => verify(models),
        Command::Root { problem, digits } => root(problem, digits),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
