//! `wedge-bl` command-line driver.
//!
//! Exit codes: 0 pass, 2 invalid configuration or usage, 3 solver failure,
//! 4 verification failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wedge_bl::pipeline::{parse_stages, run_pipeline, verify_artifacts, write_text, PipelineError, Stage};
use wedge_bl::scenario::Scenario;
use wedge_bl::sweep::{sweep, sweep_table};

#[derive(Parser, Debug)]
#[command(name = "wedge-bl", version, about = "Boundary layer near a wedge or cone tip")]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV artifacts and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Comma-separated stages to run; dependencies are added.
    #[arg(long, global = true)]
    stages: Option<String>,
    /// Treat warnings as failures.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Self-similar profile only.
    Similarity,
    /// Tip profile in Crocco variables.
    Profile,
    /// March the Crocco-plane equation.
    March,
    /// Physical velocities.
    Reconstruct,
    /// Full pipeline and every check.
    Verify {
        /// Check the artifacts already in `--out` instead of recomputing.
        #[arg(long)]
        from_artifacts: bool,
    },
    /// Verify over a grid of `m` values and perturbation scales.
    Sweep {
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        m: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        scales: Vec<f64>,
    },
}

fn load(path: Option<&Path>) -> Result<Scenario, PipelineError> {
    let path = path.ok_or_else(|| PipelineError::Usage("--config is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| PipelineError::Usage(format!("{}: {e}", path.display())))?;
    Ok(Scenario::parse(&text)?)
}

fn run(cli: &Cli) -> Result<i32, PipelineError> {
    let scenario = load(cli.config.as_deref())?;
    let last = match &cli.command {
        Command::Similarity => Stage::Similarity,
        Command::Profile => Stage::Profile,
        Command::March => Stage::March,
        Command::Reconstruct => Stage::Reconstruct,
        Command::Verify { from_artifacts: true } => {
            let report = verify_artifacts(&scenario, &cli.out)?;
            write_text(&cli.out.join("report.csv"), &report.to_csv())?;
            print!("{}", report.summary(cli.strict));
            return Ok(if report.passed(cli.strict) { 0 } else { 4 });
        }
        Command::Verify { .. } => Stage::Verify,
        Command::Sweep { m, scales } => {
            let cells = sweep(&scenario, m, scales, &cli.out)?;
            let table = sweep_table(&cells, cli.strict);
            write_text(&cli.out.join("sweep.csv"), &table)?;
            print!("{table}");
            if cells.iter().any(|c| c.outcome.is_err()) {
                return Ok(3);
            }
            return Ok(if cells.iter().all(|c| c.passed(cli.strict)) { 0 } else { 4 });
        }
    };
    let stages = match &cli.stages {
        Some(list) => parse_stages(list)?,
        None => last.through(),
    };
    let summary = run_pipeline(&scenario, &stages, &cli.out)?;
    if let Some(report) = &summary.artifacts.report {
        print!("{}", report.summary(cli.strict));
    }
    if let Some(msg) = &summary.failure {
        eprintln!("error: {msg}");
    }
    let stage_names: Vec<&str> = summary.stages.iter().map(|s| s.as_str()).collect();
    println!(
        "stages: {}; attained X: {}; artifacts in {}",
        stage_names.join(","),
        summary
            .attained_extent()
            .map_or_else(|| "n/a".to_string(), |x| x.to_string()),
        cli.out.display()
    );
    Ok(summary.exit_code(cli.strict))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
