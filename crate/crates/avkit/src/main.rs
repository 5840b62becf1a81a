//! Trade-study CLI: run one case, run a full study, or re-render reports.

use avkit::harness::{
    aggregate_case, render_report, run_study, CaseConfig, HarnessError, ReportFormat, StudyReport,
    TradeStudyConfig, TrialOutput, TrialStats,
};
use avkit::metrics::TrialMetrics;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "avkit", about = "Trade-study runner for the AV toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Study configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output directory root.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "md")]
    format: ReportFormat,
    /// Worker threads (default: all cores). Results are identical at any
    /// worker count.
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the study's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single case from a study config (all trials).
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Case id to run.
        #[arg(long)]
        case: String,
    },
    /// Run the full study table.
    Study {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Re-render reports from previously written per-trial logs.
    Report {
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Per-trial metrics file, written next to the logs.
#[derive(Serialize, Deserialize)]
struct TrialMetricsFile {
    metrics: TrialMetrics,
    stats: TrialStats,
}

fn trial_dir(out: &Path, study: &str, case: &str, trial: usize) -> PathBuf {
    out.join(study).join(case).join(trial.to_string())
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), HarnessError> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    fs::write(path, buf)?;
    Ok(())
}

fn write_trial(
    out: &Path,
    study: &str,
    case: &CaseConfig,
    trial: usize,
    output: &TrialOutput,
) -> Result<(), HarnessError> {
    let dir = trial_dir(out, study, &case.id, trial);
    fs::create_dir_all(&dir)?;
    write_jsonl(&dir.join("truth.jsonl"), &output.truth_log)?;
    write_jsonl(&dir.join("detections.jsonl"), &output.detection_log)?;
    write_jsonl(&dir.join("tracks.jsonl"), &output.track_log)?;
    let file = TrialMetricsFile { metrics: output.metrics, stats: output.stats };
    fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

fn write_reports(
    out: &Path,
    report: &StudyReport,
    format: ReportFormat,
) -> Result<(), HarnessError> {
    let dir = out.join(&report.name);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("report.json"), render_report(report, ReportFormat::Json))?;
    match format {
        ReportFormat::Json => {}
        ReportFormat::Md => fs::write(dir.join("report.md"), render_report(report, format))?,
        ReportFormat::Csv => fs::write(dir.join("report.csv"), render_report(report, format))?,
    }
    print!("{}", render_report(report, format));
    std::io::stdout().flush()?;
    Ok(())
}

fn load_study(common: &CommonArgs) -> Result<TradeStudyConfig, HarnessError> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", common.config.display())))?;
    let mut study = TradeStudyConfig::from_json(&text)?;
    if let Some(seed) = common.seed {
        study.master_seed = seed;
    }
    Ok(study)
}

fn execute(study: &TradeStudyConfig, common: &CommonArgs) -> Result<(), HarnessError> {
    let report = run_study(study, |case, trial, output| {
        write_trial(&common.out, &study.name, case, trial, output)
    })?;
    write_reports(&common.out, &report, common.format)
}

fn rerender(study: &TradeStudyConfig, common: &CommonArgs) -> Result<(), HarnessError> {
    let mut cases = Vec::new();
    for case in &study.cases {
        let mut trials = Vec::new();
        for trial in 0..study.trials {
            let path =
                trial_dir(&common.out, &study.name, &case.id, trial).join("metrics.json");
            let text = fs::read_to_string(&path).map_err(|e| {
                HarnessError::Config(format!("missing trial log {}: {e}", path.display()))
            })?;
            let file: TrialMetricsFile = serde_json::from_str(&text)?;
            trials.push((file.metrics, file.stats));
        }
        cases.push(aggregate_case(&case.id, &trials));
    }
    let report = StudyReport { name: study.name.clone(), trials: study.trials, cases };
    write_reports(&common.out, &report, common.format)
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    let (common, single_case) = match &cli.command {
        Command::Run { common, case } => (common, Some(case.clone())),
        Command::Study { common } | Command::Report { common } => (common, None),
    };
    let mut study = load_study(common)?;
    if let Some(id) = single_case {
        let n = study.cases.len();
        study.cases.retain(|c| c.id == id);
        if study.cases.is_empty() {
            return Err(HarnessError::Config(format!(
                "case {id:?} not found among {n} cases in {}",
                common.config.display()
            )));
        }
    }
    let run = || match cli.command {
        Command::Report { ref common } => rerender(&study, common),
        Command::Run { ref common, .. } | Command::Study { ref common } => {
            execute(&study, common)
        }
    };
    match common.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| HarnessError::Config(format!("--jobs {jobs}: {e}")))?
            .install(run),
        None => run(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ HarnessError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
