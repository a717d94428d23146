use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sketchlearn::bench::{emit_report, run_experiment, write_report, DatasetKind, ExperimentKind, ExperimentSpec, ReportFormat};
use sketchlearn::Strategy;

/// Run an ELM / sampled-SVD experiment sweep and write a CSV or JSON report.
#[derive(Debug, Parser)]
#[command(name = "sketchlearn", version)]
struct Cli {
    /// JSON experiment spec; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// sweepNodes | sweepRank | sweepSamples | compareSampling | optimizedCompare | sampledNorms
    #[arg(long)]
    experiment: Option<ExperimentKind>,
    /// mnist | cifar10 | synthetic
    #[arg(long)]
    dataset: Option<DatasetKind>,
    /// Defaults to $SKETCHLEARN_DATA_DIR.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<usize>>,
    /// norm | uniform, comma separated
    #[arg(long, value_delimiter = ',')]
    strategy: Option<Vec<Strategy>>,
    /// Comma-separated list, or `a..b` for the half-open range.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    subsample: Option<usize>,
    #[arg(long)]
    test_subsample: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("bad seed range: {e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("bad seed range: {e}"))?;
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|e| format!("bad seed '{t}': {e}")))
        .collect()
}

fn spec_from(cli: &Cli) -> Result<ExperimentSpec, String> {
    let mut spec = match &cli.config {
        Some(p) => ExperimentSpec::from_json_file(p).map_err(|e| e.to_string())?,
        None => ExperimentSpec::default(),
    };
    if let Some(v) = cli.experiment {
        spec.kind = v;
    }
    if let Some(v) = cli.dataset {
        spec.dataset = v;
    }
    if let Some(v) = &cli.data_dir {
        spec.data_dir = Some(v.clone());
    }
    if let Some(v) = &cli.m {
        spec.m = v.clone();
    }
    if let Some(v) = &cli.k {
        spec.k = v.clone();
    }
    if let Some(v) = &cli.p {
        spec.p = v.clone();
    }
    if let Some(v) = &cli.strategy {
        spec.strategies = v.clone();
    }
    if let Some(v) = &cli.seeds {
        spec.seeds = parse_seeds(v)?;
    }
    if cli.subsample.is_some() {
        spec.subsample = cli.subsample;
    }
    if cli.test_subsample.is_some() {
        spec.test_subsample = cli.test_subsample;
    }
    if let Some(v) = cli.lr {
        spec.optimizer.learning_rate = v;
    }
    if let Some(v) = cli.epochs {
        spec.optimizer.epochs = v;
    }
    if cli.batch_size.is_some() {
        spec.optimizer.batch_size = cli.batch_size;
    }
    if let Some(v) = cli.jobs {
        spec.jobs = v;
    }
    Ok(spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = match spec_from(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_experiment(&spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let written = match &cli.out {
        Some(path) => emit_report(&report, cli.format, path),
        None => write_report(&report, cli.format, std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    for rec in report.records.iter().filter(|r| !r.succeeded()) {
        eprintln!(
            "point M={} K={} P={} {} seed={} failed: {}",
            rec.m,
            rec.k,
            rec.p,
            rec.strategy,
            rec.seed,
            rec.error.as_deref().unwrap_or("")
        );
    }
    if report.all_succeeded() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
