//! Norm-weighted vs uniform sampling on un-optimized MNIST features,
//! driven through the experiment runner.
//!
//! Usage: `cargo run --release --example compare_sampling -- [DATA_DIR] [SEEDS]`

use sketchlearn::bench::{run_experiment, write_report, DatasetKind, ExperimentKind, ExperimentSpec, Method, ReportFormat};
use sketchlearn::Strategy;

fn main() -> sketchlearn::Result<()> {
    let mut args = std::env::args().skip(1);
    let data_dir = args.next().map(Into::into);
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);

    let spec = ExperimentSpec {
        kind: ExperimentKind::CompareSampling,
        dataset: DatasetKind::Mnist,
        data_dir,
        seeds: (0..seeds).collect(),
        ..Default::default()
    };
    let report = run_experiment(&spec)?;
    write_report(&report, ReportFormat::Csv, std::io::stdout().lock())?;

    for s in [Strategy::Norm, Strategy::Uniform] {
        let mean = report.mean_accuracy(|r| r.strategy == Method::Sampled(s));
        println!("{s:?}: mean accuracy {:.4}", mean.unwrap_or(f64::NAN));
    }
    Ok(())
}
