//! Norms of the columns picked by each sampling strategy on optimized
//! features.
//!
//! Usage: `cargo run --release --example sampled_norms -- [DATA_DIR]`

use sketchlearn::bench::{run_experiment, DatasetKind, ExperimentKind, ExperimentSpec, Method};
use sketchlearn::elm::OptimizerConfig;
use sketchlearn::Strategy;

fn main() -> sketchlearn::Result<()> {
    let spec = ExperimentSpec {
        kind: ExperimentKind::SampledNorms,
        dataset: DatasetKind::Mnist,
        data_dir: std::env::args().nth(1).map(Into::into),
        subsample: Some(5000),
        seeds: vec![0, 1],
        optimizer: OptimizerConfig {
            learning_rate: 0.1,
            ..Default::default()
        },
        ..Default::default()
    };
    let report = run_experiment(&spec)?;
    for s in [Strategy::Norm, Strategy::Uniform] {
        let norms: Vec<f64> = report
            .records
            .iter()
            .filter(|r| r.strategy == Method::Sampled(s))
            .filter_map(|r| r.sampled_column_norms.clone())
            .flatten()
            .collect();
        let mean = norms.iter().sum::<f64>() / norms.len() as f64;
        let max = norms.iter().cloned().fold(0.0, f64::max);
        println!("{s:?}: {} sampled columns, mean norm {mean:.3}, max {max:.3}", norms.len());
    }
    Ok(())
}
