//! Train once, run gradient descent on the feature weights with the output
//! weights frozen, then retrain on the new design matrix.
//!
//! Usage: `cargo run --release --example optimize_features -- [DATA_DIR] [LR]`

use sketchlearn::datasets::MnistFiles;
use sketchlearn::elm::{self, OptimizerConfig};
use sketchlearn::linalg::{truncated_pinv, DEFAULT_RCOND};
use sketchlearn::{modfkv, rng, SketchConfig, Strategy};

fn col_norm_cv(x: &sketchlearn::DenseMatrix) -> f64 {
    let n: Vec<f64> = x.col_norms_sq().iter().map(|v| v.sqrt()).collect();
    let mean = n.iter().sum::<f64>() / n.len() as f64;
    let var = n.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n.len() as f64;
    var.sqrt() / mean
}

fn main() -> sketchlearn::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .or_else(|| std::env::var("SKETCHLEARN_DATA_DIR").ok())
        .unwrap_or_else(|| "data/mnist".into());
    let lr: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.1);

    let (train, test) = MnistFiles::locate(&dir)?.load()?;
    let train = train.subsample(5000, 0);
    let (m, k, p, seed) = (1000, 10, 100, 0);

    let fit = |fm: elm::FeatureMap, salt: u64| -> sketchlearn::Result<(elm::ElmModel, f64)> {
        let tree = elm::build_design(&fm, &train)?;
        let cv = col_norm_cv(tree.matrix());
        let f = modfkv(&tree, &SketchConfig::new(k, p, Strategy::Norm, seed ^ salt))?;
        Ok((elm::train(fm, &train, &truncated_pinv(&f, k, DEFAULT_RCOND)?)?, cv))
    };

    let fm = elm::init_features(train.dim(), m, &mut rng::stream(seed, rng::streams::FEATURES))?;
    let (model, cv) = fit(fm, 0)?;
    println!("before: accuracy {:.4}, column-norm cv {cv:.3}", model.accuracy(&test)?);

    let opt = OptimizerConfig {
        learning_rate: lr,
        ..Default::default()
    };
    let trace = elm::optimize_features_traced(&model, &train, &opt, &mut rng::stream(seed, rng::streams::OPTIMIZER))?;
    println!(
        "loss {:.1} -> {:.1} over {} accepted epochs ({} rolled back, final lr {})",
        trace.losses[0],
        trace.losses.last().unwrap(),
        trace.losses.len() - 1,
        trace.rejected,
        trace.final_learning_rate
    );

    let (model, cv) = fit(trace.features, 0x5eed)?;
    println!("after:  accuracy {:.4}, column-norm cv {cv:.3}", model.accuracy(&test)?);
    Ok(())
}
