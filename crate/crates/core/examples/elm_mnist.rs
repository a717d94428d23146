//! ELM on MNIST trained through the exact and the sampled pseudo-inverse.
//!
//! Usage: `cargo run --release --example elm_mnist -- [DATA_DIR] [TRAIN_SUBSAMPLE]`
//! (`DATA_DIR` defaults to `$SKETCHLEARN_DATA_DIR`).

use std::time::Instant;

use sketchlearn::datasets::MnistFiles;
use sketchlearn::elm::{self, ModelFormat};
use sketchlearn::linalg::{svd_leading, truncated_pinv, DEFAULT_RCOND};
use sketchlearn::{modfkv, rng, SketchConfig, Strategy};

fn main() -> sketchlearn::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .or_else(|| std::env::var("SKETCHLEARN_DATA_DIR").ok())
        .unwrap_or_else(|| "data/mnist".into());
    let keep: Option<usize> = args.next().and_then(|s| s.parse().ok());

    let (train, test) = MnistFiles::locate(&dir)?.load()?;
    let train = keep.map_or(train.clone(), |n| train.subsample(n, 0));
    println!("train {} x {}, test {}", train.len(), train.dim(), test.len());

    let (m, k, p) = (1000, 10, 100);
    let fm = elm::init_features(train.dim(), m, &mut rng::stream(0, rng::streams::FEATURES))?;

    let t = Instant::now();
    let tree = elm::build_design(&fm, &train)?;
    println!("design + tree: {:.2}s", t.elapsed().as_secs_f64());

    let t = Instant::now();
    let sketch = modfkv(&tree, &SketchConfig::new(k, p, Strategy::Norm, 0))?;
    let model = elm::train(fm.clone(), &train, &truncated_pinv(&sketch, k, DEFAULT_RCOND)?)?;
    println!(
        "sampled (K={k}, P={p}): accuracy {:.4}, {:.2}s",
        model.accuracy(&test)?,
        t.elapsed().as_secs_f64()
    );

    let t = Instant::now();
    let svd = svd_leading(tree.matrix(), k)?;
    let exact = elm::train(fm, &train, &truncated_pinv(&svd, k, DEFAULT_RCOND)?)?;
    println!(
        "exact rank-{k}: accuracy {:.4}, {:.2}s",
        exact.accuracy(&test)?,
        t.elapsed().as_secs_f64()
    );

    let path = std::env::temp_dir().join("elm_mnist.elm");
    exact.save(&path, ModelFormat::Binary)?;
    let back = elm::ElmModel::load(&path, ModelFormat::Binary)?;
    println!("saved to {}; reload agrees: {}", path.display(), back == exact);
    Ok(())
}
