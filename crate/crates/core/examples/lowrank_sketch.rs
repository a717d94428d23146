//! Sampled rank-K factors against the exact truncation on a planted
//! rank-5 matrix, for both sampling strategies.

use sketchlearn::datasets::synth_lowrank;
use sketchlearn::linalg::{svd_dense, truncate};
use sketchlearn::{modfkv, rng, SegTreeMatrix, SketchConfig, Strategy};

fn main() -> sketchlearn::Result<()> {
    let mut r = rng::stream(0, rng::streams::SYNTH);
    let x = synth_lowrank(100, 200, 5, 0.0, &mut r)?;
    let tree = SegTreeMatrix::build(&x)?;
    let rel = |approx: &sketchlearn::DenseMatrix| approx.sub(&x).unwrap().frobenius_norm() / x.frobenius_norm();

    let exact = truncate(&svd_dense(&x)?, 5)?;
    println!("exact rank-5 truncation: {:.2e}", rel(&exact.to_dense()));

    for strategy in [Strategy::Norm, Strategy::Uniform] {
        let errs: Vec<f64> = (0..10)
            .map(|seed| {
                let f = modfkv(&tree, &SketchConfig::new(5, 50, strategy, seed)).unwrap();
                rel(&f.to_dense())
            })
            .collect();
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        println!("{strategy:?} K=5 P=50: mean relative error {mean:.2e} over 10 seeds");
    }
    Ok(())
}
