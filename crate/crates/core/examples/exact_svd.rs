//! Exact SVD of a planted low-rank matrix and a look at its residuals.

use sketchlearn::datasets::synth_lowrank;
use sketchlearn::linalg::svd_dense;
use sketchlearn::rng;

fn main() -> sketchlearn::Result<()> {
    let mut r = rng::stream(7, rng::streams::SYNTH);
    let x = synth_lowrank(60, 40, 5, 1e-3, &mut r)?;
    let svd = svd_dense(&x)?;

    println!("leading singular values:");
    for (i, s) in svd.sigma.iter().take(8).enumerate() {
        println!("  sigma_{i} = {s:.6}");
    }
    let resid = svd.reconstruct().sub(&x)?.frobenius_norm() / x.frobenius_norm();
    let utu = svd.u.t_matmul(&svd.u)?;
    let ortho = utu.sub(&sketchlearn::DenseMatrix::identity(utu.rows()))?.max_abs();
    println!("relative reconstruction residual {resid:.2e}");
    println!("max |UᵀU - I| = {ortho:.2e}");
    Ok(())
}
