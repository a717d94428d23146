//! Squared-norm sampling from a segment-tree matrix, before and after a
//! point update.

use sketchlearn::{rng, DenseMatrix, SegTreeMatrix};

fn histogram(t: &SegTreeMatrix, draws: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, 0);
    let mut counts = vec![0usize; t.rows()];
    for _ in 0..draws {
        counts[t.sample_row(&mut r).unwrap()] += 1;
    }
    counts.iter().map(|&c| c as f64 / draws as f64).collect()
}

fn main() -> sketchlearn::Result<()> {
    let x = DenseMatrix::from_rows(&[[1.0, 2.0, 0.0], [0.0, 0.0, 3.0], [1.0, 1.0, 1.0], [0.5, 0.0, 0.0]])?;
    let mut tree = SegTreeMatrix::build(&x)?;
    let draws = 200_000;

    let show = |tree: &SegTreeMatrix, label: &str| {
        let emp = histogram(tree, draws, 1);
        println!("{label}: ‖X‖² = {}", tree.fro_norm_sq());
        for (i, e) in emp.iter().enumerate() {
            let f = tree.row_norm_sq(i).unwrap() / tree.fro_norm_sq();
            println!("  row {i}: law {f:.4}  empirical {e:.4}");
        }
    };
    show(&tree, "initial");

    tree.update(3, 1, 4.0)?;
    show(&tree, "after X(3,1) = 4");

    let mut r = rng::stream(2, 0);
    let mut cols = [0usize; 3];
    for _ in 0..draws {
        cols[tree.sample_col_in_row(0, &mut r)?] += 1;
    }
    println!("columns of row 0 (law 1/5, 4/5, 0): {:?}", cols.map(|c| c as f64 / draws as f64));
    Ok(())
}
