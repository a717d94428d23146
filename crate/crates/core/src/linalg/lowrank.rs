use crate::error::{Error, Result};
use crate::linalg::matrix::{axpy, DenseMatrix};
use crate::linalg::svd::SvdResult;

/// Default relative singular-value floor for pseudo-inverses.
pub const DEFAULT_RCOND: f64 = 1e-12;

/// Rank-`k` factors `Σ sigma_i u_i v_iᵀ`, mapping `R^n -> R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactors {
    sigma: Vec<f64>,
    u: DenseMatrix,
    v: DenseMatrix,
    /// Rank originally requested when fewer usable triplets were available.
    pub reduced_from: Option<usize>,
}

/// Anything exposing ordered singular triplets.
pub trait SingularTriplets {
    fn sigma(&self) -> &[f64];
    fn left(&self) -> &DenseMatrix;
    fn right(&self) -> &DenseMatrix;
}

impl SingularTriplets for SvdResult {
    fn sigma(&self) -> &[f64] {
        &self.sigma
    }
    fn left(&self) -> &DenseMatrix {
        &self.u
    }
    fn right(&self) -> &DenseMatrix {
        &self.v
    }
}

impl SingularTriplets for LowRankFactors {
    fn sigma(&self) -> &[f64] {
        &self.sigma
    }
    fn left(&self) -> &DenseMatrix {
        &self.u
    }
    fn right(&self) -> &DenseMatrix {
        &self.v
    }
}

impl LowRankFactors {
    pub fn new(sigma: Vec<f64>, u: DenseMatrix, v: DenseMatrix) -> Result<Self> {
        let k = sigma.len();
        if k == 0 {
            return Err(Error::InvalidParameter("factor rank must be >= 1".into()));
        }
        if u.cols() != k || v.cols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: if u.cols() != k { u.cols() } else { v.cols() },
            });
        }
        if sigma.iter().any(|s| !s.is_finite() || *s <= 0.0) || !u.all_finite() || !v.all_finite()
        {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            sigma,
            u,
            v,
            reduced_from: None,
        })
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    /// Output dimension (rows of the represented matrix).
    pub fn out_dim(&self) -> usize {
        self.u.rows()
    }

    /// Input dimension (columns of the represented matrix).
    pub fn in_dim(&self) -> usize {
        self.v.rows()
    }

    /// Dense `U diag(sigma) Vᵀ`.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (x, s) in us.row_mut(i).iter_mut().zip(&self.sigma) {
                *x *= s;
            }
        }
        us.matmul(&self.v.transpose()).expect("factor shapes agree")
    }
}

/// Top-`k` exact triplets of an SVD as factors (no inversion).
pub fn truncate(svd: &SvdResult, k: usize) -> Result<LowRankFactors> {
    if k == 0 {
        return Err(Error::InvalidParameter("rank must be >= 1".into()));
    }
    let keep = k.min(svd.sigma.iter().take_while(|s| **s > 0.0).count());
    if keep == 0 {
        return Err(Error::AllSingularValuesFiltered);
    }
    LowRankFactors::new(
        svd.sigma[..keep].to_vec(),
        svd.u.leading_columns(keep),
        svd.v.leading_columns(keep),
    )
}

/// `Σ_{i<=K'} (1/sigma_i) v_i u_iᵀ` with `K' = min(k, #{sigma_i > rcond sigma_1})`.
///
/// The result maps the codomain of the input back to its domain, so the
/// roles of `U` and `V` are swapped.
pub fn truncated_pinv<F: SingularTriplets + ?Sized>(
    f: &F,
    k: usize,
    rcond: f64,
) -> Result<LowRankFactors> {
    if k == 0 {
        return Err(Error::InvalidParameter("rank must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&rcond) {
        return Err(Error::InvalidParameter(format!(
            "rcond {rcond} outside [0, 1)"
        )));
    }
    let sigma = f.sigma();
    let s1 = sigma.first().copied().unwrap_or(0.0);
    let floor = rcond * s1;
    let keep = sigma
        .iter()
        .take(k)
        .take_while(|&&s| s > floor && s > 0.0)
        .count();
    if keep == 0 {
        return Err(Error::AllSingularValuesFiltered);
    }
    let inv: Vec<f64> = sigma[..keep].iter().map(|s| 1.0 / s).collect();
    LowRankFactors::new(
        inv,
        f.right().leading_columns(keep),
        f.left().leading_columns(keep),
    )
}

/// `Σ sigma_i u_i (v_iᵀ y)` without materializing the matrix.
pub fn apply_factors(f: &LowRankFactors, y: &[f64]) -> Result<Vec<f64>> {
    let coeffs = f.v.t_matvec(y)?;
    let mut out = vec![0.0; f.out_dim()];
    let k = f.rank();
    let mut scaled = vec![0.0; k];
    for (c, (x, s)) in scaled.iter_mut().zip(coeffs.iter().zip(&f.sigma)) {
        *c = x * s;
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = crate::linalg::matrix::dot(f.u.row(i), &scaled);
    }
    Ok(out)
}

/// Applies the factors to every column of `y` at once (`U diag(s) Vᵀ Y`).
pub fn apply_factors_matrix(f: &LowRankFactors, y: &DenseMatrix) -> Result<DenseMatrix> {
    let mut coeffs = f.v.t_matmul(y)?; // k x c
    for (i, s) in f.sigma.iter().enumerate() {
        for x in coeffs.row_mut(i) {
            *x *= s;
        }
    }
    let mut out = DenseMatrix::zeros(f.out_dim(), y.cols());
    for i in 0..f.out_dim() {
        let urow = f.u.row(i);
        let orow = out.row_mut(i);
        for (l, &ul) in urow.iter().enumerate() {
            axpy(ul, coeffs.row(l), orow);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svd::svd_dense;

    #[test]
    fn pinv_of_identity_rank2() {
        let svd = svd_dense(&DenseMatrix::identity(3)).unwrap();
        let p = truncated_pinv(&svd, 2, DEFAULT_RCOND).unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(p.sigma(), &[1.0, 1.0]);
    }

    #[test]
    fn tiny_singular_value_is_dropped() {
        let svd = SvdResult {
            u: DenseMatrix::identity(3),
            sigma: vec![4.0, 3.0, 1e-20],
            v: DenseMatrix::identity(3),
        };
        let p = truncated_pinv(&svd, 3, 1e-12).unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(p.sigma(), &[0.25, 1.0 / 3.0]);
    }

    #[test]
    fn all_filtered_is_an_error() {
        let svd = SvdResult {
            u: DenseMatrix::identity(2),
            sigma: vec![0.0, 0.0],
            v: DenseMatrix::identity(2),
        };
        assert!(matches!(
            truncated_pinv(&svd, 2, 0.0),
            Err(Error::AllSingularValuesFiltered)
        ));
        assert!(truncated_pinv(&svd, 0, 0.0).is_err());
        assert!(truncated_pinv(&svd, 1, 1.0).is_err());
    }

    #[test]
    fn apply_identity_and_rank_one() {
        let id = LowRankFactors::new(
            vec![1.0; 3],
            DenseMatrix::identity(3),
            DenseMatrix::identity(3),
        )
        .unwrap();
        assert_eq!(apply_factors(&id, &[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);

        let u = DenseMatrix::from_rows(&[[1.0], [0.0]]).unwrap();
        let v = DenseMatrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let f = LowRankFactors::new(vec![2.0], u, v).unwrap();
        assert_eq!(apply_factors(&f, &[0.0, 1.0]).unwrap(), vec![2.0, 0.0]);
        assert!(matches!(
            apply_factors(&f, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn factors_reject_nonpositive_sigma() {
        let r = LowRankFactors::new(vec![0.0], DenseMatrix::zeros(2, 1), DenseMatrix::zeros(2, 1));
        assert!(r.is_err());
    }
}
