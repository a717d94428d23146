//! Exact SVD by one-sided (Hestenes) Jacobi.
//!
//! Wide inputs are transposed so the rotations always act on the smaller
//! dimension. Tall inputs are first reduced by a blocked Householder QR,
//! `A = QR`, so the Jacobi sweeps only touch the `n x n` factor; the left
//! vectors are mapped back through `Q` afterwards.

use crate::error::{Error, Result};
use crate::linalg::matrix::{axpy, dot, DenseMatrix};

/// Rotation threshold: a pair is considered orthogonal once
/// `|<a_p, a_q>| <= tol * |a_p| |a_q|`.
pub const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 80;
const QR_BLOCK: usize = 32;

/// Thin SVD `A = U diag(sigma) Vᵀ` with `r = min(m, n)` triplets.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdResult {
    pub fn rank_len(&self) -> usize {
        self.sigma.len()
    }

    /// `U diag(sigma) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (x, s) in us.row_mut(i).iter_mut().zip(&self.sigma) {
                *x *= s;
            }
        }
        us.matmul(&self.v.transpose()).expect("consistent SVD shapes")
    }
}

pub fn svd_dense(a: &DenseMatrix) -> Result<SvdResult> {
    if a.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if !a.all_finite() {
        return Err(Error::NonFinite);
    }
    let r = a.rows().min(a.cols());
    svd_leading(a, r)
}

/// The `k` leading singular triplets of `a`. Same numbers as [`svd_dense`],
/// but only `k` left vectors are pushed back through the QR factor, which
/// dominates the cost for tall inputs.
pub fn svd_leading(a: &DenseMatrix, k: usize) -> Result<SvdResult> {
    if a.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if !a.all_finite() {
        return Err(Error::NonFinite);
    }
    let k = k.clamp(1, a.rows().min(a.cols()));
    if a.rows() < a.cols() {
        let t = svd_tall(&a.transpose(), k)?;
        return Ok(SvdResult {
            u: t.v.leading_columns(k),
            sigma: t.sigma[..k].to_vec(),
            v: t.u,
        });
    }
    let t = svd_tall(a, k)?;
    Ok(SvdResult {
        u: t.u,
        sigma: t.sigma[..k].to_vec(),
        v: t.v.leading_columns(k),
    })
}

/// `m >= n`; `u` gets only the first `keep` columns.
fn svd_tall(a: &DenseMatrix, keep: usize) -> Result<SvdResult> {
    let (m, n) = a.shape();
    if m == n {
        // columns of A are the rows of Aᵀ
        let (sigma, u_cols, v_cols) = jacobi(a.transpose())?;
        return Ok(SvdResult {
            u: u_cols.transpose().leading_columns(keep),
            sigma,
            v: v_cols.transpose(),
        });
    }

    let mut qr = a.clone();
    let taus = householder_qr(&mut qr);
    let mut r = DenseMatrix::zeros(n, n);
    for i in 0..n {
        r.row_mut(i)[i..].copy_from_slice(&qr.row(i)[i..]);
    }
    let (sigma, u_cols, v_cols) = jacobi(r.transpose())?;

    // U = Q [U_r; 0]
    let mut u = DenseMatrix::zeros(m, keep);
    for (j, col) in (0..keep).map(|j| (j, u_cols.row(j))) {
        for (i, &x) in col.iter().enumerate() {
            u.set(i, j, x);
        }
    }
    apply_q(&qr, &taus, &mut u);

    Ok(SvdResult {
        u,
        sigma,
        v: v_cols.transpose(),
    })
}

/// Orthogonalizes the rows of `work` (the columns of the matrix being
/// decomposed). Returns sorted singular values together with the left and
/// right singular vectors stored as rows.
fn jacobi(mut work: DenseMatrix) -> Result<(Vec<f64>, DenseMatrix, DenseMatrix)> {
    let (n, len) = work.shape();
    let mut vt = DenseMatrix::identity(n);
    // columns below this squared norm are numerically zero and never rotated
    let fro = dot(work.as_slice(), work.as_slice()).sqrt();
    let floor = (fro * f64::EPSILON * len as f64).powi(2);

    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        converged = true;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (wp, wq) = (work.row(p), work.row(q));
                    gram3(wp, wq)
                };
                if gamma == 0.0
                    || alpha <= floor
                    || beta <= floor
                    || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt()
                {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut work, p, q, c, s);
                rotate_rows(&mut vt, p, q, c, s);
            }
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| dot(work.row(j), work.row(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal values keep their index order
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let sigma_max = norms[order[0]];
    let negligible = sigma_max * f64::EPSILON * len as f64;
    let mut sigma = Vec::with_capacity(n);
    let mut u_rows = DenseMatrix::zeros(n, len);
    let mut v_rows = DenseMatrix::zeros(n, n);
    let mut null_slots = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        v_rows.row_mut(k).copy_from_slice(vt.row(j));
        if s > negligible && s > 0.0 {
            let inv = 1.0 / s;
            for (dst, &x) in u_rows.row_mut(k).iter_mut().zip(work.row(j)) {
                *dst = x * inv;
            }
        } else {
            null_slots.push(k);
        }
    }
    complete_orthonormal(&mut u_rows, &null_slots);
    Ok((sigma, u_rows, v_rows))
}

#[inline]
fn gram3(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let (mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        aa += x * x;
        bb += y * y;
        ab += x * y;
    }
    (aa, bb, ab)
}

fn rotate_rows(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    debug_assert!(p < q);
    let cols = m.cols();
    let (head, tail) = m.as_mut_slice().split_at_mut(q * cols);
    let rp = &mut head[p * cols..(p + 1) * cols];
    let rq = &mut tail[..cols];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Fills the listed rows with unit vectors orthogonal to every other row.
fn complete_orthonormal(rows: &mut DenseMatrix, slots: &[usize]) {
    if slots.is_empty() {
        return;
    }
    let (n, len) = rows.shape();
    let mut filled: Vec<bool> = vec![true; n];
    for &s in slots {
        filled[s] = false;
    }
    let mut basis = 0;
    for &slot in slots {
        loop {
            assert!(basis < len, "ran out of basis vectors while completing U");
            let mut cand = vec![0.0; len];
            cand[basis] = 1.0;
            basis += 1;
            // two passes of Gram-Schmidt for stability
            for _ in 0..2 {
                for k in (0..n).filter(|&k| filled[k]) {
                    let proj = dot(&cand, rows.row(k));
                    axpy(-proj, rows.row(k), &mut cand);
                }
            }
            let nrm = dot(&cand, &cand).sqrt();
            if nrm > 1e-6 {
                for (dst, x) in rows.row_mut(slot).iter_mut().zip(&cand) {
                    *dst = x / nrm;
                }
                filled[slot] = true;
                break;
            }
        }
    }
}

/// Blocked Householder QR in place. On return the upper triangle holds `R`
/// and the strict lower triangle holds the reflector tails (unit diagonal
/// implied). Returns the reflector scalars `tau`.
fn householder_qr(a: &mut DenseMatrix) -> Vec<f64> {
    let (m, n) = a.shape();
    let mut taus = vec![0.0; n];
    let mut k0 = 0;
    while k0 < n {
        let nb = QR_BLOCK.min(n - k0);
        let plen = m - k0;
        // panel copied to column-major for contiguous reflector work
        let mut panel = vec![0.0; nb * plen];
        for r in 0..plen {
            let row = &a.row(k0 + r)[k0..k0 + nb];
            for (j, &x) in row.iter().enumerate() {
                panel[j * plen + r] = x;
            }
        }
        for j in 0..nb {
            let (done, rest) = panel.split_at_mut((j + 1) * plen);
            let col = &mut done[j * plen..];
            let tau = make_reflector(&mut col[j..]);
            taus[k0 + j] = tau;
            if tau != 0.0 {
                let v = &col[j..];
                for jj in 0..nb - j - 1 {
                    let other = &mut rest[jj * plen + j..(jj + 1) * plen];
                    let w = reflector_dot(v, other);
                    reflector_axpy(-tau * w, v, other);
                }
            }
        }
        for r in 0..plen {
            let row = &mut a.row_mut(k0 + r)[k0..k0 + nb];
            for (j, x) in row.iter_mut().enumerate() {
                *x = panel[j * plen + r];
            }
        }

        if k0 + nb < n {
            let v = explicit_reflectors(a, k0, nb);
            let t = block_t(&v, nb, &taus[k0..k0 + nb]);
            let stride = a.cols();
            let trailing = &mut a.as_mut_slice()[k0 * stride..];
            // Qᵀ acts on the trailing columns: Hᵀ = I - V Tᵀ Vᵀ
            apply_block(&v, nb, &t, true, trailing, stride, k0 + nb, n);
        }
        k0 += nb;
    }
    taus
}

/// Reflector `H = I - tau v vᵀ` with `v[0] = 1` sending `x` to `beta e1`.
/// `x` is overwritten by `beta` followed by `v[1..]`.
fn make_reflector(x: &mut [f64]) -> f64 {
    let alpha = x[0];
    let tail_sq: f64 = x[1..].iter().map(|v| v * v).sum();
    if tail_sq == 0.0 {
        return 0.0;
    }
    let nrm = (alpha * alpha + tail_sq).sqrt();
    let beta = if alpha >= 0.0 { -nrm } else { nrm };
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for v in &mut x[1..] {
        *v *= scale;
    }
    x[0] = beta;
    tau
}

/// `vᵀ y` with the implicit unit leading entry of `v`.
#[inline]
fn reflector_dot(v: &[f64], y: &[f64]) -> f64 {
    y[0] + dot(&v[1..], &y[1..])
}

#[inline]
fn reflector_axpy(alpha: f64, v: &[f64], y: &mut [f64]) {
    y[0] += alpha;
    axpy(alpha, &v[1..], &mut y[1..]);
}

/// Reflectors of block `k0..k0+nb` as a row-major `(m - k0) x nb` matrix
/// with explicit unit diagonal and zeros above it.
fn explicit_reflectors(qr: &DenseMatrix, k0: usize, nb: usize) -> Vec<f64> {
    let plen = qr.rows() - k0;
    let mut v = vec![0.0; plen * nb];
    for r in 0..plen {
        let src = &qr.row(k0 + r)[k0..k0 + nb];
        let dst = &mut v[r * nb..(r + 1) * nb];
        for j in 0..nb {
            dst[j] = match r.cmp(&j) {
                std::cmp::Ordering::Less => 0.0,
                std::cmp::Ordering::Equal => 1.0,
                std::cmp::Ordering::Greater => src[j],
            };
        }
    }
    v
}

/// Upper-triangular `T` of the compact WY form `H1..Hk = I - V T Vᵀ`.
fn block_t(v: &[f64], nb: usize, taus: &[f64]) -> Vec<f64> {
    // Vᵀ V restricted to what the recurrence needs
    let plen = v.len() / nb;
    let mut vtv = vec![0.0; nb * nb];
    for r in 0..plen {
        let row = &v[r * nb..(r + 1) * nb];
        for i in 0..nb {
            if row[i] == 0.0 {
                continue;
            }
            for j in i + 1..nb {
                vtv[i * nb + j] += row[i] * row[j];
            }
        }
    }
    let mut t = vec![0.0; nb * nb];
    for j in 0..nb {
        t[j * nb + j] = taus[j];
        // T[0..j, j] = -tau_j T[0..j, 0..j] (V[:, 0..j]ᵀ v_j)
        for i in 0..j {
            let mut s = 0.0;
            for l in i..j {
                s += t[i * nb + l] * vtv[l * nb + j];
            }
            t[i * nb + j] = -taus[j] * s;
        }
    }
    t
}

/// `C = op(H) C` on columns `c0..c1` of the row-major block `c` (row stride
/// `stride`, same row count as `v`). `transpose` selects `Hᵀ = I - V Tᵀ Vᵀ`
/// instead of `H = I - V T Vᵀ`.
#[allow(clippy::too_many_arguments)]
fn apply_block(
    v: &[f64],
    nb: usize,
    t: &[f64],
    transpose: bool,
    c: &mut [f64],
    stride: usize,
    c0: usize,
    c1: usize,
) {
    let plen = v.len() / nb;
    let width = c1 - c0;
    // W = Vᵀ C
    let mut w = vec![0.0; nb * width];
    for r in 0..plen {
        let vrow = &v[r * nb..(r + 1) * nb];
        let crow = &c[r * stride + c0..r * stride + c1];
        for (j, &vj) in vrow.iter().enumerate() {
            if vj != 0.0 {
                axpy(vj, crow, &mut w[j * width..(j + 1) * width]);
            }
        }
    }
    // W = op(T) W
    let mut tw = vec![0.0; nb * width];
    for i in 0..nb {
        let out = &mut tw[i * width..(i + 1) * width];
        for l in 0..nb {
            let coef = if transpose { t[l * nb + i] } else { t[i * nb + l] };
            if coef != 0.0 {
                axpy(coef, &w[l * width..(l + 1) * width], out);
            }
        }
    }
    // C -= V W
    for r in 0..plen {
        let vrow = &v[r * nb..(r + 1) * nb];
        let crow = &mut c[r * stride + c0..r * stride + c1];
        for (j, &vj) in vrow.iter().enumerate() {
            if vj != 0.0 {
                axpy(-vj, &tw[j * width..(j + 1) * width], crow);
            }
        }
    }
}

/// `target = Q target`, with `Q` held in `qr` as produced by
/// [`householder_qr`].
fn apply_q(qr: &DenseMatrix, taus: &[f64], target: &mut DenseMatrix) {
    let n = qr.cols();
    let width = target.cols();
    let starts: Vec<usize> = (0..n).step_by(QR_BLOCK).collect();
    for &k0 in starts.iter().rev() {
        let nb = QR_BLOCK.min(n - k0);
        let v = explicit_reflectors(qr, k0, nb);
        let t = block_t(&v, nb, &taus[k0..k0 + nb]);
        let rows = &mut target.as_mut_slice()[k0 * width..];
        apply_block(&v, nb, &t, false, rows, width, 0, width);
    }
}
