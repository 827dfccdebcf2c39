use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use super::matrix::{dot, norm, CMatrix};
use crate::error::{Error, Result};

/// Thin singular value decomposition `A V = U diag(s)`, singular values descending.
///
/// `u` columns belonging to zero singular values are zero vectors.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

/// One-sided (Hestenes) Jacobi on the columns of `a`.
pub fn svd(a: &CMatrix) -> Result<Svd> {
    let m = a.rows();
    let n = a.cols();
    let mut w = a.clone();
    let mut v = CMatrix::identity(n);
    let eps = 1e-14;
    // pairs coupled below this are rounding noise relative to ‖A‖
    let floor = (eps * a.frobenius_norm()).powi(2);
    let mut converged = n < 2;
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::new(0.0, 0.0);
                for k in 0..m {
                    let wp = w[(k, p)];
                    let wq = w[(k, q)];
                    alpha += wp.norm_sqr();
                    beta += wq.norm_sqr();
                    gamma += wp.conj() * wq;
                }
                let g = gamma.norm();
                if g <= floor || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let em = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // column q is first rotated by e^{-iφ} so the pair inner product is real
                for k in 0..m {
                    let wp = w[(k, p)];
                    let wq = w[(k, q)] * em;
                    w[(k, p)] = wp * c - wq * s;
                    w[(k, q)] = wp * s + wq * c;
                }
                for k in 0..n {
                    let vp = v[(k, p)];
                    let vq = v[(k, q)] * em;
                    v[(k, p)] = vp * c - vq * s;
                    v[(k, q)] = vp * s + vq * c;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "Jacobi SVD" });
    }
    let mut s: Vec<f64> = (0..n).map(|j| norm(&w.column(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).unwrap_or(core::cmp::Ordering::Equal));
    let mut u = CMatrix::zeros(m, n);
    let mut vs = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let sv = s[src];
        let col = w.column(src);
        if sv > 0.0 {
            let ucol: Vec<C64> = col.iter().map(|&z| z / sv).collect();
            u.set_column(dst, &ucol);
        }
        vs.set_column(dst, &v.column(src));
    }
    s = order.iter().map(|&i| s[i]).collect();
    Ok(Svd { u, s, v: vs })
}

/// Numerical rank with `rank_tol` relative to the largest singular value.
pub fn rank_of(s: &[f64], rank_tol: f64) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rank_tol * smax).count()
}

/// Rank with the threshold taken relative to `scale` instead of the largest singular value.
pub fn rank_of_scaled(s: &[f64], rank_tol: f64, scale: f64) -> usize {
    let scale = scale.max(s.first().copied().unwrap_or(0.0));
    if scale == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rank_tol * scale).count()
}

/// `rank_ambiguous` against an external scale.
pub fn rank_ambiguous_scaled(s: &[f64], rank_tol: f64, band: f64, scale: f64) -> bool {
    let scale = scale.max(s.first().copied().unwrap_or(0.0));
    if scale == 0.0 {
        return false;
    }
    s.iter().any(|&x| {
        let r = x / scale;
        r > rank_tol / band && r < rank_tol * band
    })
}

/// True when some singular value sits within a factor `band` of the rank threshold.
pub fn rank_ambiguous(s: &[f64], rank_tol: f64, band: f64) -> bool {
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return false;
    }
    s.iter().any(|&x| {
        let r = x / smax;
        r > rank_tol / band && r < rank_tol * band
    })
}

/// Orthonormal basis of the null space, as columns.
pub fn null_space(a: &CMatrix, rank_tol: f64) -> Result<Vec<Vec<C64>>> {
    let d = svd(a)?;
    let r = rank_of(&d.s, rank_tol);
    Ok((r..a.cols()).map(|j| d.v.column(j)).collect())
}

/// Orthonormal basis of the column space.
pub fn range_basis(a: &CMatrix, rank_tol: f64) -> Result<Vec<Vec<C64>>> {
    let d = svd(a)?;
    let r = rank_of(&d.s, rank_tol);
    Ok((0..r).map(|j| d.u.column(j)).collect())
}

/// Minimum-norm least-squares solution of `A x = b`.
pub fn lstsq_min_norm(a: &CMatrix, b: &[C64], rank_tol: f64) -> Result<Vec<C64>> {
    let d = svd(a)?;
    let r = rank_of(&d.s, rank_tol);
    let n = a.cols();
    let mut x = vec![C64::new(0.0, 0.0); n];
    for j in 0..r {
        let coef = dot(&d.u.column(j), b) / d.s[j];
        for i in 0..n {
            x[i] += d.v[(i, j)] * coef;
        }
    }
    Ok(x)
}

/// Orthonormalize a set of vectors (rank decided by `rank_tol`).
pub fn orthonormalize(n: usize, vectors: &[Vec<C64>], rank_tol: f64) -> Result<Vec<Vec<C64>>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    range_basis(&CMatrix::from_columns(n, vectors), rank_tol)
}

/// Sine of the largest principal angle between two subspaces given by orthonormal bases.
/// Subspaces of different dimension are at angle π/2.
pub fn max_principal_sine(a: &[Vec<C64>], b: &[Vec<C64>]) -> Result<f64> {
    if a.len() != b.len() {
        return Ok(1.0);
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let n = a[0].len();
    // residual of projecting each column of A onto span B
    let mut resid = Vec::with_capacity(a.len());
    for x in a {
        let mut r = x.clone();
        for y in b {
            let c = dot(y, x);
            for i in 0..n {
                r[i] -= c * y[i];
            }
        }
        resid.push(r);
    }
    let d = svd(&CMatrix::from_columns(n, &resid))?;
    Ok(d.s.first().copied().unwrap_or(0.0).min(1.0))
}

/// Largest principal angle in radians.
pub fn max_principal_angle(a: &[Vec<C64>], b: &[Vec<C64>]) -> Result<f64> {
    Ok(max_principal_sine(a, b)?.asin())
}
