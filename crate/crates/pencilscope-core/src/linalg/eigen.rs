use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use super::matrix::{fix_phase, CMatrix};
use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// Eigenvalues in ascending order with unit eigenvectors in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

pub fn hermitian_eigen(a: &CMatrix) -> Result<HermitianEigen> {
    hermitian_eigen_with(a, &Tolerances::default())
}

/// Cyclic complex Jacobi. Each eigenvector has its largest entry made real positive.
pub fn hermitian_eigen_with(a: &CMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { what: "hermitian_eigen needs a square matrix" });
    }
    let n = a.rows();
    let scale = a.frobenius_norm();
    let defect = a.hermitian_defect();
    if defect > tol.hermitian * scale {
        return Err(Error::NotHermitian { defect });
    }
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let threshold = tol.jacobi * scale;

    let mut converged = false;
    for _sweep in 0..tol.jacobi_max_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let g = apq.norm();
                if g == 0.0 || g <= 1e-300 {
                    continue;
                }
                rotate(&mut m, &mut v, p, q, apq, g);
            }
        }
    }
    if !converged {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() > threshold {
            return Err(Error::NoConvergence { what: "Jacobi eigensolver" });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).unwrap_or(core::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut col = v.column(i);
            fix_phase(&mut col);
            col
        })
        .collect();
    Ok(HermitianEigen { values, vectors })
}

// Annihilate m[p][q] with G = diag(1, e^{-iφ}) R, R a real Jacobi rotation.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, apq: C64, g: f64) {
    let n = m.rows();
    let phase = apq / g; // e^{iφ}
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let em = phase.conj(); // e^{-iφ}

    // columns: A <- A G
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * c - akq * em * s;
        m[(k, q)] = akp * s + akq * em * c;
    }
    // rows: A <- G* A
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = apk * c - aqk * phase * s;
        m[(q, k)] = apk * s + aqk * phase * c;
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * em * s;
        v[(k, q)] = vkp * s + vkq * em * c;
    }
}

/// Counts of eigenvalues above `zero_tol`, below `-zero_tol`, and in between.
pub fn inertia(a: &CMatrix, zero_tol: f64) -> Result<Inertia> {
    let e = hermitian_eigen(a)?;
    Ok(inertia_of_values(&e.values, zero_tol))
}

/// Inertia with the default zero band `inertia_zero * ‖A‖`.
pub fn inertia_default(a: &CMatrix) -> Result<Inertia> {
    let tol = Tolerances::default();
    inertia(a, tol.inertia_zero * a.frobenius_norm())
}

pub fn inertia_of_values(values: &[f64], zero_tol: f64) -> Inertia {
    let mut out = Inertia { n_plus: 0, n_minus: 0, n_zero: 0 };
    for &x in values {
        if x > zero_tol {
            out.n_plus += 1;
        } else if x < -zero_tol {
            out.n_minus += 1;
        } else {
            out.n_zero += 1;
        }
    }
    out
}
