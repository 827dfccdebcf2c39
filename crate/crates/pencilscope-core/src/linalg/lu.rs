use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// Partial-pivoting LU factorization `P A = L U`, packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Self {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let mut piv = k;
            let mut best = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 {
                singular = true;
                continue;
            }
            if piv != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = t;
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Lu { lu, perm, sign, singular }
    }

    pub fn det(&self) -> C64 {
        if self.singular {
            return C64::new(0.0, 0.0);
        }
        let n = self.lu.rows();
        let mut d = C64::new(self.sign, 0.0);
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        d
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve_vec(&self, b: &[C64]) -> Result<Vec<C64>> {
        if self.singular {
            return Err(Error::Singular);
        }
        let n = self.lu.rows();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve_vec(&b.column(j))?;
            out.set_column(j, &x);
        }
        Ok(out)
    }
}

pub fn complex_det(a: &CMatrix) -> C64 {
    if a.rows() == 0 {
        return C64::new(1.0, 0.0);
    }
    Lu::new(a).det()
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    Lu::new(a).solve(&CMatrix::identity(a.rows()))
}

pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    Lu::new(a).solve(b)
}

/// Product of row norms, an upper bound on |det A|.
pub fn hadamard_bound(a: &CMatrix) -> f64 {
    (0..a.rows())
        .map(|i| a.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .product()
}
