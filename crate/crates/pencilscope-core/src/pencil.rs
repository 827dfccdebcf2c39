//! Matrix pencils, linearized Hamiltonian systems and their polynomial linearizations.
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::diff::{binomial, factorial};
use crate::error::{Error, Result};
use crate::linalg::{general_eigenvalues_with, hadamard_bound, complex_det, inverse, CMatrix};
use crate::tol::Tolerances;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// A λ-dependent family of square matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixPencil {
    /// Σ λ^k L_k with coefficients L_0..L_p.
    Polynomial { coeffs: Vec<CMatrix> },
    /// Σ λ^k P_k + e^{-τλ} Q. The delay equation λI - A - e^{-τλ}B has P = [-A, I], Q = -B;
    /// λ-derivatives stay in this form.
    Delay { poly: Vec<CMatrix>, delay: CMatrix, tau: f64 },
}

impl MatrixPencil {
    pub fn polynomial(coeffs: Vec<CMatrix>) -> Result<Self> {
        let n = match coeffs.first() {
            Some(c) => c.rows(),
            None => return Err(Error::InvalidArgument { what: "polynomial pencil needs at least one coefficient" }),
        };
        if n == 0 {
            return Err(Error::InvalidArgument { what: "empty coefficient matrix" });
        }
        if coeffs.iter().any(|c| !c.is_square() || c.rows() != n) {
            return Err(Error::DimensionMismatch { what: "pencil coefficients must be square of equal size" });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument { what: "non-finite coefficient entry" });
        }
        Ok(MatrixPencil::Polynomial { coeffs })
    }

    /// Linear pencil `l0 + λ l1`.
    pub fn linear(l0: CMatrix, l1: CMatrix) -> Result<Self> {
        Self::polynomial(vec![l0, l1])
    }

    pub fn dim(&self) -> usize {
        match self {
            MatrixPencil::Polynomial { coeffs } => coeffs[0].rows(),
            MatrixPencil::Delay { delay, .. } => delay.rows(),
        }
    }

    /// Polynomial degree, `None` for delay pencils.
    pub fn degree(&self) -> Option<usize> {
        match self {
            MatrixPencil::Polynomial { coeffs } => Some(coeffs.len() - 1),
            MatrixPencil::Delay { .. } => None,
        }
    }

    pub fn coeffs(&self) -> Option<&[CMatrix]> {
        match self {
            MatrixPencil::Polynomial { coeffs } => Some(coeffs),
            MatrixPencil::Delay { .. } => None,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self, MatrixPencil::Polynomial { .. })
    }

    pub fn evaluate(&self, lambda: C64) -> CMatrix {
        match self {
            MatrixPencil::Polynomial { coeffs } => horner(coeffs, lambda),
            MatrixPencil::Delay { poly, delay, tau } => {
                let mut m = horner(poly, lambda);
                m.axpy((-lambda * *tau).exp(), delay);
                m
            }
        }
    }

    pub fn evaluate_real(&self, lambda: f64) -> CMatrix {
        self.evaluate(C64::new(lambda, 0.0))
    }

    /// Σ |λ|^k ‖L_k‖_F (plus the delay term): the size of the entries that
    /// rounding errors in `evaluate` are relative to.
    pub fn eval_scale(&self, lambda: C64) -> f64 {
        let r = lambda.norm();
        let poly = |c: &[CMatrix]| c.iter().rev().fold(0.0, |acc, m| acc * r + m.frobenius_norm());
        match self {
            MatrixPencil::Polynomial { coeffs } => poly(coeffs),
            MatrixPencil::Delay { poly: p, delay, tau } => poly(p) + (-lambda.re * tau).exp() * delay.frobenius_norm(),
        }
    }

    /// The `order`-th λ-derivative as a pencil of the same kind.
    pub fn derivative(&self, order: usize) -> MatrixPencil {
        match self {
            MatrixPencil::Polynomial { coeffs } => MatrixPencil::Polynomial { coeffs: poly_derivative(coeffs, order) },
            MatrixPencil::Delay { poly, delay, tau } => MatrixPencil::Delay {
                poly: poly_derivative(poly, order),
                delay: delay.scale_real((-tau).powi(order as i32)),
                tau: *tau,
            },
        }
    }

    /// Taylor coefficients 𝓛^{(ℓ)}(λ₀)/ℓ! for ℓ = 0..count.
    pub fn taylor_coefficients(&self, lambda0: C64, count: usize) -> Vec<CMatrix> {
        let n = self.dim();
        let poly_part = |c: &[CMatrix], l: usize| {
            let mut m = CMatrix::zeros(n, n);
            for (k, ck) in c.iter().enumerate().skip(l) {
                m.axpy(lambda0.powu((k - l) as u32) * binomial(k, l), ck);
            }
            m
        };
        (0..count)
            .map(|l| match self {
                MatrixPencil::Polynomial { coeffs } => poly_part(coeffs, l),
                MatrixPencil::Delay { poly, delay, tau } => {
                    let mut m = poly_part(poly, l);
                    let f = (-lambda0 * *tau).exp() * ((-tau).powi(l as i32) / factorial(l));
                    m.axpy(f, delay);
                    m
                }
            })
            .collect()
    }
}

fn horner(coeffs: &[CMatrix], lambda: C64) -> CMatrix {
    let n = coeffs[0].rows();
    let mut acc = CMatrix::zeros(n, n);
    for c in coeffs.iter().rev() {
        acc = acc.scale(lambda);
        acc.axpy(C64::new(1.0, 0.0), c);
    }
    acc
}

fn poly_derivative(coeffs: &[CMatrix], order: usize) -> Vec<CMatrix> {
    let n = coeffs[0].rows();
    if order >= coeffs.len() {
        return vec![CMatrix::zeros(n, n)];
    }
    (order..coeffs.len())
        .map(|k| {
            // d^order/dλ^order λ^k = k!/(k-order)! λ^{k-order}
            let f = factorial(k) / factorial(k - order);
            coeffs[k].scale_real(f)
        })
        .collect()
}

pub fn evaluate(pencil: &MatrixPencil, lambda: C64) -> CMatrix {
    pencil.evaluate(lambda)
}

pub fn pencil_derivative(pencil: &MatrixPencil, order: usize) -> MatrixPencil {
    pencil.derivative(order)
}

/// 𝓛(λ) = λI - A - e^{-τλ}B.
pub fn dde_pencil(a: &CMatrix, b: &CMatrix, tau: f64) -> Result<MatrixPencil> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() || a.rows() == 0 {
        return Err(Error::DimensionMismatch { what: "A and B must be square of equal size" });
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidArgument { what: "delay must be finite and positive" });
    }
    let n = a.rows();
    Ok(MatrixPencil::Delay { poly: vec![a.scale_real(-1.0), CMatrix::identity(n)], delay: b.scale_real(-1.0), tau })
}

// complex probe points for the delay selfadjointness check
const PROBES: [(f64, f64); 6] = [(0.0, 0.0), (1.0, 0.0), (-0.7, 0.0), (0.5, 0.7), (-0.3, 1.9), (2.0, -1.1)];

pub fn is_selfadjoint(pencil: &MatrixPencil) -> bool {
    is_selfadjoint_with(pencil, &Tolerances::default())
}

/// Polynomial pencils: every coefficient Hermitian. Delay pencils: 𝓛(λ̄)* = 𝓛(λ) on a
/// fixed set of probe points, which is a heuristic and not a proof.
pub fn is_selfadjoint_with(pencil: &MatrixPencil, tol: &Tolerances) -> bool {
    match pencil {
        MatrixPencil::Polynomial { coeffs } => coeffs.iter().all(|c| c.is_hermitian(tol.hermitian)),
        MatrixPencil::Delay { .. } => PROBES.iter().all(|&(re, im)| {
            let z = C64::new(re, im);
            let a = pencil.evaluate(z);
            let b = pencil.evaluate(z.conj()).adjoint();
            (&a - &b).frobenius_norm() <= tol.hermitian * pencil.eval_scale(z).max(f64::MIN_POSITIVE)
        }),
    }
}

/// |det A| > rel · (product of row norms).
pub fn is_invertible(a: &CMatrix, rel: f64) -> bool {
    let h = hadamard_bound(a);
    h > 0.0 && complex_det(a).norm() > rel * h
}

/// A linearized Hamiltonian: J invertible skew-Hermitian, L Hermitian, K = (iJ)^{-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSystem {
    j: CMatrix,
    l: CMatrix,
    k: CMatrix,
}

impl HamiltonianSystem {
    pub fn new(j: CMatrix, l: CMatrix) -> Result<Self> {
        Self::with_tol(j, l, &Tolerances::default())
    }

    pub fn with_tol(j: CMatrix, l: CMatrix, tol: &Tolerances) -> Result<Self> {
        if !j.is_square() || !l.is_square() || j.rows() != l.rows() {
            return Err(Error::DimensionMismatch { what: "J and L must be square of equal size" });
        }
        if j.rows() == 0 || j.rows() % 2 != 0 {
            return Err(Error::DimensionMismatch { what: "Hamiltonian dimension must be even" });
        }
        if !j.is_finite() || !l.is_finite() {
            return Err(Error::InvalidArgument { what: "non-finite matrix entry" });
        }
        let sd = j.skew_defect();
        if sd > tol.hermitian * j.frobenius_norm() {
            return Err(Error::NotSkewHermitian { defect: sd });
        }
        let hd = l.hermitian_defect();
        if hd > tol.hermitian * l.frobenius_norm() {
            return Err(Error::NotHermitian { defect: hd });
        }
        if !is_invertible(&j, tol.leading_det) {
            return Err(Error::SingularJ);
        }
        let ij = j.scale(C64::new(0.0, 1.0));
        let k = inverse(&ij).map_err(|_| Error::SingularJ)?.hermitian_part();
        Ok(HamiltonianSystem { j, l, k })
    }

    pub fn j(&self) -> &CMatrix {
        &self.j
    }

    pub fn l(&self) -> &CMatrix {
        &self.l
    }

    pub fn k(&self) -> &CMatrix {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// The product JL whose spectrum the pencil encodes.
    pub fn jl(&self) -> CMatrix {
        &self.j * &self.l
    }
}

/// Canonical form J = [[0, I], [-I, 0]], L = diag(L₊, L₋).
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalHamiltonian {
    pub l_plus: CMatrix,
    pub l_minus: CMatrix,
}

impl CanonicalHamiltonian {
    pub fn new(l_plus: CMatrix, l_minus: CMatrix) -> Result<Self> {
        if !l_plus.is_square() || !l_minus.is_square() || l_plus.rows() != l_minus.rows() || l_plus.rows() == 0 {
            return Err(Error::DimensionMismatch { what: "L+ and L- must be square of equal size" });
        }
        for m in [&l_plus, &l_minus] {
            let d = m.hermitian_defect();
            if d > Tolerances::default().hermitian * m.frobenius_norm() {
                return Err(Error::NotHermitian { defect: d });
            }
        }
        Ok(CanonicalHamiltonian { l_plus, l_minus })
    }

    pub fn n(&self) -> usize {
        self.l_plus.rows()
    }

    pub fn j(&self) -> CMatrix {
        let n = self.n();
        let mut j = CMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, n + i)] = C64::new(1.0, 0.0);
            j[(n + i, i)] = C64::new(-1.0, 0.0);
        }
        j
    }

    pub fn l(&self) -> CMatrix {
        let n = self.n();
        let mut l = CMatrix::zeros(2 * n, 2 * n);
        l.set_block(0, 0, &self.l_plus);
        l.set_block(n, n, &self.l_minus);
        l
    }

    pub fn to_system(&self) -> Result<HamiltonianSystem> {
        HamiltonianSystem::new(self.j(), self.l())
    }
}

/// L - λK.
pub fn pencil_from_hamiltonian(sys: &HamiltonianSystem) -> MatrixPencil {
    MatrixPencil::Polynomial { coeffs: vec![sys.l.clone(), sys.k.scale_real(-1.0)] }
}

fn poly_coeffs(pencil: &MatrixPencil) -> Result<&[CMatrix]> {
    pencil.coeffs().ok_or(Error::NotPolynomial)
}

/// Block companion matrix: identity blocks on the superdiagonal, -L_p^{-1} L_k in the last block row.
pub fn companion_matrix(pencil: &MatrixPencil) -> Result<CMatrix> {
    companion_matrix_with(pencil, &Tolerances::default())
}

pub fn companion_matrix_with(pencil: &MatrixPencil, tol: &Tolerances) -> Result<CMatrix> {
    let coeffs = poly_coeffs(pencil)?;
    let p = coeffs.len() - 1;
    if p == 0 {
        return Err(Error::InvalidArgument { what: "companion matrix needs degree at least 1" });
    }
    let n = coeffs[0].rows();
    let lead = &coeffs[p];
    if !is_invertible(lead, tol.leading_det) {
        return Err(Error::SingularLeadingCoefficient);
    }
    let inv = inverse(lead).map_err(|_| Error::SingularLeadingCoefficient)?;
    let mut c = CMatrix::zeros(p * n, p * n);
    for b in 0..p - 1 {
        c.set_block(b * n, (b + 1) * n, &CMatrix::identity(n));
    }
    for (k, lk) in coeffs.iter().take(p).enumerate() {
        c.set_block((p - 1) * n, k * n, &(&inv * lk).scale_real(-1.0));
    }
    Ok(c)
}

/// Block-Hankel form with block (i, j) = L_{i+j+1} (zero past L_p).
pub fn hankel_form(pencil: &MatrixPencil) -> Result<CMatrix> {
    let coeffs = poly_coeffs(pencil)?;
    let p = coeffs.len() - 1;
    if p == 0 {
        return Err(Error::InvalidArgument { what: "Hankel form needs degree at least 1" });
    }
    let n = coeffs[0].rows();
    let mut b = CMatrix::zeros(p * n, p * n);
    for i in 0..p {
        for j in 0..p - i {
            b.set_block(i * n, j * n, &coeffs[i + j + 1]);
        }
    }
    Ok(b)
}

/// Characteristic values with algebraic multiplicities (total pN).
pub fn characteristic_values(pencil: &MatrixPencil) -> Result<Vec<(C64, usize)>> {
    characteristic_values_with(pencil, &Tolerances::default())
}

pub fn characteristic_values_with(pencil: &MatrixPencil, tol: &Tolerances) -> Result<Vec<(C64, usize)>> {
    let c = companion_matrix_with(pencil, tol)?;
    general_eigenvalues_with(&c, tol)
}

/// Real characteristic values, those with |Im| ≤ cluster (1 + |λ|), imaginary part dropped.
pub fn real_characteristic_values(values: &[(C64, usize)], tol: &Tolerances) -> Vec<(f64, usize)> {
    values
        .iter()
        .filter(|(z, _)| z.im.abs() <= tol.cluster * (1.0 + z.norm()) * 10.0)
        .map(|(z, m)| (z.re, *m))
        .collect()
}

/// Radius containing every characteristic value: max(1, Σ_k<p ‖L_p^{-1} L_k‖_F).
pub fn spectral_bound(pencil: &MatrixPencil) -> Result<f64> {
    let coeffs = poly_coeffs(pencil)?;
    let p = coeffs.len() - 1;
    if p == 0 {
        return Ok(1.0);
    }
    let inv = inverse(&coeffs[p]).map_err(|_| Error::SingularLeadingCoefficient)?;
    let s: f64 = coeffs.iter().take(p).map(|c| (&inv * c).frobenius_norm()).sum();
    Ok(s.max(1.0))
}

/// det 𝓛(λ).
pub fn pencil_det(pencil: &MatrixPencil, lambda: C64) -> C64 {
    let m = pencil.evaluate(lambda);
    if m.rows() == 0 {
        return ZERO;
    }
    complex_det(&m)
}
