//! Evans-Krein functions E(λ; μ) = det(𝓛(λ) − μW), their partial derivatives,
//! and root counting by winding number.
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::branches::geometric_multiplicity;
use crate::diff::{binomial, Estimate, Stencil2};
use crate::error::{Error, Result};
use crate::krein::local_vanishing;
use crate::linalg::{complex_det, hadamard_bound, hermitian_eigen, poly_roots, CMatrix};
use crate::pencil::MatrixPencil;
use crate::tol::Tolerances;

const EPS: f64 = f64::EPSILON;

/// One evaluation of an Evans-Krein function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvansKreinSample {
    pub lambda: C64,
    pub mu: f64,
    pub value: C64,
}

/// det(𝓛(λ) − μW) with W the identity or a positive definite weight.
#[derive(Debug, Clone)]
pub struct EvansKrein<'a> {
    pencil: &'a MatrixPencil,
    weight: Option<CMatrix>,
}

impl<'a> EvansKrein<'a> {
    pub fn new(pencil: &'a MatrixPencil) -> Self {
        EvansKrein { pencil, weight: None }
    }

    pub fn with_weight(pencil: &'a MatrixPencil, s: CMatrix) -> Result<Self> {
        let n = pencil.dim();
        if s.rows() != n || s.cols() != n {
            return Err(Error::DimensionMismatch { what: "weight must match the pencil dimension" });
        }
        let tol = Tolerances::default();
        if !s.is_hermitian(tol.hermitian) {
            return Err(Error::NotHermitian { defect: s.hermitian_defect() });
        }
        let e = hermitian_eigen(&s)?;
        let floor = tol.inertia_zero * s.frobenius_norm();
        if e.values.iter().any(|&x| x <= floor) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(EvansKrein { pencil, weight: Some(s) })
    }

    pub fn pencil(&self) -> &MatrixPencil {
        self.pencil
    }

    fn shifted(&self, lambda: C64, mu: f64) -> CMatrix {
        let mut m = self.pencil.evaluate(lambda);
        let n = m.rows();
        match &self.weight {
            Some(s) => m.axpy(C64::new(-mu, 0.0), s),
            None => {
                for i in 0..n {
                    m[(i, i)] -= mu;
                }
            }
        }
        m
    }

    pub fn value(&self, lambda: C64, mu: f64) -> C64 {
        complex_det(&self.shifted(lambda, mu))
    }

    pub fn sample(&self, lambda: C64, mu: f64) -> EvansKreinSample {
        EvansKreinSample { lambda, mu, value: self.value(lambda, mu) }
    }

    /// Rounding scale of one determinant evaluation: factorization error plus the first-order
    /// effect of entry errors of size ε times the evaluation scale.
    fn roundoff(&self, lambda: C64, mu: f64) -> f64 {
        let m = self.shifted(lambda, mu);
        let n = m.rows();
        let w = self.weight.as_ref().map_or(1.0, |s| s.frobenius_norm());
        let delta = 4.0 * EPS * n as f64 * (self.pencil.eval_scale(lambda) + mu.abs() * w);
        let rows: Vec<f64> = (0..n).map(|i| m.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
        let entry: f64 = (0..n)
            .map(|i| delta * rows.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r + delta).product::<f64>())
            .sum();
        16.0 * EPS * n as f64 * hadamard_bound(&m) + entry
    }

    fn steps(&self, lambda0: f64, order: usize, tol: &Tolerances) -> (f64, f64) {
        // first derivatives use the base step; higher orders balance h^6 truncation against ε/h^n
        let rel = if order <= 1 { tol.evans_step } else { tol.evans_step.max(EPS.powf(1.0 / (order as f64 + 6.0))) };
        let scale = self.pencil.eval_scale(C64::new(lambda0, 0.0)) / (self.pencil.dim() as f64).sqrt();
        (rel * (1.0 + lambda0.abs()), rel * (1.0 + scale))
    }

    /// ∂^{nλ+nμ}E / ∂λ^{nλ} ∂μ^{nμ} at (λ₀, 0) for real λ₀, by centered differences.
    pub fn partial(&self, lambda0: f64, n_lambda: usize, n_mu: usize, tol: &Tolerances) -> Estimate {
        let (hl, hm) = self.steps(lambda0, n_lambda + n_mu, tol);
        let st = Stencil2::new(n_lambda, hl, n_mu, hm);
        let samples: Vec<f64> =
            st.offsets.iter().map(|&(dl, dm)| self.value(C64::new(lambda0 + dl, 0.0), dm).re).collect();
        let reach = 4.0 * ((n_lambda + 1) / 2).max((n_mu + 1) / 2) as f64;
        let noise = self
            .roundoff(C64::new(lambda0, 0.0), 0.0)
            .max(self.roundoff(C64::new(lambda0 + reach * hl, 0.0), reach * hm))
            .max(self.roundoff(C64::new(lambda0 - reach * hl, 0.0), -reach * hm));
        st.apply(&samples, noise)
    }

    /// (D′(λ₀), E_μ(λ₀; 0)).
    pub fn first_partials(&self, lambda0: f64, tol: &Tolerances) -> (Estimate, Estimate) {
        (self.partial(lambda0, 1, 0, tol), self.partial(lambda0, 0, 1, tol))
    }

    /// κ(λ₀) = −sign(D′/E_μ) at a simple real characteristic value.
    pub fn signature(&self, lambda0: f64, tol: &Tolerances) -> Result<i8> {
        let k = geometric_multiplicity(self.pencil, lambda0, tol)?;
        if k != 1 {
            return Err(Error::NotSimple { lambda: lambda0 });
        }
        let (d, e) = self.first_partials(lambda0, tol);
        if e.is_zero(tol.noise_factor) {
            return Err(Error::DerivativeBelowNoise { what: "E_mu" });
        }
        if d.is_zero(tol.noise_factor) {
            return Err(Error::DerivativeBelowNoise { what: "D'" });
        }
        Ok(-d.sign() * e.sign())
    }

    /// μ^{(m)}(λ₀) of the single branch through a value of geometric multiplicity one.
    pub fn high_order_derivative_gm1(&self, lambda0: f64, m: usize, tol: &Tolerances) -> Result<f64> {
        if m == 0 {
            return Err(Error::InvalidArgument { what: "derivative order must be positive" });
        }
        let k = geometric_multiplicity(self.pencil, lambda0, tol)?;
        if k != 1 {
            return Err(Error::NotGeometricMultOne { lambda: lambda0, found: k });
        }
        let dm = self.partial(lambda0, m, 0, tol);
        let e = self.partial(lambda0, 0, 1, tol);
        if e.is_zero(tol.noise_factor) {
            return Err(Error::DerivativeBelowNoise { what: "E_mu" });
        }
        if dm.is_zero(tol.noise_factor) {
            return Err(Error::DerivativeBelowNoise { what: "d^m E / d lambda^m" });
        }
        Ok(-dm.value / e.value)
    }

    /// Mixed partials ∂^{n+j}E/∂μ^n∂λ^j at (λ₀, 0) for every n + j < k, keyed by (n, j).
    pub fn low_mixed_partials(&self, lambda0: f64, k: usize, tol: &Tolerances) -> Vec<((usize, usize), Estimate)> {
        let mut out = Vec::new();
        for total in 0..k {
            for n in 0..=total {
                out.push(((n, total - n), self.partial(lambda0, total - n, n, tol)));
            }
        }
        out
    }

    /// Slopes μ_j′(λ₀) of the k branches through a semisimple value, ascending.
    pub fn semisimple_slopes(&self, lambda0: f64, tol: &Tolerances) -> Result<Vec<f64>> {
        let v = local_vanishing(self.pencil, lambda0, tol)?;
        if v.is_empty() || v.iter().any(|x| x.order != 1) {
            return Err(Error::NotSemisimple { lambda: lambda0 });
        }
        self.slopes_of_multiplicity(lambda0, v.len(), tol)
    }

    /// Roots of Σ_n C(k,n) ∂^kE/∂μ^n∂λ^{k−n} z^n, without checking semisimplicity.
    pub fn slopes_of_multiplicity(&self, lambda0: f64, k: usize, tol: &Tolerances) -> Result<Vec<f64>> {
        let coeffs: Vec<C64> =
            (0..=k).map(|n| C64::new(binomial(k, n) * self.partial(lambda0, k - n, n, tol).value, 0.0)).collect();
        let roots = poly_roots(&coeffs)?;
        if roots.len() != k {
            return Err(Error::DerivativeBelowNoise { what: "leading slope coefficient" });
        }
        let mut out = Vec::with_capacity(k);
        for z in roots {
            if z.im.abs() > tol.slope_imag * (1.0 + z.re.abs()) {
                return Err(Error::ComplexRootsDetected { imag: z.im });
            }
            out.push(z.re);
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        Ok(out)
    }

    /// Number of characteristic values of 𝓛 − μW inside the contour, with multiplicity.
    pub fn winding_number(&self, contour: &Contour, mu: f64, tol: &Tolerances) -> Result<i64> {
        let mut total = 0.0;
        for w in contour.vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            let m = contour.samples_per_edge.max(1);
            let mut prev_z = a;
            let mut prev = self.checked_value(a, mu, tol)?;
            for i in 1..=m {
                let z = a + (b - a) * (i as f64 / m as f64);
                let f = self.checked_value(z, mu, tol)?;
                total += self.phase_change(prev_z, prev, z, f, mu, tol, 0)?;
                prev_z = z;
                prev = f;
            }
        }
        let turns = total / (2.0 * core::f64::consts::PI);
        Ok(turns.round() as i64)
    }

    fn checked_value(&self, z: C64, mu: f64, tol: &Tolerances) -> Result<C64> {
        let m = self.shifted(z, mu);
        let f = complex_det(&m);
        if f.norm() <= tol.winding_margin * hadamard_bound(&m) {
            return Err(Error::RootOnContour);
        }
        Ok(f)
    }

    #[allow(clippy::too_many_arguments)]
    fn phase_change(&self, za: C64, fa: C64, zb: C64, fb: C64, mu: f64, tol: &Tolerances, depth: usize) -> Result<f64> {
        let d = (fb / fa).arg();
        if d.abs() < core::f64::consts::FRAC_PI_2 {
            return Ok(d);
        }
        if depth >= tol.winding_max_depth {
            return Err(Error::PhaseStepTooLarge);
        }
        let zm = (za + zb) * 0.5;
        let fm = self.checked_value(zm, mu, tol)?;
        Ok(self.phase_change(za, fa, zm, fm, mu, tol, depth + 1)? + self.phase_change(zm, fm, zb, fb, mu, tol, depth + 1)?)
    }
}

/// Closed polygonal path in the λ-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub vertices: Vec<C64>,
    pub samples_per_edge: usize,
}

impl Contour {
    /// Closes the path when the last vertex differs from the first.
    pub fn polygon(mut vertices: Vec<C64>, samples_per_edge: usize) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidArgument { what: "contour needs at least three vertices" });
        }
        if vertices.first() != vertices.last() {
            vertices.push(vertices[0]);
        }
        Ok(Contour { vertices, samples_per_edge: samples_per_edge.max(1) })
    }

    /// Counter-clockwise rectangle [re0, re1] × [im0, im1].
    pub fn rectangle(re0: f64, re1: f64, im0: f64, im1: f64, samples_per_edge: usize) -> Self {
        let v = vec![C64::new(re0, im0), C64::new(re1, im0), C64::new(re1, im1), C64::new(re0, im1), C64::new(re0, im0)];
        Contour { vertices: v, samples_per_edge: samples_per_edge.max(1) }
    }
}

pub fn evans_krein(pencil: &MatrixPencil, lambda: C64, mu: f64) -> C64 {
    EvansKrein::new(pencil).value(lambda, mu)
}

pub fn evans_krein_generalized(pencil: &MatrixPencil, s: &CMatrix, lambda: C64, mu: f64) -> Result<C64> {
    Ok(EvansKrein::with_weight(pencil, s.clone())?.value(lambda, mu))
}

pub fn signature_from_evans(pencil: &MatrixPencil, lambda0: f64, tol: &Tolerances) -> Result<i8> {
    EvansKrein::new(pencil).signature(lambda0, tol)
}

pub fn high_order_derivative_gm1(pencil: &MatrixPencil, lambda0: f64, m: usize, tol: &Tolerances) -> Result<f64> {
    EvansKrein::new(pencil).high_order_derivative_gm1(lambda0, m, tol)
}

pub fn semisimple_slopes(pencil: &MatrixPencil, lambda0: f64, tol: &Tolerances) -> Result<Vec<f64>> {
    EvansKrein::new(pencil).semisimple_slopes(lambda0, tol)
}

pub fn winding_number(pencil: &MatrixPencil, contour: &Contour, mu: f64, tol: &Tolerances) -> Result<i64> {
    EvansKrein::new(pencil).winding_number(contour, mu, tol)
}
