//! Counting theorems: curves through the origin, the conservation law for odd-degree
//! pencils, the unstable-eigenvalue count of J L and its real-symmetric form, and the
//! lower bound on real eigenvalues for block-diagonal L.
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::branches::{geometric_multiplicity, Vanishing};
use crate::error::{Error, Result};
use crate::krein::{local_vanishing, value_signature, KreinReport};
use crate::linalg::{general_eigenvalues_with, hermitian_eigen_with, inertia_of_values, null_space, svd, CMatrix, Inertia};
use crate::pencil::{
    characteristic_values_with, is_invertible, is_selfadjoint_with, pencil_from_hamiltonian, real_characteristic_values,
    CanonicalHamiltonian, HamiltonianSystem, MatrixPencil,
};
use crate::tol::Tolerances;

/// Curves μ(λ) through (0, 0), split by the side on which they dip below or rise above μ = 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ZCounts {
    /// μ < 0 just right of 0
    pub down_plus: usize,
    /// μ < 0 just left of 0
    pub down_minus: usize,
    pub up_plus: usize,
    pub up_minus: usize,
    /// first nonzero derivative positive
    pub plus: usize,
    /// first nonzero derivative negative
    pub minus: usize,
}

/// Z counts from (order, sign of the first nonzero derivative) of each curve through the origin.
pub fn z_counts(orders: &[(usize, i8)]) -> ZCounts {
    let mut z = ZCounts::default();
    for &(m, eta) in orders {
        let left = if m % 2 == 0 { eta } else { -eta };
        if eta < 0 {
            z.down_plus += 1;
            z.minus += 1;
        } else {
            z.up_plus += 1;
            z.plus += 1;
        }
        if left < 0 {
            z.down_minus += 1;
        } else {
            z.up_minus += 1;
        }
    }
    z
}

/// Orders of the curves vanishing at λ = 0; empty when 𝓛(0) is invertible.
pub fn zero_crossings(pencil: &MatrixPencil, tol: &Tolerances) -> Result<Vec<Vanishing>> {
    if geometric_multiplicity(pencil, 0.0, tol)? == 0 {
        return Ok(Vec::new());
    }
    local_vanishing(pencil, 0.0, tol)
}

pub fn z_counts_at_zero(pencil: &MatrixPencil, tol: &Tolerances) -> Result<ZCounts> {
    let v = zero_crossings(pencil, tol)?;
    Ok(z_counts(&v.iter().map(|x| (x.order, x.eta)).collect::<Vec<_>>()))
}

fn inertia_of(a: &CMatrix, tol: &Tolerances) -> Result<Inertia> {
    let e = hermitian_eigen_with(a, tol)?;
    Ok(inertia_of_values(&e.values, tol.inertia_zero * a.frobenius_norm()))
}

/// Counting data of a selfadjoint polynomial pencil with invertible leading coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilIndex {
    pub n: usize,
    pub degree: usize,
    pub n_minus_l0: usize,
    pub n_plus_lp: usize,
    pub n_minus_lp: usize,
    pub z: ZCounts,
    /// Nonzero real characteristic values in increasing order.
    pub values: Vec<KreinReport>,
    pub kappa_sum_pos: i64,
    pub kappa_sum_neg: i64,
    /// Positive / negative real characteristic values counted with geometric multiplicity.
    pub n_plus_pencil: usize,
    pub n_minus_pencil: usize,
    /// N − 2N₋(L₀) − Z⁺↓ − Z⁻↓ + Σ_{λ>0}κ − Σ_{λ<0}κ
    pub residual: i64,
    /// N₊(𝓛) ≥ |N₋(L₀) + Z⁺↓ − N₋(L_p)|
    pub inequality_plus: bool,
    /// N₋(𝓛) ≥ |N₋(L₀) + Z⁻↓ − N₊(L_p)|
    pub inequality_minus: bool,
}

/// Counting data of the pencil; real characteristic values from its companion matrix.
pub fn pencil_index(pencil: &MatrixPencil, tol: &Tolerances) -> Result<PencilIndex> {
    let all = characteristic_values_with(pencil, tol)?;
    let reals: Vec<(f64, usize)> = real_characteristic_values(&all, tol);
    let radius = all.iter().fold(0.0f64, |r, (z, _)| r.max(z.norm()));
    pencil_index_with_values(pencil, &reals, radius, tol)
}

/// Counting data with the real characteristic values (and multiplicities) supplied.
pub fn pencil_index_with_values(
    pencil: &MatrixPencil,
    reals: &[(f64, usize)],
    radius: f64,
    tol: &Tolerances,
) -> Result<PencilIndex> {
    let coeffs = pencil.coeffs().ok_or(Error::NotPolynomial)?;
    if !is_selfadjoint_with(pencil, tol) {
        return Err(Error::NotSelfadjoint);
    }
    let p = coeffs.len() - 1;
    let lp = &coeffs[p];
    if !is_invertible(lp, tol.leading_det) {
        return Err(Error::SingularLeadingCoefficient);
    }
    let n = pencil.dim();
    let l0 = inertia_of(&coeffs[0], tol)?;
    let lpi = inertia_of(lp, tol)?;
    let zero = zero_crossings(pencil, tol)?;
    let z = z_counts(&zero.iter().map(|x| (x.order, x.eta)).collect::<Vec<_>>());
    let zero_band = 1e-6 * (1.0 + radius);

    let mut values = Vec::new();
    for &(x, mult) in reals {
        if !zero.is_empty() && x.abs() <= zero_band {
            continue;
        }
        let r = value_signature(pencil, x, tol)?;
        if r.alpha() != mult {
            return Err(Error::OrderUndetermined { lambda: x });
        }
        values.push(r);
    }
    values.sort_by(|a, b| a.lambda0.partial_cmp(&b.lambda0).unwrap_or(core::cmp::Ordering::Equal));

    let kappa_sum_pos: i64 = values.iter().filter(|r| r.lambda0 > 0.0).map(|r| r.kappa()).sum();
    let kappa_sum_neg: i64 = values.iter().filter(|r| r.lambda0 < 0.0).map(|r| r.kappa()).sum();
    let n_plus_pencil: usize = values.iter().filter(|r| r.lambda0 > 0.0).map(|r| r.branches.len()).sum();
    let n_minus_pencil: usize = values.iter().filter(|r| r.lambda0 < 0.0).map(|r| r.branches.len()).sum();
    let residual = n as i64 - 2 * l0.n_minus as i64 - z.down_plus as i64 - z.down_minus as i64 + kappa_sum_pos
        - kappa_sum_neg;
    let bound_plus = (l0.n_minus as i64 + z.down_plus as i64 - lpi.n_minus as i64).abs();
    let bound_minus = (l0.n_minus as i64 + z.down_minus as i64 - lpi.n_plus as i64).abs();
    Ok(PencilIndex {
        n,
        degree: p,
        n_minus_l0: l0.n_minus,
        n_plus_lp: lpi.n_plus,
        n_minus_lp: lpi.n_minus,
        z,
        values,
        kappa_sum_pos,
        kappa_sum_neg,
        n_plus_pencil,
        n_minus_pencil,
        residual,
        inequality_plus: n_plus_pencil as i64 >= bound_plus,
        inequality_minus: n_minus_pencil as i64 >= bound_minus,
    })
}

/// Residual of the conservation law; zero when the law holds.
pub fn conservation_check(pencil: &MatrixPencil, tol: &Tolerances) -> Result<i64> {
    match pencil.degree() {
        Some(p) if p % 2 == 1 => Ok(pencil_index(pencil, tol)?.residual),
        Some(_) => Err(Error::InvalidArgument { what: "conservation law needs an odd-degree pencil" }),
        None => Err(Error::NotPolynomial),
    }
}

/// Spectrum of J L split by the real-part test.
#[derive(Debug, Clone, PartialEq)]
struct Spectrum {
    values: Vec<(C64, usize)>,
    radius: f64,
    re_band: f64,
}

impl Spectrum {
    fn of(sys: &HamiltonianSystem, tol: &Tolerances) -> Result<Self> {
        let values = general_eigenvalues_with(&sys.jl(), tol)?;
        let radius = values.iter().fold(0.0f64, |r, (z, _)| r.max(z.norm()));
        Ok(Spectrum { values, radius, re_band: tol.re * (1.0 + radius) })
    }

    fn check_borderline(&self) -> Result<()> {
        for (z, _) in &self.values {
            let r = z.re.abs();
            if r > 0.1 * self.re_band && r <= 10.0 * self.re_band {
                return Err(Error::Borderline { re: z.re });
            }
        }
        Ok(())
    }

    fn is_zero(&self, z: C64) -> bool {
        z.norm() <= self.re_band
    }

    fn unstable_multiplicity(&self) -> usize {
        self.values.iter().filter(|(z, _)| z.re.abs() > self.re_band).map(|(_, m)| m).sum()
    }

    fn gker(&self) -> usize {
        self.values.iter().filter(|(z, _)| self.is_zero(*z)).map(|(_, m)| m).sum()
    }

    /// Real characteristic values λ = iν of L − λK, from the imaginary points ν.
    fn real_values(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = self
            .values
            .iter()
            .filter(|(z, _)| z.re.abs() <= self.re_band)
            .map(|(z, m)| (if self.is_zero(*z) { 0.0 } else { -z.im }, *m))
            .collect();
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
        out
    }
}

/// Index data of a linearized Hamiltonian J L.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport {
    pub pencil: PencilIndex,
    /// dim gKer(J L)
    pub gker: usize,
    /// dim Ker(L)
    pub ker_l: usize,
    pub n_minus_l: usize,
    pub zeta: i64,
    /// Σ_{λ>0} κ⁺
    pub kappa_plus_pos: i64,
    /// Σ_{λ<0} κ⁻
    pub kappa_minus_neg: i64,
    /// n_u from the counting formula.
    pub n_u: i64,
    /// Half the multiplicity of eigenvalues with Re ν ≠ 0.
    pub n_u_direct: i64,
    pub n_s: i64,
    /// Σ over real λ of κ⁺ + κ⁻, including gKer at λ = 0.
    pub stable_multiplicity: usize,
}

impl IndexReport {
    pub fn consistent(&self) -> bool {
        self.n_u == self.n_u_direct
    }
}

fn hamiltonian_index(sys: &HamiltonianSystem, tol: &Tolerances) -> Result<(IndexReport, Spectrum)> {
    let spectrum = Spectrum::of(sys, tol)?;
    spectrum.check_borderline()?;
    let pencil = pencil_from_hamiltonian(sys);
    let reals = spectrum.real_values();
    let pi = pencil_index_with_values(&pencil, &reals, spectrum.radius, tol)?;
    let gker = spectrum.gker();
    let l = inertia_of(sys.l(), tol)?;
    let two_zeta = gker as i64 - (pi.z.down_plus + pi.z.down_minus) as i64;
    if two_zeta % 2 != 0 {
        return Err(Error::Inconsistent { formula: two_zeta, direct: gker as i64 });
    }
    let zeta = two_zeta / 2;
    let kappa_plus_pos: i64 = pi.values.iter().filter(|r| r.lambda0 > 0.0).map(|r| r.kappa_plus as i64).sum();
    let kappa_minus_neg: i64 = pi.values.iter().filter(|r| r.lambda0 < 0.0).map(|r| r.kappa_minus as i64).sum();
    let n_u = l.n_minus as i64 - zeta - kappa_plus_pos - kappa_minus_neg;
    let um = spectrum.unstable_multiplicity();
    if um % 2 != 0 {
        return Err(Error::Inconsistent { formula: n_u, direct: um as i64 });
    }
    let n_u_direct = (um / 2) as i64;
    let half = (sys.dim() / 2) as i64;
    let stable_multiplicity = pi.values.iter().map(|r| r.alpha()).sum::<usize>() + gker;
    let report = IndexReport {
        gker,
        ker_l: l.n_zero,
        n_minus_l: l.n_minus,
        zeta,
        kappa_plus_pos,
        kappa_minus_neg,
        n_u,
        n_u_direct,
        n_s: half - n_u_direct,
        stable_multiplicity,
        pencil: pi,
    };
    Ok((report, spectrum))
}

/// n_u by the counting formula, checked against the direct eigenvalue count.
pub fn unstable_count(sys: &HamiltonianSystem, tol: &Tolerances) -> Result<IndexReport> {
    let (r, _) = hamiltonian_index(sys, tol)?;
    if !r.consistent() {
        return Err(Error::Inconsistent { formula: r.n_u, direct: r.n_u_direct });
    }
    Ok(r)
}

/// Result of the count for systems that are real under some antilinear involution.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricCount {
    pub n_u: i64,
    pub zeta: i64,
    pub kappa_plus_pos: i64,
    /// n_u ≡ N₋(L) − ζ (mod 2)
    pub parity_ok: bool,
    /// Σ_{λ>0} κ⁺ = Σ_{λ<0} κ⁻
    pub mirror_ok: bool,
    pub report: IndexReport,
}

fn commutes_with_involution(a: &CMatrix, u: &CMatrix, tol: f64) -> bool {
    // A U conj(v) = U conj(A v) for all v  ⇔  A U = U conj(A)
    let d = a * u - u * &a.conj();
    d.frobenius_norm() <= tol * (1.0 + a.frobenius_norm())
}

/// n_u = N₋(L) − ζ − 2Σ_{λ>0}κ⁺ for J, L real, either entrywise or with respect to
/// v ↦ U conj(v) for a supplied unitary U.
pub fn full_symmetry_count(sys: &HamiltonianSystem, involution: Option<&CMatrix>, tol: &Tolerances) -> Result<SymmetricCount> {
    let real_tol = 1e-12;
    match involution {
        None => {
            if !sys.j().is_real(real_tol * (1.0 + sys.j().max_abs()))
                || !sys.l().is_real(real_tol * (1.0 + sys.l().max_abs()))
            {
                return Err(Error::NotReal);
            }
        }
        Some(u) => {
            let n = sys.dim();
            if u.rows() != n || u.cols() != n {
                return Err(Error::DimensionMismatch { what: "involution must match the system dimension" });
            }
            let uu = &u.adjoint() * u - CMatrix::identity(n);
            // an involution also needs U conj(U) = I
            let inv = u * &u.conj() - CMatrix::identity(n);
            if uu.frobenius_norm() > 1e-10 || inv.frobenius_norm() > 1e-10 {
                return Err(Error::InvalidArgument { what: "involution must be unitary with U conj(U) = I" });
            }
            if !commutes_with_involution(sys.j(), u, real_tol) || !commutes_with_involution(sys.l(), u, real_tol) {
                return Err(Error::NotReal);
            }
        }
    }
    let (r, _) = hamiltonian_index(sys, tol)?;
    let two_zeta = r.gker as i64 - 2 * r.pencil.z.minus as i64;
    if two_zeta % 2 != 0 {
        return Err(Error::Inconsistent { formula: two_zeta, direct: r.gker as i64 });
    }
    let zeta = two_zeta / 2;
    let n_u = r.n_minus_l as i64 - zeta - 2 * r.kappa_plus_pos;
    if n_u != r.n_u_direct {
        return Err(Error::Inconsistent { formula: n_u, direct: r.n_u_direct });
    }
    Ok(SymmetricCount {
        n_u,
        zeta,
        kappa_plus_pos: r.kappa_plus_pos,
        parity_ok: (n_u - (r.n_minus_l as i64 - zeta)).rem_euclid(2) == 0,
        mirror_ok: r.kappa_plus_pos == r.kappa_minus_neg,
        report: r,
    })
}

/// (dim gKer(J L), dim Ker(L)).
pub fn gker_dimension(sys: &HamiltonianSystem, tol: &Tolerances) -> Result<(usize, usize)> {
    let spectrum = Spectrum::of(sys, tol)?;
    let l = inertia_of(sys.l(), tol)?;
    Ok((spectrum.gker(), l.n_zero))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBound {
    /// |N₋(M₊) − N₋(M₋)|
    pub bound: usize,
    /// Nonzero real eigenvalues of J L, counted with geometric multiplicity.
    pub n_real: usize,
    pub satisfied: bool,
}

fn kernel_basis(a: &CMatrix, tol: &Tolerances) -> Result<Vec<Vec<C64>>> {
    let e = hermitian_eigen_with(a, tol)?;
    let band = tol.inertia_zero * a.frobenius_norm();
    Ok((0..e.values.len()).filter(|&i| e.values[i].abs() <= band).map(|i| e.vectors[i].clone()).collect())
}

/// Lower bound on the number of real eigenvalues of J L in canonical form.
pub fn canonical_lower_bound(can: &CanonicalHamiltonian, tol: &Tolerances) -> Result<LowerBound> {
    let n = can.n();
    let kp = kernel_basis(&can.l_plus, tol)?;
    let km = kernel_basis(&can.l_minus, tol)?;
    let mut overlap: f64 = 0.0;
    for a in &kp {
        for b in &km {
            overlap = overlap.max(crate::linalg::dot(a, b).norm());
        }
    }
    if overlap > tol.kernel_orthogonality {
        return Err(Error::KernelsNotOrthogonal { overlap });
    }
    let mut kernels = kp.clone();
    kernels.extend(km.iter().cloned());
    // orthonormal basis Q of the complement; M± = Q* L± Q is P L± P restricted to range(P)
    let q: Vec<Vec<C64>> = if kernels.is_empty() {
        (0..n).map(|i| CMatrix::identity(n).column(i)).collect()
    } else {
        let rows = CMatrix::from_columns(n, &kernels).adjoint();
        null_space(&rows, tol.rank)?
    };
    let neg = |l: &CMatrix| -> Result<usize> {
        if q.is_empty() {
            return Ok(0);
        }
        let qm = CMatrix::from_columns(n, &q);
        let m = (&qm.adjoint() * l) * &qm;
        Ok(inertia_of(&m.hermitian_part(), tol)?.n_minus)
    };
    let bound = (neg(&can.l_plus)? as i64 - neg(&can.l_minus)? as i64).unsigned_abs() as usize;

    let sys = can.to_system()?;
    let spectrum = Spectrum::of(&sys, tol)?;
    let jl = sys.jl();
    let mut n_real = 0;
    for &(z, _) in &spectrum.values {
        if spectrum.is_zero(z) || z.im.abs() > spectrum.re_band {
            continue;
        }
        let mut shifted = jl.clone();
        for i in 0..shifted.rows() {
            shifted[(i, i)] -= z;
        }
        let d = svd(&shifted)?;
        let smax = d.s.first().copied().unwrap_or(0.0).max(1.0);
        n_real += d.s.iter().filter(|&&s| s <= 1e-6 * smax).count();
    }
    Ok(LowerBound { bound, n_real, satisfied: n_real / 2 >= bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use alloc::vec;

    fn canonical_j(s: f64) -> CMatrix {
        let mut j = CMatrix::zeros(4, 4);
        j[(0, 2)] = c(s, 0.0);
        j[(2, 0)] = c(-s, 0.0);
        j[(1, 3)] = c(1.0, 0.0);
        j[(3, 1)] = c(-1.0, 0.0);
        j
    }

    fn sys(l: &[f64], s: f64) -> HamiltonianSystem {
        HamiltonianSystem::new(canonical_j(s), CMatrix::from_real_diag(l)).unwrap()
    }

    #[test]
    fn z_count_rules() {
        assert_eq!(z_counts(&[(2, -1)]), ZCounts { down_plus: 1, down_minus: 1, minus: 1, ..Default::default() });
        assert_eq!(z_counts(&[(1, 1)]), ZCounts { up_plus: 1, down_minus: 1, plus: 1, ..Default::default() });
        let tol = Tolerances::default();
        let neg_sq = MatrixPencil::polynomial(vec![
            CMatrix::zeros(1, 1),
            CMatrix::zeros(1, 1),
            CMatrix::from_real_diag(&[-1.0]),
        ])
        .unwrap();
        let z = z_counts_at_zero(&neg_sq, &tol).unwrap();
        assert_eq!((z.down_plus, z.down_minus, z.minus, z.plus), (1, 1, 1, 0));
        let inv = MatrixPencil::linear(CMatrix::identity(2), CMatrix::identity(2)).unwrap();
        assert_eq!(z_counts_at_zero(&inv, &tol).unwrap(), ZCounts::default());
    }

    #[test]
    fn examples_one_and_two() {
        let tol = Tolerances::default();
        let e1 = sys(&[0.5, 1.0, 1.5, 2.0], 1.0);
        let r = unstable_count(&e1, &tol).unwrap();
        assert_eq!((r.n_u, r.pencil.residual, r.pencil.kappa_sum_pos, r.pencil.kappa_sum_neg), (0, 0, -2, 2));
        let e2 = sys(&[-1.0, 2.0, 1.0, -2.0], 2.0);
        let r = unstable_count(&e2, &tol).unwrap();
        assert_eq!((r.n_u, r.n_u_direct, r.pencil.residual, r.pencil.n_minus_l0), (2, 2, 0, 2));
        assert!(r.pencil.values.is_empty());
        let f = full_symmetry_count(&e2, None, &tol).unwrap();
        assert_eq!((f.n_u, f.zeta, f.kappa_plus_pos), (2, 0, 0));
        let e42 = sys(&[2.0, -1.0, 1.0, -2.0], 2.0);
        let f = full_symmetry_count(&e42, None, &tol).unwrap();
        assert_eq!(f.n_u, 0);
        assert!(f.mirror_ok && f.parity_ok);
    }

    #[test]
    fn gker_footnote_cases() {
        let tol = Tolerances::default();
        let j = canonical_j(1.0);
        let zero = HamiltonianSystem::new(j.clone(), CMatrix::zeros(4, 4)).unwrap();
        assert_eq!(gker_dimension(&zero, &tol).unwrap(), (4, 4));
        let half = HamiltonianSystem::new(j.clone(), CMatrix::from_real_diag(&[1.0, 0.0, 1.0, 0.0])).unwrap();
        assert_eq!(gker_dimension(&half, &tol).unwrap(), (2, 2));
        assert_eq!(gker_dimension(&sys(&[1.0, 2.0, 3.0, 4.0], 1.0), &tol).unwrap(), (0, 0));
    }

    #[test]
    fn singular_l_is_counted() {
        let tol = Tolerances::default();
        let s = HamiltonianSystem::new(canonical_j(1.0), CMatrix::from_real_diag(&[1.0, 0.0, 1.0, 0.0])).unwrap();
        let r = unstable_count(&s, &tol).unwrap();
        assert_eq!(r.n_u, 0);
        assert_eq!(r.gker, 2);
    }

    #[test]
    fn lower_bounds() {
        let tol = Tolerances::default();
        let can = CanonicalHamiltonian::new(CMatrix::from_real_diag(&[-1.0, 1.0]), CMatrix::identity(2)).unwrap();
        let b = canonical_lower_bound(&can, &tol).unwrap();
        assert_eq!(b.bound, 1);
        assert!(b.n_real >= 2 && b.satisfied);
        let pd = CanonicalHamiltonian::new(CMatrix::from_real_diag(&[1.0, 2.0]), CMatrix::identity(2)).unwrap();
        assert_eq!(canonical_lower_bound(&pd, &tol).unwrap().bound, 0);
        let ind = CMatrix::from_real_diag(&[-1.0, 2.0]);
        let same = CanonicalHamiltonian::new(ind.clone(), ind).unwrap();
        assert_eq!(canonical_lower_bound(&same, &tol).unwrap().bound, 0);
        let bad = CanonicalHamiltonian::new(
            CMatrix::from_real_diag(&[0.0, 1.0]),
            CMatrix::from_real_rows(&[&[1.0, 1.0][..], &[1.0, 1.0]]),
        )
        .unwrap();
        assert!(matches!(canonical_lower_bound(&bad, &tol), Err(Error::KernelsNotOrthogonal { .. })));
    }
}
