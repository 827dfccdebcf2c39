//! Krein indices of real characteristic values, from branch geometry and from Gram
//! matrices over root-vector chains.
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::branches::{branch_anchors, branch_taylor_vectors, order_of_vanishing, CrossingEvent, Vanishing};
use crate::error::{Error, Result};
use crate::linalg::{
    fix_phase, hermitian_eigen_with, inverse, lstsq_min_norm, norm, orthonormalize, rank_ambiguous_scaled, rank_of_scaled, svd,
    CMatrix,
};
use crate::pencil::{hankel_form, MatrixPencil};
use crate::tol::Tolerances;

/// (κ⁺_g, κ⁻_g) of a branch vanishing to order m with leading sign η.
pub fn graphical_indices(m: usize, eta: i8) -> (usize, usize) {
    assert!(m >= 1 && (eta == 1 || eta == -1), "order must be positive and sign ±1");
    if m % 2 == 0 {
        (m / 2, m / 2)
    } else if eta > 0 {
        ((m + 1) / 2, (m - 1) / 2)
    } else {
        ((m - 1) / 2, (m + 1) / 2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchKrein {
    pub branch: usize,
    pub order: usize,
    pub eta: i8,
    pub kappa_plus: usize,
    pub kappa_minus: usize,
}

impl BranchKrein {
    pub fn kappa(&self) -> i64 {
        self.kappa_plus as i64 - self.kappa_minus as i64
    }
}

/// Graphical Krein data at one real characteristic value.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinReport {
    pub lambda0: f64,
    pub branches: Vec<BranchKrein>,
    pub kappa_plus: usize,
    pub kappa_minus: usize,
}

impl KreinReport {
    pub fn kappa(&self) -> i64 {
        self.kappa_plus as i64 - self.kappa_minus as i64
    }

    /// Algebraic multiplicity.
    pub fn alpha(&self) -> usize {
        self.kappa_plus + self.kappa_minus
    }

    fn from_orders(lambda0: f64, orders: &[(usize, usize, i8)]) -> Self {
        let branches: Vec<BranchKrein> = orders
            .iter()
            .map(|&(branch, order, eta)| {
                let (kp, km) = graphical_indices(order, eta);
                BranchKrein { branch, order, eta, kappa_plus: kp, kappa_minus: km }
            })
            .collect();
        let kappa_plus = branches.iter().map(|b| b.kappa_plus).sum();
        let kappa_minus = branches.iter().map(|b| b.kappa_minus).sum();
        KreinReport { lambda0, branches, kappa_plus, kappa_minus }
    }

    pub fn from_event(event: &CrossingEvent) -> Result<Self> {
        let orders = event.orders()?;
        let tagged: Vec<(usize, usize, i8)> =
            event.branches.iter().zip(orders).map(|(b, (m, eta))| (b.branch, m, eta)).collect();
        Ok(Self::from_orders(event.lambda, &tagged))
    }
}

/// Orders of every branch vanishing at λ₀, located from scratch.
pub fn local_vanishing(pencil: &MatrixPencil, lambda0: f64, tol: &Tolerances) -> Result<Vec<Vanishing>> {
    let anchors = branch_anchors(pencil, lambda0, tol)?;
    anchors.iter().map(|a| order_of_vanishing(pencil, lambda0, a, tol)).collect()
}

/// Graphical signature at λ₀, summed over the branches vanishing there.
pub fn value_signature(pencil: &MatrixPencil, lambda0: f64, tol: &Tolerances) -> Result<KreinReport> {
    let v = local_vanishing(pencil, lambda0, tol)?;
    let orders: Vec<(usize, usize, i8)> = v.iter().enumerate().map(|(i, x)| (i, x.order, x.eta)).collect();
    let at = v.iter().min_by_key(|x| x.order).map(|x| x.lambda0).unwrap_or(lambda0);
    Ok(KreinReport::from_orders(at, &orders))
}

/// A chain u^[0], …, u^[m-1] of root vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RootChain {
    pub lambda0: f64,
    pub vectors: Vec<Vec<C64>>,
    /// max over q of ‖Σ_ℓ T_ℓ u^[q-ℓ]‖ with a unit starter.
    pub residual: f64,
}

impl RootChain {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn starter(&self) -> &[C64] {
        &self.vectors[0]
    }
}

/// Maximal chains with lengths m₁ ≥ m₂ ≥ … realizing the canonical flag.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalChainSet {
    pub lambda0: f64,
    pub chains: Vec<RootChain>,
}

impl CanonicalChainSet {
    pub fn lengths(&self) -> Vec<usize> {
        self.chains.iter().map(|c| c.len()).collect()
    }

    pub fn alpha(&self) -> usize {
        self.chains.iter().map(|c| c.len()).sum()
    }

    pub fn residual(&self) -> f64 {
        self.chains.iter().fold(0.0, |m, c| m.max(c.residual))
    }

    /// Orthonormal basis of X_s, spanned by starters of chains of length ≥ s.
    pub fn flag(&self, s: usize) -> Result<Vec<Vec<C64>>> {
        let starters: Vec<Vec<C64>> =
            self.chains.iter().filter(|c| c.len() >= s).map(|c| c.vectors[0].clone()).collect();
        let n = self.chains.first().map(|c| c.vectors[0].len()).unwrap_or(0);
        orthonormalize(n, &starters, 1e-8)
    }
}

/// Stacked block lower-triangular Toeplitz matrix with block (q, r) = T_{q-r}.
fn toeplitz(taylor: &[CMatrix], s: usize) -> CMatrix {
    let n = taylor[0].rows();
    let mut t = CMatrix::zeros(s * n, s * n);
    for q in 0..s {
        for r in 0..=q {
            t.set_block(q * n, r * n, &taylor[q - r]);
        }
    }
    t
}

/// max_q ‖Σ_{ℓ≤q} T_ℓ u^[q-ℓ]‖.
pub fn chain_residual(taylor: &[CMatrix], vectors: &[Vec<C64>]) -> f64 {
    let n = vectors[0].len();
    let mut worst: f64 = 0.0;
    for q in 0..vectors.len() {
        let mut acc = vec![C64::new(0.0, 0.0); n];
        for l in 0..=q {
            if l >= taylor.len() {
                break;
            }
            let tv = taylor[l].mul_vec(&vectors[q - l]);
            for (a, b) in acc.iter_mut().zip(tv) {
                *a += b;
            }
        }
        worst = worst.max(norm(&acc));
    }
    worst
}

/// Canonical set of chains of a polynomial pencil at λ₀.
pub fn root_chains(pencil: &MatrixPencil, lambda0: f64, tol: &Tolerances) -> Result<CanonicalChainSet> {
    let p = pencil.degree().ok_or(Error::NotPolynomial)?;
    let n = pencil.dim();
    let taylor = pencil.taylor_coefficients(C64::new(lambda0, 0.0), p * n + 2);
    let scale = taylor[..=p].iter().map(|t| t.frobenius_norm()).fold(0.0, f64::max);
    chains_at_scale(&taylor, lambda0, |_| scale, tol)
}

/// Canonical set of chains from the Taylor coefficients 𝓛^{(ℓ)}(λ₀)/ℓ!.
///
/// X_s is the first-block projection of the kernel of the s-block Toeplitz system.
/// Starters are picked from X_s orthogonally to the starters already chosen for longer
/// chains; the remaining chain vectors are minimum-norm least-squares solutions.
///
/// Rank decisions for the s-block system are measured against the coefficients it is
/// built from plus the next one, widened up to the first coefficient that is not negligible
/// next to the largest, so a series with several vanishing leading terms still has a scale.
pub fn root_chains_taylor(taylor: &[CMatrix], lambda0: f64, tol: &Tolerances) -> Result<CanonicalChainSet> {
    let norms: Vec<f64> = taylor.iter().map(|t| t.frobenius_norm()).collect();
    let big = norms.iter().copied().fold(0.0, f64::max);
    let first = norms.iter().position(|&x| x > f64::EPSILON.sqrt() * big).unwrap_or(0);
    let scale = |s: usize| {
        let end = s.max(first).min(norms.len() - 1);
        norms[..=end].iter().copied().fold(0.0, f64::max)
    };
    chains_at_scale(taylor, lambda0, scale, tol)
}

/// Canonical set from a series whose rank decisions at block size s are measured against
/// the coefficients up to order s, never below `floor`. Suited to series with growing tails,
/// such as the resolvent shift (use `floor = 1`).
pub fn root_chains_series(taylor: &[CMatrix], lambda0: f64, floor: f64, tol: &Tolerances) -> Result<CanonicalChainSet> {
    let norms: Vec<f64> = taylor.iter().map(|t| t.frobenius_norm()).collect();
    let scale = |s: usize| norms[..=s.min(norms.len() - 1)].iter().copied().fold(floor, f64::max);
    chains_at_scale(taylor, lambda0, scale, tol)
}

fn chains_at_scale(
    taylor: &[CMatrix],
    lambda0: f64,
    scale: impl Fn(usize) -> f64,
    tol: &Tolerances,
) -> Result<CanonicalChainSet> {
    let n = taylor[0].rows();
    let degenerate = Error::FlagDegenerate { lambda: lambda0 };
    let mut flags: Vec<Vec<Vec<C64>>> = Vec::new();
    let mut s = 1;
    loop {
        if s > taylor.len() {
            return Err(Error::InvalidArgument { what: "not enough Taylor coefficients to close the flag" });
        }
        let scale = scale(s);
        let t = toeplitz(taylor, s);
        let d = svd(&t)?;
        if rank_ambiguous_scaled(&d.s, tol.rank, 10.0, scale) {
            return Err(degenerate);
        }
        let r = rank_of_scaled(&d.s, tol.rank, scale);
        let firsts: Vec<Vec<C64>> = (r..s * n).map(|j| d.v.column(j)[..n].to_vec()).collect();
        let xs = if firsts.is_empty() {
            Vec::new()
        } else {
            // kernel columns are orthonormal, so these singular values live on [0, 1]
            let proj = svd(&CMatrix::from_columns(n, &firsts))?;
            if proj.s.iter().any(|&x| x > tol.rank / 10.0 && x <= tol.rank * 10.0) {
                return Err(degenerate);
            }
            let rk = proj.s.iter().filter(|&&x| x > tol.rank).count();
            (0..rk).map(|j| proj.u.column(j)).collect()
        };
        if xs.is_empty() {
            break;
        }
        flags.push(xs);
        s += 1;
    }

    let mut chosen: Vec<(Vec<C64>, usize)> = Vec::new();
    for len in (1..=flags.len()).rev() {
        let xs = &flags[len - 1];
        let need = xs.len().saturating_sub(chosen.len());
        if need == 0 {
            continue;
        }
        // complement of the chosen starters inside X_len
        let mut cands: Vec<Vec<C64>> = Vec::new();
        for x in xs {
            let mut v = x.clone();
            for (c, _) in &chosen {
                let a = crate::linalg::dot(c, &v);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= ci * a;
                }
            }
            cands.push(v);
        }
        let basis = orthonormalize(n, &cands, tol.rank)?;
        if basis.len() < need {
            return Err(degenerate);
        }
        let already = chosen.len();
        for b in basis.into_iter().take(need) {
            let mut v = b;
            for (c, _) in chosen.iter().take(already) {
                let a = crate::linalg::dot(c, &v);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= ci * a;
                }
            }
            let nv = norm(&v);
            let mut v: Vec<C64> = v.iter().map(|x| x / nv).collect();
            fix_phase(&mut v);
            chosen.push((v, len));
        }
    }

    let mut chains = Vec::with_capacity(chosen.len());
    for (u0, m) in chosen {
        let vectors = complete_chain(taylor, &u0, m, tol)?;
        let residual = chain_residual(taylor, &vectors);
        chains.push(RootChain { lambda0, vectors, residual });
    }
    Ok(CanonicalChainSet { lambda0, chains })
}

/// Minimum-norm solution of the stacked system for u^[1..m-1] given u^[0].
fn complete_chain(taylor: &[CMatrix], u0: &[C64], m: usize, tol: &Tolerances) -> Result<Vec<Vec<C64>>> {
    let n = u0.len();
    let mut vectors = vec![u0.to_vec()];
    if m == 1 {
        return Ok(vectors);
    }
    let t = toeplitz(taylor, m - 1);
    let mut rhs = Vec::with_capacity((m - 1) * n);
    for q in 1..m {
        rhs.extend(taylor[q].mul_vec(u0).into_iter().map(|x| -x));
    }
    let x = lstsq_min_norm(&t, &rhs, tol.rank)?;
    for q in 0..m - 1 {
        vectors.push(x[q * n..(q + 1) * n].to_vec());
    }
    Ok(vectors)
}

/// Taylor coefficients of 𝓜(λ) = I - δ(𝓛(λ) + δI)^{-1} from those of 𝓛.
pub fn resolvent_shift_taylor(taylor: &[CMatrix], delta: f64) -> Result<Vec<CMatrix>> {
    let n = taylor[0].rows();
    let mut shifted = taylor[0].clone();
    shifted.axpy(C64::new(delta, 0.0), &CMatrix::identity(n));
    let r0 = inverse(&shifted)?;
    let mut r: Vec<CMatrix> = vec![r0.clone()];
    for q in 1..taylor.len() {
        let mut acc = CMatrix::zeros(n, n);
        for l in 1..=q {
            acc = acc + &taylor[l] * &r[q - l];
        }
        r.push((&r0 * &acc).scale_real(-1.0));
    }
    let mut out = Vec::with_capacity(taylor.len());
    for (q, rq) in r.iter().enumerate() {
        let mut m = rq.scale_real(-delta);
        if q == 0 {
            m.axpy(C64::new(1.0, 0.0), &CMatrix::identity(n));
        }
        out.push(m);
    }
    Ok(out)
}

/// Gram-matrix Krein indices of one characteristic value.
#[derive(Debug, Clone, PartialEq)]
pub struct GramReport {
    pub lambda0: f64,
    /// (positive, negative, zero) eigenvalue counts of each chain's own Gram block.
    pub per_chain: Vec<(usize, usize, usize)>,
    pub kappa_plus: usize,
    pub kappa_minus: usize,
    pub gram: CMatrix,
}

impl GramReport {
    pub fn kappa(&self) -> i64 {
        self.kappa_plus as i64 - self.kappa_minus as i64
    }
}

/// Columns of (U, U J₀, …, U J₀^{p-1}) stacked, J₀ the Jordan block at λ₀.
fn lift_chain(chain: &[Vec<C64>], lambda0: f64, p: usize) -> Vec<Vec<C64>> {
    let n = chain[0].len();
    let m = chain.len();
    let mut cols = vec![Vec::with_capacity(p * n); m];
    let mut block: Vec<Vec<C64>> = chain.to_vec();
    for _ in 0..p {
        for (c, b) in cols.iter_mut().zip(&block) {
            c.extend_from_slice(b);
        }
        // column l of U J₀ is λ₀ u_l + u_{l-1}
        let next: Vec<Vec<C64>> = (0..m)
            .map(|l| {
                let mut v: Vec<C64> = block[l].iter().map(|x| x * lambda0).collect();
                if l > 0 {
                    for (a, b) in v.iter_mut().zip(&block[l - 1]) {
                        *a += b;
                    }
                }
                v
            })
            .collect();
        block = next;
    }
    cols
}

fn gram_of(b: &CMatrix, cols: &[Vec<C64>]) -> CMatrix {
    let bc: Vec<Vec<C64>> = cols.iter().map(|c| b.mul_vec(c)).collect();
    CMatrix::from_fn(cols.len(), cols.len(), |j, k| crate::linalg::dot(&cols[j], &bc[k])).hermitian_part()
}

fn gram_inertia(w: &CMatrix, tol: &Tolerances) -> Result<(usize, usize, usize)> {
    let e = hermitian_eigen_with(w, tol)?;
    let zero = tol.inertia_zero * w.frobenius_norm();
    let plus = e.values.iter().filter(|&&x| x > zero).count();
    let minus = e.values.iter().filter(|&&x| x < -zero).count();
    Ok((plus, minus, e.values.len() - plus - minus))
}

/// Krein indices from the indefinite form (·, B ·) on the lifted chains.
/// Totals come from the joint Gram matrix over every chain.
pub fn gram_indices(
    pencil: &MatrixPencil,
    lambda0: f64,
    chains: &CanonicalChainSet,
    tol: &Tolerances,
) -> Result<GramReport> {
    let p = pencil.degree().ok_or(Error::NotPolynomial)?;
    let b = hankel_form(pencil)?;
    let mut all = Vec::new();
    let mut per_chain = Vec::new();
    for c in &chains.chains {
        let cols = lift_chain(&c.vectors, lambda0, p);
        per_chain.push(gram_inertia(&gram_of(&b, &cols), tol)?);
        all.extend(cols);
    }
    let gram = gram_of(&b, &all);
    let (kp, km, kz) = gram_inertia(&gram, tol)?;
    if kz > 0 {
        return Err(Error::DegenerateGram { lambda: lambda0 });
    }
    Ok(GramReport { lambda0, per_chain, kappa_plus: kp, kappa_minus: km, gram })
}

/// sign (𝓛′(λ₀)u, u) for a kernel vector u: the shortcut valid at simple values.
pub fn simple_value_sign(pencil: &MatrixPencil, lambda0: f64, u: &[C64]) -> i8 {
    let d = pencil.derivative(1).evaluate_real(lambda0);
    let q = crate::linalg::dot(u, &d.mul_vec(u)).re;
    if q > 0.0 {
        1
    } else if q < 0.0 {
        -1
    } else {
        0
    }
}

/// Chains built from Taylor coefficients of the eigenvector branches vanishing at λ₀:
/// u^[r] = u_j^{(r)}(λ₀)/r! for a branch of order m_j gives a chain of length m_j.
pub fn chains_from_branch_derivatives(
    pencil: &MatrixPencil,
    lambda0: f64,
    tol: &Tolerances,
) -> Result<CanonicalChainSet> {
    let anchors = branch_anchors(pencil, lambda0, tol)?;
    let orders: Vec<Vanishing> =
        anchors.iter().map(|a| order_of_vanishing(pencil, lambda0, a, tol)).collect::<Result<_>>()?;
    let center = orders.iter().min_by_key(|v| v.order).map(|v| v.lambda0).unwrap_or(lambda0);
    let max_m = orders.iter().map(|v| v.order).max().unwrap_or(1);
    let taylor = pencil.taylor_coefficients(C64::new(center, 0.0), max_m + 1);
    let mut chains = Vec::with_capacity(anchors.len());
    for (a, v) in anchors.iter().zip(&orders) {
        let mut vectors = branch_taylor_vectors(pencil, center, a, v.order, tol)?;
        let s = norm(&vectors[0]);
        for u in vectors.iter_mut() {
            for x in u.iter_mut() {
                *x /= s;
            }
        }
        let residual = chain_residual(&taylor, &vectors);
        chains.push(RootChain { lambda0: center, vectors, residual });
    }
    chains.sort_by(|a, b| b.len().cmp(&a.len()));
    Ok(CanonicalChainSet { lambda0: center, chains })
}

/// Another canonical set of the same root space: each chain gains multiples of
/// (shifted) prefixes of chains at least as long, and is rescaled. `coeff` supplies the
/// mixing coefficients, e.g. from a seeded generator.
pub fn recombine_chains(set: &CanonicalChainSet, mut coeff: impl FnMut() -> C64) -> CanonicalChainSet {
    let mut out = set.clone();
    for (a, ca) in set.chains.iter().enumerate() {
        let m = ca.len();
        let mut vs = ca.vectors.clone();
        for (b, cb) in set.chains.iter().enumerate() {
            // shift t: u_a^[r] += c · u_b^[r-t], valid when m_b ≥ m - t
            for t in 0..m {
                if b == a && t == 0 {
                    continue;
                }
                if cb.len() + t < m || (t == 0 && cb.len() < m) {
                    continue;
                }
                let c = coeff();
                for r in t..m {
                    for (x, y) in vs[r].iter_mut().zip(&cb.vectors[r - t]) {
                        *x += y * c;
                    }
                }
            }
        }
        let scale = coeff();
        let scale = if scale.norm() < 0.1 { C64::new(1.0, 0.0) } else { scale };
        for v in vs.iter_mut() {
            for x in v.iter_mut() {
                *x *= scale;
            }
        }
        out.chains[a].vectors = vs;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_principal_angle};

    fn quadratic1() -> MatrixPencil {
        MatrixPencil::polynomial(vec![
            CMatrix::from_real_rows(&[&[1.0, 2.0][..], &[2.0, 3.0]]),
            CMatrix::from_real_rows(&[&[-2.0, -2.0][..], &[-2.0, 0.0]]),
            CMatrix::identity(2),
        ])
        .unwrap()
    }

    fn quadratic2() -> MatrixPencil {
        MatrixPencil::polynomial(vec![
            CMatrix::from_real_rows(&[&[0.0, 1.0][..], &[1.0, 0.0]]),
            CMatrix::from_real_rows(&[&[-1.0, -1.0][..], &[-1.0, -1.0]]),
            CMatrix::identity(2),
        ])
        .unwrap()
    }

    #[test]
    fn graphical_index_table() {
        assert_eq!(graphical_indices(1, 1), (1, 0));
        assert_eq!(graphical_indices(2, -1), (1, 1));
        assert_eq!(graphical_indices(3, -1), (1, 2));
    }

    #[test]
    fn quadratic1_chain() {
        let tol = Tolerances::default();
        let set = root_chains(&quadratic1(), 1.0, &tol).unwrap();
        assert_eq!(set.lengths(), vec![3]);
        let u = &set.chains[0].vectors;
        assert!(u[0][1].norm() < 1e-12 && (u[0][0].norm() - 1.0).abs() < 1e-12);
        // second component of u^[1] is 1/2 for a unit starter (up to its phase)
        assert!((u[1][1] / u[0][0] - c(0.5, 0.0)).norm() < 1e-10, "{u:?}");
        assert!(set.residual() < 1e-12);
        let minus = root_chains(&quadratic1(), -1.0, &tol).unwrap();
        assert_eq!(minus.lengths(), vec![1]);
        let s = &minus.chains[0].vectors[0];
        assert!((s[0] + s[1]).norm() < 1e-12);
    }

    #[test]
    fn quadratic2_chains_and_flags() {
        let tol = Tolerances::default();
        let set = root_chains(&quadratic2(), 1.0, &tol).unwrap();
        assert_eq!(set.lengths(), vec![2, 1]);
        let s = &set.chains[0].vectors[0];
        assert!((s[0] - s[1]).norm() < 1e-10);
        let fromb = chains_from_branch_derivatives(&quadratic2(), 1.0, &tol).unwrap();
        assert_eq!(fromb.lengths(), vec![2, 1]);
        assert!(fromb.residual() < 1e-6, "{}", fromb.residual());
        for k in 1..=2 {
            let a = max_principal_angle(&set.flag(k).unwrap(), &fromb.flag(k).unwrap()).unwrap();
            assert!(a < 1e-6, "flag {k}: {a}");
        }
    }

    #[test]
    fn gram_matches_graphical_on_quadratic1() {
        let tol = Tolerances::default();
        let p = quadratic1();
        for l0 in [1.0, -1.0] {
            let set = root_chains(&p, l0, &tol).unwrap();
            let g = gram_indices(&p, l0, &set, &tol).unwrap();
            let r = value_signature(&p, l0, &tol).unwrap();
            assert_eq!((g.kappa_plus, g.kappa_minus), (r.kappa_plus, r.kappa_minus), "λ₀ = {l0}");
        }
        let fromb = chains_from_branch_derivatives(&p, 1.0, &tol).unwrap();
        assert_eq!(fromb.lengths(), vec![3]);
        assert!(fromb.residual() < 1e-6, "{}", fromb.residual());
    }

    #[test]
    fn resolvent_shift_preserves_chains() {
        let tol = Tolerances::default();
        let p = quadratic1();
        let t = p.taylor_coefficients(c(1.0, 0.0), 6);
        let m = resolvent_shift_taylor(&t, 0.5).unwrap();
        let a = root_chains_taylor(&t, 1.0, &tol).unwrap();
        let b = root_chains_series(&m, 1.0, 1.0, &tol).unwrap();
        assert_eq!(a.lengths(), b.lengths());
        let ang = max_principal_angle(&a.flag(1).unwrap(), &b.flag(1).unwrap()).unwrap();
        assert!(ang < 1e-8);
    }
}
