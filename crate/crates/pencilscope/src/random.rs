//! Seeded random problems for property suites.
use pencilscope_core::linalg::orthonormalize;
use pencilscope_core::pencil::{characteristic_values, HamiltonianSystem, MatrixPencil};
use pencilscope_core::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(r: &mut ChaCha8Rng) -> C64 {
    C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

pub fn matrix(n: usize, r: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| complex(r))
}

pub fn hermitian(n: usize, r: &mut ChaCha8Rng) -> CMatrix {
    matrix(n, r).hermitian_part()
}

pub fn unitary(n: usize, r: &mut ChaCha8Rng) -> CMatrix {
    loop {
        let cols: Vec<Vec<C64>> = (0..n).map(|_| (0..n).map(|_| complex(r)).collect()).collect();
        let q = orthonormalize(n, &cols, 1e-6).expect("orthonormalize");
        if q.len() == n {
            return CMatrix::from_columns(n, &q);
        }
    }
}

/// U diag(d) U*, symmetrized.
pub fn with_spectrum(d: &[f64], r: &mut ChaCha8Rng) -> CMatrix {
    let u = unitary(d.len(), r);
    (&(&u * &CMatrix::from_real_diag(d)) * &u.adjoint()).hermitian_part()
}

/// Eigenvalues of random sign with modulus in [0.5, 2].
pub fn invertible_hermitian(n: usize, r: &mut ChaCha8Rng) -> CMatrix {
    let d: Vec<f64> = (0..n).map(|_| if r.gen_bool(0.5) { 1.0 } else { -1.0 } * r.gen_range(0.5..2.0)).collect();
    with_spectrum(&d, r)
}

/// Selfadjoint polynomial pencil of degree p with a well-conditioned leading coefficient.
pub fn pencil(n: usize, p: usize, r: &mut ChaCha8Rng) -> MatrixPencil {
    let mut coeffs: Vec<CMatrix> = (0..p).map(|_| hermitian(n, r)).collect();
    coeffs.push(invertible_hermitian(n, r));
    MatrixPencil::polynomial(coeffs).expect("square coefficients")
}

/// J = i H with H Hermitian invertible, L Hermitian.
pub fn hamiltonian(n: usize, r: &mut ChaCha8Rng) -> HamiltonianSystem {
    let h = invertible_hermitian(n, r);
    let j = h.scale(C64::new(0.0, 1.0));
    let j = (&j - &j.adjoint()).scale_real(0.5);
    let l = hermitian(n, r).scale_real(2.0);
    HamiltonianSystem::new(j, l).expect("valid Hamiltonian")
}

/// All characteristic values simple, real ones at least `gap (1 + |λ|)` from each other,
/// from zero and from the non-real ones, and no non-real value hugging the real axis.
pub fn simple_separated(pencil: &MatrixPencil, gap: f64) -> bool {
    let Ok(vals) = characteristic_values(pencil) else { return false };
    if vals.iter().any(|v| v.1 != 1) {
        return false;
    }
    for (i, (a, _)) in vals.iter().enumerate() {
        let s = gap * (1.0 + a.norm());
        let real = a.im.abs() <= 1e-9 * (1.0 + a.norm());
        if (!real && a.im.abs() < s) || (real && a.re.abs() < s) {
            return false;
        }
        if vals.iter().skip(i + 1).any(|(b, _)| (a - b).norm() < s) {
            return false;
        }
    }
    true
}
