#![allow(dead_code)]

use pencilscope_core::linalg::{c, orthonormalize};
use pencilscope_core::pencil::{characteristic_values, HamiltonianSystem, MatrixPencil};
use pencilscope_core::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| random_complex(rng))
}

pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    random_matrix(n, rng).hermitian_part()
}

pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    loop {
        let cols: Vec<Vec<C64>> = (0..n).map(|_| (0..n).map(|_| random_complex(rng)).collect()).collect();
        let q = orthonormalize(n, &cols, 1e-6).unwrap();
        if q.len() == n {
            return CMatrix::from_columns(n, &q);
        }
    }
}

/// U diag(d) U* for a random unitary U.
pub fn hermitian_with_spectrum(d: &[f64], rng: &mut ChaCha8Rng) -> CMatrix {
    let u = random_unitary(d.len(), rng);
    (&(&u * &CMatrix::from_real_diag(d)) * &u.adjoint()).hermitian_part()
}

/// Hermitian with eigenvalues of random sign and modulus in [0.5, 2].
pub fn random_invertible_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let d: Vec<f64> = (0..n)
        .map(|_| {
            let m = rng.gen_range(0.5..2.0);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect();
    hermitian_with_spectrum(&d, rng)
}

/// Selfadjoint polynomial pencil with invertible, well-conditioned leading coefficient.
pub fn random_pencil(n: usize, p: usize, rng: &mut ChaCha8Rng) -> MatrixPencil {
    let mut coeffs: Vec<CMatrix> = (0..p).map(|_| random_hermitian(n, rng)).collect();
    coeffs.push(random_invertible_hermitian(n, rng));
    MatrixPencil::polynomial(coeffs).unwrap()
}

/// J = i H with H Hermitian invertible, L Hermitian.
pub fn random_hamiltonian(n: usize, rng: &mut ChaCha8Rng) -> HamiltonianSystem {
    let h = random_invertible_hermitian(n, rng);
    let j = h.scale(c(0.0, 1.0));
    let j = (&j - &j.adjoint()).scale_real(0.5);
    let l = random_hermitian(n, rng).scale_real(2.0);
    HamiltonianSystem::new(j, l).unwrap()
}

/// Canonical J with real L.
pub fn random_real_hamiltonian(n: usize, rng: &mut ChaCha8Rng) -> HamiltonianSystem {
    let half = n / 2;
    let mut j = CMatrix::zeros(n, n);
    for i in 0..half {
        j[(i, i + half)] = c(1.0, 0.0);
        j[(i + half, i)] = c(-1.0, 0.0);
    }
    let a = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), 0.0));
    let l = (&a + &a.transpose()).scale_real(1.0);
    HamiltonianSystem::new(j, l).unwrap()
}

/// Every characteristic value simple, real ones separated from each other, from 0
/// and from the non-real ones, and no non-real value hugging the real axis.
pub fn has_simple_separated_spectrum(pencil: &MatrixPencil) -> bool {
    let Ok(vals) = characteristic_values(pencil) else { return false };
    if vals.iter().any(|(_, m)| *m != 1) {
        return false;
    }
    separated(&vals, 1e-2)
}

pub fn separated(vals: &[(C64, usize)], gap: f64) -> bool {
    for (i, (a, _)) in vals.iter().enumerate() {
        let s = gap * (1.0 + a.norm());
        if a.im.abs() > 1e-9 * (1.0 + a.norm()) && a.im.abs() < s {
            return false;
        }
        if a.im.abs() <= 1e-9 * (1.0 + a.norm()) && a.re.abs() < s {
            return false;
        }
        if vals.iter().skip(i + 1).any(|(b, _)| (a - b).norm() < s) {
            return false;
        }
    }
    true
}
