mod common;

use common::*;
use pencilscope_core::linalg::{c, complex_det, general_eigenvalues, hermitian_eigen, inertia};
use pencilscope_core::pencil::{characteristic_values, pencil_derivative, pencil_det, pencil_from_hamiltonian};
use pencilscope_core::{CMatrix, C64};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermitian_reconstruction(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let a = random_hermitian(n, &mut r);
        let e = hermitian_eigen(&a).unwrap();
        let v = CMatrix::from_columns(n, &e.vectors);
        let d = CMatrix::from_real_diag(&e.values);
        let back = &(&v * &d) * &v.adjoint();
        let err = (&back - &a).frobenius_norm() / a.frobenius_norm().max(1e-300);
        prop_assert!(err <= 1e-10, "relative error {err}");
    }

    #[test]
    fn inertia_survives_congruence(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let d: Vec<f64> = (0..n).map(|_| {
            let k: u8 = r.gen_range(0..3);
            match k { 0 => r.gen_range(0.5..2.0), 1 => -r.gen_range(0.5..2.0), _ => 0.0 }
        }).collect();
        let a = hermitian_with_spectrum(&d, &mut r);
        let u = random_unitary(n, &mut r);
        let b = &(&u.adjoint() * &a) * &u;
        let zt = 1e-9 * 4.0 * n as f64;
        prop_assert_eq!(inertia(&a, zt).unwrap(), inertia(&b, zt).unwrap());
        let ia = inertia(&a, zt).unwrap();
        prop_assert_eq!(ia.n_zero, d.iter().filter(|x| **x == 0.0).count());
    }

    #[test]
    fn eigenvalue_product_is_determinant(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let a = random_matrix(n, &mut r);
        let vals = general_eigenvalues(&a).unwrap();
        let prod = vals.iter().fold(c(1.0, 0.0), |p, (z, m)| p * z.powu(*m as u32));
        let det = complex_det(&a);
        prop_assert!((prod - det).norm() <= 1e-8 * det.norm().max(1e-3), "{prod} vs {det}");
    }

    #[test]
    fn spectrum_closed_under_conjugation(seed in any::<u64>(), n in 1usize..4, p in 1usize..4) {
        let mut r = rng(seed);
        let pen = random_pencil(n, p, &mut r);
        let vals = characteristic_values(&pen).unwrap();
        let total: usize = vals.iter().map(|v| v.1).sum();
        prop_assert_eq!(total, n * p);
        for (z, m) in &vals {
            let partner = vals.iter().filter(|(w, _)| (w - z.conj()).norm() <= 1e-5 * (1.0 + z.norm())).map(|v| v.1).sum::<usize>();
            prop_assert_eq!(partner, *m, "no conjugate partner for {}", z);
        }
    }

    #[test]
    fn hamiltonian_values_match_jl(seed in any::<u64>(), half in 2usize..4) {
        let mut r = rng(seed);
        let sys = random_hamiltonian(2 * half, &mut r);
        let pen = pencil_from_hamiltonian(&sys);
        let lam = characteristic_values(&pen).unwrap();
        let nu = general_eigenvalues(&sys.jl()).unwrap();
        prop_assert_eq!(lam.len(), nu.len());
        for (l, m) in &lam {
            // λ is a characteristic value iff -iλ is an eigenvalue of J L
            let target = c(0.0, -1.0) * l;
            let hit = nu.iter().find(|(v, _)| (v - target).norm() <= 1e-6 * (1.0 + v.norm()));
            prop_assert!(hit.is_some(), "{} has no partner", l);
            prop_assert_eq!(hit.unwrap().1, *m);
        }
    }

    #[test]
    fn derivative_matches_central_difference(seed in any::<u64>(), n in 1usize..4, p in 1usize..4) {
        let mut r = rng(seed);
        let pen = random_pencil(n, p, &mut r);
        let z = random_complex(&mut r);
        let h = 1e-5;
        let fd = (&pen.evaluate(z + h) - &pen.evaluate(z - h)).scale_real(0.5 / h);
        let d = pencil_derivative(&pen, 1).evaluate(z);
        let err = (&fd - &d).frobenius_norm();
        prop_assert!(err <= 1e-7 * (1.0 + d.frobenius_norm()), "{err}");
    }

    #[test]
    fn determinant_factorizes(seed in any::<u64>(), n in 1usize..4, p in 1usize..4) {
        let mut r = rng(seed);
        let pen = random_pencil(n, p, &mut r);
        let vals = characteristic_values(&pen).unwrap();
        let lp = pen.coeffs().unwrap()[p].clone();
        let probe = random_complex(&mut r).scale(2.0) + c(0.0, 0.5);
        let prod = vals.iter().fold(complex_det(&lp), |acc: C64, (z, m)| acc * (probe - z).powu(*m as u32));
        let det = pencil_det(&pen, probe);
        prop_assert!((prod - det).norm() <= 1e-6 * det.norm(), "{prod} vs {det}");
    }
}
