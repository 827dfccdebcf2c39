//! Dense complex kernels for small matrices.
mod eigen;
mod lu;
mod matrix;
mod poly;
mod svd;

pub use num_complex::Complex64 as C64;

pub use eigen::{hermitian_eigen, hermitian_eigen_with, inertia, inertia_default, inertia_of_values, HermitianEigen, Inertia};
pub use lu::{complex_det, hadamard_bound, inverse, solve, Lu};
pub use matrix::{axpy_vec, dot, fix_phase, norm, normalized, CMatrix};
pub use poly::{
    char_poly, cluster_roots, general_eigenvalues, general_eigenvalues_with, poly_eval, poly_eval_scale, poly_roots,
    taylor_shift,
};
pub use svd::{
    lstsq_min_norm, max_principal_angle, max_principal_sine, null_space, orthonormalize, range_basis, rank_ambiguous, rank_ambiguous_scaled, rank_of_scaled,
    rank_of, svd, Svd,
};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn identity_eigenvalues() {
        let e = hermitian_eigen(&CMatrix::identity(4)).unwrap();
        assert!(e.values.iter().all(|&x| close(x, 1.0, 1e-15)));
    }

    #[test]
    fn diagonal_eigenvalues() {
        let e = hermitian_eigen(&CMatrix::from_real_diag(&[2.0, 0.5, 1.5, 1.0])).unwrap();
        for (x, y) in e.values.iter().zip([0.5, 1.0, 1.5, 2.0]) {
            assert!(close(*x, y, 1e-15));
        }
    }

    #[test]
    fn pauli_x_eigenvalues() {
        let sx = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = hermitian_eigen(&sx).unwrap();
        assert!(close(e.values[0], -1.0, 1e-15) && close(e.values[1], 1.0, 1e-15));
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let a = CMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, -1.0), c(0.0, 0.5)],
            vec![c(1.0, 1.0), c(-1.0, 0.0), c(0.3, 0.0)],
            vec![c(0.0, -0.5), c(0.3, 0.0), c(0.7, 0.0)],
        ]);
        let e = hermitian_eigen(&a).unwrap();
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            let av = a.mul_vec(v);
            let r: Vec<C64> = av.iter().zip(v).map(|(&x, &y)| x - y * *lam).collect();
            assert!(norm(&r) < 1e-13);
        }
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(&e.vectors[i], &e.vectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((d - c(target, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn not_hermitian_rejected() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(hermitian_eigen(&a), Err(crate::Error::NotHermitian { .. })));
    }

    #[test]
    fn determinants() {
        assert_eq!(complex_det(&CMatrix::identity(3)), c(1.0, 0.0));
        let d = complex_det(&CMatrix::from_diag(&[c(2.0, 0.0), c(0.0, 3.0)]));
        assert!((d - c(0.0, 6.0)).norm() < 1e-15);
    }

    #[test]
    fn inertia_examples() {
        let i1 = inertia_default(&CMatrix::from_real_diag(&[-1.0, 2.0, 1.0, -2.0])).unwrap();
        assert_eq!((i1.n_plus, i1.n_minus, i1.n_zero), (2, 2, 0));
        let i2 = inertia_default(&CMatrix::from_real_diag(&[-0.5, -1.0, -1.5, -2.0])).unwrap();
        assert_eq!((i2.n_plus, i2.n_minus, i2.n_zero), (0, 4, 0));
        let i3 = inertia(&CMatrix::zeros(3, 3), 1e-12).unwrap();
        assert_eq!((i3.n_plus, i3.n_minus, i3.n_zero), (0, 0, 3));
    }

    #[test]
    fn general_eigen_identity() {
        let ev = general_eigenvalues(&CMatrix::identity(3)).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].1, 3);
        assert!((ev[0].0 - c(1.0, 0.0)).norm() < 1e-12, "{:?}", ev);
    }

    #[test]
    fn general_eigen_triple_root() {
        // companion-like matrix with (z-1)^3 (z+1)
        let a = CMatrix::from_real_rows(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[1.0, -2.0, 0.0, 2.0],
        ]);
        let ev = general_eigenvalues(&a).unwrap();
        assert_eq!(ev.len(), 2, "{:?}", ev);
        assert!((ev[0].0 - c(-1.0, 0.0)).norm() < 1e-10 && ev[0].1 == 1);
        assert!((ev[1].0 - c(1.0, 0.0)).norm() < 1e-10 && ev[1].1 == 3, "{:?}", ev);
    }

    #[test]
    fn taylor_shift_matches_derivatives() {
        // p = 1 + 2z + 3z^2 at z0 = 2: p = 17, p' = 14, p''/2 = 3
        let t = taylor_shift(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], c(2.0, 0.0));
        assert!((t[0] - c(17.0, 0.0)).norm() < 1e-12);
        assert!((t[1] - c(14.0, 0.0)).norm() < 1e-12);
        assert!((t[2] - c(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn svd_null_space_and_lstsq() {
        let a = CMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let ns = null_space(&a, 1e-8).unwrap();
        assert_eq!(ns.len(), 1);
        let v = &ns[0];
        assert!((v[0] + v[1]).norm() < 1e-12);
        let x = lstsq_min_norm(&a, &[c(2.0, 0.0), c(2.0, 0.0)], 1e-8).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-12 && (x[1] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn principal_angle_of_rotated_line() {
        let a = vec![vec![c(1.0, 0.0), c(0.0, 0.0)]];
        let t: f64 = 1e-3;
        let b = vec![vec![c(t.cos(), 0.0), c(t.sin(), 0.0)]];
        let ang = max_principal_angle(&a, &b).unwrap();
        assert!((ang - t).abs() < 1e-12);
    }
}
