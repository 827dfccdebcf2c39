mod common;

use common::*;
use pencilscope_core::branches::{crossings_in, order_of_vanishing, branch_anchors};
use pencilscope_core::krein::{
    gram_indices, recombine_chains, resolvent_shift_taylor, root_chains, root_chains_series, root_chains_taylor, value_signature,
    CanonicalChainSet,
};
use pencilscope_core::linalg::{hermitian_eigen, max_principal_angle, C64};
use pencilscope_core::pencil::{characteristic_values, pencil_from_hamiltonian, real_characteristic_values, spectral_bound};
use pencilscope_core::Tolerances;
use proptest::prelude::*;
use rand::Rng;

fn window(bound: f64) -> (f64, f64) {
    let w = 1.1 * bound + 0.1;
    (-w, w)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn crossing_multiplicities_match_real_spectrum(seed in any::<u64>(), n in 1usize..5, p in 1usize..4) {
        let mut r = rng(seed);
        let pen = random_pencil(n, p, &mut r);
        prop_assume!(has_simple_separated_spectrum(&pen));
        let tol = Tolerances::default();
        let reals = real_characteristic_values(&characteristic_values(&pen).unwrap(), &tol);
        let (lo, hi) = window(spectral_bound(&pen).unwrap());
        let (fam, events) = crossings_in(&pen, lo, hi, 400, &tol).unwrap();
        let total: usize = events.iter().map(|e| e.alpha().unwrap()).sum();
        prop_assert_eq!(total, reals.iter().map(|x| x.1).sum::<usize>());
        // matching is a permutation of the sorted spectrum at every grid point
        for (i, &x) in fam.grid.iter().enumerate().step_by(37) {
            let mut got: Vec<f64> = (0..fam.n_branches()).map(|j| fam.values[j][i]).collect();
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let want = hermitian_eigen(&pen.evaluate_real(x)).unwrap().values;
            for (a, b) in got.iter().zip(&want) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn real_hamiltonian_crossings_are_mirrored(seed in any::<u64>(), half in 2usize..4) {
        let mut r = rng(seed);
        let sys = random_real_hamiltonian(2 * half, &mut r);
        let pen = pencil_from_hamiltonian(&sys);
        prop_assume!(has_simple_separated_spectrum(&pen));
        let tol = Tolerances::default();
        let (lo, hi) = window(spectral_bound(&pen).unwrap());
        let (_, events) = crossings_in(&pen, lo, hi, 400, &tol).unwrap();
        let total: usize = events.iter().map(|e| e.alpha().unwrap()).sum();
        prop_assert_eq!(total % 2, 0);
        for e in &events {
            let mirror = events.iter().find(|f| (f.lambda + e.lambda).abs() <= 1e-6 * (1.0 + e.lambda.abs()));
            prop_assert!(mirror.is_some(), "no mirror for {}", e.lambda);
            let mut a: Vec<usize> = e.orders().unwrap().iter().map(|o| o.0).collect();
            let mut b: Vec<usize> = mirror.unwrap().orders().unwrap().iter().map(|o| o.0).collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn gram_and_graphical_indices_agree(seed in any::<u64>(), n in 1usize..5, p in 1usize..4) {
        let mut r = rng(seed);
        let pen = random_pencil(n, p, &mut r);
        prop_assume!(has_simple_separated_spectrum(&pen));
        let tol = Tolerances::default();
        for (x, m) in real_characteristic_values(&characteristic_values(&pen).unwrap(), &tol) {
            let g = value_signature(&pen, x, &tol).unwrap();
            let chains = root_chains(&pen, x, &tol).unwrap();
            let w = gram_indices(&pen, x, &chains, &tol).unwrap();
            prop_assert_eq!((w.kappa_plus, w.kappa_minus), (g.kappa_plus, g.kappa_minus), "λ₀ = {}", x);
            prop_assert_eq!(w.kappa_plus + w.kappa_minus, m);
            for (pl, mi, _) in &w.per_chain {
                prop_assert!((*pl as i64 - *mi as i64).abs() <= 1);
            }
        }
    }

    #[test]
    fn resolvent_shift_keeps_chains(seed in any::<u64>(), n in 1usize..4, p in 1usize..3) {
        let mut r = rng(seed);
        let pen = random_pencil(n, p, &mut r);
        prop_assume!(has_simple_separated_spectrum(&pen));
        let tol = Tolerances::default();
        let delta = r.gen_range(0.3..1.0);
        for (x, _) in real_characteristic_values(&characteristic_values(&pen).unwrap(), &tol) {
            let t = pen.taylor_coefficients(C64::new(x, 0.0), p * n + 2);
            let a = root_chains_taylor(&t, x, &tol).unwrap();
            let b = root_chains_series(&resolvent_shift_taylor(&t, delta).unwrap(), x, 1.0, &tol).unwrap();
            prop_assert_eq!(a.lengths(), b.lengths());
            let ang = max_principal_angle(&a.flag(1).unwrap(), &b.flag(1).unwrap()).unwrap();
            prop_assert!(ang <= 1e-6, "{}", ang);
        }
    }
}

/// Pencils built around a known multiple real value: diag blocks with prescribed orders, conjugated.
fn structured_pencil(orders: &[usize], signs: &[f64], r: &mut rand_chacha::ChaCha8Rng) -> pencilscope_core::pencil::MatrixPencil {
    // L(λ) = U diag(s_j (λ - 1)^{m_j} + ...) U*, written as a polynomial of degree max m_j
    let n = orders.len();
    let p = *orders.iter().max().unwrap();
    let u = random_unitary(n, r);
    let mut coeffs = Vec::new();
    for k in 0..=p {
        let d: Vec<f64> = orders
            .iter()
            .zip(signs)
            .map(|(&m, &s)| {
                // coefficient of λ^k in s (λ - 1)^m, plus (λ - 1)^p as degree padding on shorter blocks
                let binom = if k <= m { binomial(m, k) * (-1f64).powi((m - k) as i32) } else { 0.0 };
                let pad = if m < p { binomial(p, k) * (-1f64).powi((p - k) as i32) } else { 0.0 };
                s * binom + pad
            })
            .collect();
        coeffs.push((&(&u * &pencilscope_core::CMatrix::from_real_diag(&d)) * &u.adjoint()).hermitian_part());
    }
    pencilscope_core::pencil::MatrixPencil::polynomial(coeffs).unwrap()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn signature_pair(set: &CanonicalChainSet, pen: &pencilscope_core::pencil::MatrixPencil, tol: &Tolerances) -> (usize, usize) {
    let g = gram_indices(pen, set.lambda0, set, tol).unwrap();
    (g.kappa_plus, g.kappa_minus)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn chain_lengths_match_branch_orders(seed in any::<u64>(), m1 in 1usize..4, m2 in 1usize..3, s1 in prop::bool::ANY, s2 in prop::bool::ANY) {
        let mut r = rng(seed);
        let signs = [if s1 { 1.0 } else { -1.0 }, if s2 { 1.0 } else { -1.0 }];
        let pen = structured_pencil(&[m1, m2], &signs, &mut r);
        let tol = Tolerances::default();
        let chains = root_chains(&pen, 1.0, &tol).unwrap();
        let mut lengths = chains.lengths();
        let anchors = branch_anchors(&pen, 1.0, &tol).unwrap();
        let mut orders: Vec<usize> = anchors.iter().map(|a| order_of_vanishing(&pen, 1.0, a, &tol).unwrap().order).collect();
        lengths.sort();
        orders.sort();
        prop_assert_eq!(&lengths, &orders);
        let mut want = vec![m1, m2];
        want.sort();
        prop_assert_eq!(lengths, want);
    }

    #[test]
    fn krein_indices_do_not_depend_on_the_chain_choice(seed in any::<u64>(), m1 in 1usize..4, m2 in 1usize..4, s1 in prop::bool::ANY, s2 in prop::bool::ANY) {
        let mut r = rng(seed);
        let signs = [if s1 { 1.0 } else { -1.0 }, if s2 { 1.0 } else { -1.0 }];
        let pen = structured_pencil(&[m1, m2], &signs, &mut r);
        let tol = Tolerances::default();
        let chains = root_chains(&pen, 1.0, &tol).unwrap();
        let base = signature_pair(&chains, &pen, &tol);
        let g = value_signature(&pen, 1.0, &tol).unwrap();
        prop_assert_eq!(base, (g.kappa_plus, g.kappa_minus));
        for _ in 0..3 {
            let mixed = recombine_chains(&chains, || C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
            prop_assert_eq!(signature_pair(&mixed, &pen, &tol), base);
        }
    }
}
