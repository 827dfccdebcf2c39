//! Characteristic polynomials, simultaneous root iteration and multiplicity clustering.
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use super::matrix::CMatrix;
use crate::error::{Error, Result};
use crate::tol::Tolerances;

const EPS: f64 = f64::EPSILON;

/// Characteristic polynomial det(zI - A), ascending coefficients, monic.
/// Faddeev-LeVerrier recursion.
pub fn char_poly(a: &CMatrix) -> Vec<C64> {
    let n = a.rows();
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    c[n] = C64::new(1.0, 0.0);
    let mut m = CMatrix::zeros(n, n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = a * &m;
        for i in 0..n {
            next[(i, i)] += c[n - k + 1];
        }
        let am = a * &next;
        c[n - k] = -am.trace() / (k as f64);
        m = next;
    }
    c
}

pub fn poly_eval(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Σ |a_k| |z|^k, the scale of rounding errors in `poly_eval`.
pub fn poly_eval_scale(c: &[C64], z: C64) -> f64 {
    let r = z.norm();
    c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

/// Coefficients of p(z0 + x) in x, ascending: entry m is p^{(m)}(z0)/m!.
pub fn taylor_shift(c: &[C64], z0: C64) -> Vec<C64> {
    let mut work = c.to_vec();
    let n = work.len();
    let mut out = Vec::with_capacity(n);
    for m in 0..n {
        // synthetic division of work[m..] by (x - z0); remainder lands in work[m]
        for k in (m..n - 1).rev() {
            let t = work[k + 1] * z0;
            work[k] += t;
        }
        out.push(work[m]);
    }
    out
}

/// All roots of the polynomial (ascending coefficients) by Durand-Kerner iteration.
pub fn poly_roots(c: &[C64]) -> Result<Vec<C64>> {
    let mut deg = c.len().saturating_sub(1);
    while deg > 0 && c[deg] == C64::new(0.0, 0.0) {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = c[deg];
    let mono: Vec<C64> = c[..=deg].iter().map(|&a| a / lead).collect();
    if deg == 1 {
        return Ok(vec![-mono[0]]);
    }
    // Fujiwara-type radius
    let mut radius: f64 = 0.0;
    for (k, a) in mono.iter().enumerate().take(deg) {
        let r = a.norm().powf(1.0 / (deg - k) as f64);
        radius = radius.max(r);
    }
    let radius = (2.0 * radius).max(1e-3);
    let mut z: Vec<C64> = (0..deg)
        .map(|k| {
            let th = 2.0 * core::f64::consts::PI * (k as f64) / (deg as f64) + 0.4;
            C64::from_polar(radius * (0.5 + 0.5 * (k as f64 + 1.0) / deg as f64), th)
        })
        .collect();

    let max_iter = 5000;
    for iter in 0..max_iter {
        let mut max_rel: f64 = 0.0;
        for i in 0..deg {
            let num = poly_eval(&mono, z[i]);
            let mut den = C64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    let mut d = z[i] - z[j];
                    if d == C64::new(0.0, 0.0) {
                        d = C64::new(1e-12 * (1.0 + z[i].norm()), 1e-12);
                    }
                    den *= d;
                }
            }
            let delta = num / den;
            if delta.re.is_finite() && delta.im.is_finite() {
                z[i] -= delta;
                max_rel = max_rel.max(delta.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_rel <= 4.0 * EPS {
            return Ok(z);
        }
        if iter >= 100 && iter % 10 == 0 && backward_ok(&mono, &z) {
            return Ok(z);
        }
    }
    if backward_ok(&mono, &z) {
        Ok(z)
    } else {
        Err(Error::NoConvergence { what: "Durand-Kerner" })
    }
}

fn backward_ok(c: &[C64], z: &[C64]) -> bool {
    z.iter().all(|&zi| poly_eval(c, zi).norm() <= 256.0 * EPS * poly_eval_scale(c, zi))
}

/// Group roots into clusters with multiplicities.
///
/// Two groups merge when the merged spread is below the larger of the floor
/// `floor * (1 + |c|)` and the rounding radius of an m-fold root at the centroid c,
/// `4 (ε_eff S(c) / |p^{(m)}(c)/m!|)^{1/m}`. The second term is what a genuine
/// m-fold root scatters to under working precision, so groups closer than that cannot
/// be told apart from a multiple root anyway.
pub fn cluster_roots(c: &[C64], roots: &[C64], floor: f64) -> Vec<(C64, usize)> {
    let mut groups: Vec<Vec<C64>> = roots.iter().map(|&z| vec![z]).collect();
    loop {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for a in 0..groups.len() {
            for b in (a + 1)..groups.len() {
                let d = (centroid(&groups[a]) - centroid(&groups[b])).norm();
                pairs.push((d, a, b));
            }
        }
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(core::cmp::Ordering::Equal));
        let mut merged = false;
        for &(_, a, b) in &pairs {
            let mut members = groups[a].clone();
            members.extend_from_slice(&groups[b]);
            let cen = centroid(&members);
            let spread = members.iter().fold(0.0f64, |m, z| m.max((*z - cen).norm()));
            if spread <= merge_radius(c, cen, members.len(), floor) {
                groups[a] = members;
                groups.remove(b);
                merged = true;
                break;
            }
        }
        if !merged {
            break;
        }
    }
    let mut out: Vec<(C64, usize)> = groups.iter().map(|g| (refine_multiple(c, g), g.len())).collect();
    out.sort_by(|x, y| {
        x.0.re
            .partial_cmp(&y.0.re)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(x.0.im.partial_cmp(&y.0.im).unwrap_or(core::cmp::Ordering::Equal))
    });
    out
}

// An m-fold root is a simple root of p^{(m-1)}; polish the centroid with Newton on it.
fn refine_multiple(c: &[C64], g: &[C64]) -> C64 {
    let m = g.len();
    let start = centroid(g);
    let spread = g.iter().fold(0.0f64, |s, z| s.max((*z - start).norm()));
    let limit = 2.0 * spread + 1e-14 * (1.0 + start.norm());
    let mut z = start;
    for _ in 0..30 {
        let t = taylor_shift(c, z);
        if m >= t.len() || t[m] == C64::new(0.0, 0.0) {
            break;
        }
        let step = t[m - 1] / (t[m] * m as f64);
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        z -= step;
        if step.norm() <= 4.0 * EPS * (1.0 + z.norm()) {
            break;
        }
    }
    if (z - start).norm() <= limit {
        z
    } else {
        start
    }
}

fn centroid(g: &[C64]) -> C64 {
    g.iter().sum::<C64>() / (g.len() as f64)
}

fn merge_radius(c: &[C64], cen: C64, m: usize, floor: f64) -> f64 {
    let base = floor * (1.0 + cen.norm());
    let cap = 1e-2 * (1.0 + cen.norm());
    let t = taylor_shift(c, cen);
    let lead = if m < t.len() { t[m].norm() } else { 0.0 };
    let s = poly_eval_scale(c, cen);
    let eps_eff = 64.0 * EPS;
    let scatter = if lead > 0.0 {
        4.0 * (eps_eff * s / lead).powf(1.0 / m as f64)
    } else {
        cap
    };
    base.max(scatter.min(cap))
}

/// Eigenvalues of a general square matrix with algebraic multiplicities.
pub fn general_eigenvalues(a: &CMatrix) -> Result<Vec<(C64, usize)>> {
    general_eigenvalues_with(a, &Tolerances::default())
}

pub fn general_eigenvalues_with(a: &CMatrix, tol: &Tolerances) -> Result<Vec<(C64, usize)>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { what: "general_eigenvalues needs a square matrix" });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let s = a.max_abs();
    if s == 0.0 {
        return Ok(vec![(C64::new(0.0, 0.0), n)]);
    }
    let scaled = a.scale_real(1.0 / s);
    let cp = char_poly(&scaled);
    let roots = poly_roots(&cp)?;
    // floor is stated in unscaled units: floor (1 + |λ|) = floor (1 + s|z|)
    let floor_scaled = tol.cluster * (1.0 / s).max(1.0);
    let clusters = cluster_roots(&cp, &roots, floor_scaled);
    Ok(clusters.into_iter().map(|(z, m)| (z * s, m)).collect())
}
