//! Real eigenvalue branches μ_j(λ) of a selfadjoint pencil, their zero crossings and
//! the order to which each branch vanishes there.
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::diff::{factorial, polyfit, Estimate, Stencil};
use crate::error::{Error, Result};
use crate::linalg::{dot, hermitian_eigen_with, norm, HermitianEigen};
use crate::pencil::{is_selfadjoint_with, MatrixPencil};
use crate::tol::Tolerances;

const EPS: f64 = f64::EPSILON;

/// One point on a branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub lambda: f64,
    pub mu: f64,
    pub vector: Vec<C64>,
}

/// Continuity-matched branches on a real grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchFamily {
    pub grid: Vec<f64>,
    /// `values[j][i]` is branch j at `grid[i]`.
    pub values: Vec<Vec<f64>>,
    pub vectors: Vec<Vec<Vec<C64>>>,
    /// `permutations[i][j]`: position of branch j in the ascending spectrum at `grid[i]`.
    pub permutations: Vec<Vec<usize>>,
    /// Smallest matched overlap over all steps.
    pub min_overlap: f64,
}

impl BranchFamily {
    pub fn n_branches(&self) -> usize {
        self.values.len()
    }

    pub fn point(&self, branch: usize, i: usize) -> BranchPoint {
        BranchPoint { lambda: self.grid[i], mu: self.values[branch][i], vector: self.vectors[branch][i].clone() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// min over the grid of min_j |μ_j|.
    pub fn min_abs(&self) -> f64 {
        self.values.iter().flatten().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }

    /// Index of the grid point nearest to λ.
    pub fn nearest(&self, lambda: f64) -> usize {
        let i = self.grid.partition_point(|&x| x < lambda);
        if i == 0 {
            0
        } else if i == self.grid.len() {
            i - 1
        } else if (self.grid[i] - lambda).abs() < (lambda - self.grid[i - 1]).abs() {
            i
        } else {
            i - 1
        }
    }
}

fn eig_at(pencil: &MatrixPencil, lambda: f64, tol: &Tolerances) -> Result<HermitianEigen> {
    hermitian_eigen_with(&pencil.evaluate_real(lambda).hermitian_part(), tol)
}

fn overlap(a: &[C64], b: &[C64]) -> f64 {
    dot(a, b).norm()
}

fn degenerate_sep(values: &[f64]) -> f64 {
    1e-8 * (1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Runs of (nearly) equal eigenvalues with more than one member.
fn clusters(values: &[f64]) -> Vec<Range<usize>> {
    let sep = degenerate_sep(values);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > sep {
            if i - start > 1 {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

fn project(v: &[C64], basis: &[Vec<C64>]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for b in basis {
        let c = dot(b, v);
        for (o, x) in out.iter_mut().zip(b) {
            *o += x * c;
        }
    }
    out
}

fn gram_schmidt(vs: &mut [Vec<C64>]) {
    for i in 0..vs.len() {
        for j in 0..i {
            let c = dot(&vs[j], &vs[i]);
            let vj = vs[j].clone();
            for (x, y) in vs[i].iter_mut().zip(&vj) {
                *x -= y * c;
            }
        }
        let n = norm(&vs[i]);
        if n > 0.0 {
            for x in vs[i].iter_mut() {
                *x /= n;
            }
        }
    }
}

/// Inside a degenerate eigenvalue cluster the solver's eigenvectors are an arbitrary
/// basis. Replace them by the analytic limits: eigenvectors at a nearby probe point,
/// projected back onto the cluster subspace. Failing that, project the reference
/// vectors from the previous grid point.
fn repair_clusters(
    pencil: &MatrixPencil,
    lambda: f64,
    eig: &mut HermitianEigen,
    reference: Option<&[Vec<C64>]>,
    delta: f64,
    tol: &Tolerances,
) -> Result<()> {
    for r in clusters(&eig.values) {
        let basis: Vec<Vec<C64>> = eig.vectors[r.clone()].to_vec();
        let mut fixed = None;
        for d in [delta, -delta] {
            let probe = eig_at(pencil, lambda + d, tol)?;
            let sep = degenerate_sep(&probe.values);
            let separated = (r.start + 1..r.end).all(|i| probe.values[i] - probe.values[i - 1] > sep);
            if separated {
                let mut vs: Vec<Vec<C64>> = probe.vectors[r.clone()].iter().map(|v| project(v, &basis)).collect();
                gram_schmidt(&mut vs);
                fixed = Some(vs);
                break;
            }
        }
        if fixed.is_none() {
            if let Some(refs) = reference {
                let mut scored: Vec<(f64, Vec<C64>)> = refs
                    .iter()
                    .map(|v| {
                        let p = project(v, &basis);
                        (norm(&p), p)
                    })
                    .collect();
                scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
                let mut vs: Vec<Vec<C64>> = scored.into_iter().take(r.len()).map(|x| x.1).collect();
                gram_schmidt(&mut vs);
                fixed = Some(vs);
            }
        }
        if let Some(vs) = fixed {
            for (k, v) in r.zip(vs) {
                eig.vectors[k] = v;
            }
        }
    }
    Ok(())
}

/// Greedy assignment of previous branch vectors to new eigenpairs.
/// Returns, for each previous branch, the new index and the overlap achieved.
fn greedy_match(prev_vecs: &[Vec<C64>], prev_mu: &[f64], eig: &HermitianEigen) -> Vec<(usize, f64)> {
    let n = prev_vecs.len();
    let ov: Vec<Vec<f64>> = prev_vecs.iter().map(|p| eig.vectors.iter().map(|w| overlap(p, w)).collect()).collect();
    let mut used_prev = vec![false; n];
    let mut used_new = vec![false; n];
    let mut out = vec![(0usize, 0.0f64); n];
    for _ in 0..n {
        let mut best: Option<(usize, usize)> = None;
        let mut best_ov = -1.0;
        for a in 0..n {
            if used_prev[a] {
                continue;
            }
            for b in 0..n {
                if used_new[b] {
                    continue;
                }
                let o = ov[a][b];
                let better = match best {
                    None => true,
                    Some((pa, pb)) => {
                        if (o - best_ov).abs() <= 1e-9 {
                            // tie: prefer the smaller jump in μ
                            (prev_mu[a] - eig.values[b]).abs() < (prev_mu[pa] - eig.values[pb]).abs()
                        } else {
                            o > best_ov
                        }
                    }
                };
                if better {
                    best = Some((a, b));
                    best_ov = o;
                }
            }
        }
        let (a, b) = best.expect("nonempty");
        used_prev[a] = true;
        used_new[b] = true;
        out[a] = (b, ov[a][b]);
    }
    out
}

/// Sample and continuity-match all branches on [λ_min, λ_max] with `steps` intervals,
/// bisecting intervals whose matching overlap is poor.
pub fn sample_branches(
    pencil: &MatrixPencil,
    lambda_min: f64,
    lambda_max: f64,
    steps: usize,
    tol: &Tolerances,
) -> Result<BranchFamily> {
    if !is_selfadjoint_with(pencil, tol) {
        return Err(Error::NotSelfadjoint);
    }
    if !(lambda_min < lambda_max) || !lambda_min.is_finite() || !lambda_max.is_finite() {
        return Err(Error::InvalidArgument { what: "window must satisfy lambda_min < lambda_max" });
    }
    if steps < 2 {
        return Err(Error::InvalidArgument { what: "at least 2 grid steps are required" });
    }
    let width = lambda_max - lambda_min;
    let h_min = tol.min_step * width;
    let delta = h_min / 7.0;
    let n = pencil.dim();

    let mut pending: Vec<f64> = (0..=steps).rev().map(|i| lambda_min + width * i as f64 / steps as f64).collect();
    let first = pending.pop().expect("grid");
    let mut eig = eig_at(pencil, first, tol)?;
    repair_clusters(pencil, first, &mut eig, None, delta, tol)?;

    let mut grid = vec![first];
    let mut values: Vec<Vec<f64>> = (0..n).map(|j| vec![eig.values[j]]).collect();
    let mut vectors: Vec<Vec<Vec<C64>>> = (0..n).map(|j| vec![eig.vectors[j].clone()]).collect();
    let mut permutations = vec![(0..n).collect::<Vec<_>>()];
    let mut min_overlap: f64 = 1.0;

    while let Some(next) = pending.pop() {
        let last = *grid.last().expect("grid");
        let prev_vecs: Vec<Vec<C64>> = (0..n).map(|j| vectors[j].last().expect("v").clone()).collect();
        let prev_mu: Vec<f64> = (0..n).map(|j| *values[j].last().expect("v")).collect();
        let mut e = eig_at(pencil, next, tol)?;
        let dir = if next + delta <= lambda_max { delta } else { -delta };
        repair_clusters(pencil, next, &mut e, Some(&prev_vecs), dir, tol)?;
        let m = greedy_match(&prev_vecs, &prev_mu, &e);
        let worst = m.iter().fold(1.0f64, |w, x| w.min(x.1));
        if worst < tol.overlap_refine && (next - last) / 2.0 >= h_min {
            pending.push(next);
            pending.push(0.5 * (last + next));
            continue;
        }
        if worst < tol.overlap_floor {
            return Err(Error::MatchingAmbiguous { lambda: next });
        }
        min_overlap = min_overlap.min(worst);
        grid.push(next);
        let mut perm = vec![0; n];
        for j in 0..n {
            let (b, _) = m[j];
            perm[j] = b;
            values[j].push(e.values[b]);
            let mut v = e.vectors[b].clone();
            // keep a continuous phase along the branch
            let ph = dot(&prev_vecs[j], &v);
            if ph.norm() > 0.0 {
                let u = ph.conj() / ph.norm();
                for x in v.iter_mut() {
                    *x *= u;
                }
            }
            vectors[j].push(v);
        }
        permutations.push(perm);
    }
    Ok(BranchFamily { grid, values, vectors, permutations, min_overlap })
}

/// Follow one branch from `from` to `target`, bisecting the path when the overlap test
/// is not conclusive. Midpoints never enter the open ball `avoid`.
pub fn track(
    pencil: &MatrixPencil,
    from: &BranchPoint,
    target: f64,
    avoid: Option<(f64, f64)>,
    tol: &Tolerances,
) -> Result<BranchPoint> {
    track_depth(pencil, from, target, avoid, tol, 0)
}

fn track_depth(
    pencil: &MatrixPencil,
    from: &BranchPoint,
    target: f64,
    avoid: Option<(f64, f64)>,
    tol: &Tolerances,
    depth: usize,
) -> Result<BranchPoint> {
    if let Some(p) = step_to(pencil, from, target, tol)? {
        return Ok(p);
    }
    let mid = 0.5 * (from.lambda + target);
    let blocked = avoid.map(|(c, r)| (mid - c).abs() < r).unwrap_or(false);
    if depth >= 40 || blocked || mid == from.lambda || mid == target {
        return Err(Error::MatchingAmbiguous { lambda: target });
    }
    let half = track_depth(pencil, from, mid, avoid, tol, depth + 1)?;
    track_depth(pencil, &half, target, avoid, tol, depth + 1)
}

fn step_to(pencil: &MatrixPencil, from: &BranchPoint, target: f64, tol: &Tolerances) -> Result<Option<BranchPoint>> {
    let eig = eig_at(pencil, target, tol)?;
    let sep = degenerate_sep(&eig.values);
    let ov: Vec<f64> = eig.vectors.iter().map(|w| overlap(&from.vector, w)).collect();
    let mut best = 0;
    for i in 1..ov.len() {
        let tie = (ov[i] - ov[best]).abs() <= 1e-9;
        if (tie && (eig.values[i] - from.mu).abs() < (eig.values[best] - from.mu).abs()) || (!tie && ov[i] > ov[best]) {
            best = i;
        }
    }
    // degenerate cluster around the best match: use the projection of the old vector
    let lo = (0..=best).rev().take_while(|&i| i == best || eig.values[i + 1] - eig.values[i] <= sep).last().unwrap_or(best);
    let hi = (best..eig.values.len())
        .take_while(|&i| i == best || eig.values[i] - eig.values[i - 1] <= sep)
        .last()
        .unwrap_or(best);
    let (mu, vector, quality) = if hi > lo {
        let p = project(&from.vector, &eig.vectors[lo..=hi]);
        let q = norm(&p);
        let v: Vec<C64> = p.iter().map(|x| x / q.max(f64::MIN_POSITIVE)).collect();
        let mu = eig.values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
        (mu, v, q)
    } else {
        // the runner-up must be clearly worse
        let second = ov.iter().enumerate().filter(|&(i, _)| i != best).fold(0.0f64, |m, (_, &o)| m.max(o));
        let q = if second > 0.5 * ov[best] + 0.25 { 0.0 } else { ov[best] };
        (eig.values[best], eig.vectors[best].clone(), q)
    };
    if quality < tol.overlap_refine {
        return Ok(None);
    }
    let mut v = vector;
    let ph = dot(&from.vector, &v);
    if ph.norm() > 0.0 {
        let u = ph.conj() / ph.norm();
        for x in v.iter_mut() {
            *x *= u;
        }
    }
    Ok(Some(BranchPoint { lambda: target, mu, vector: v }))
}

/// Order m and sign η of the first nonvanishing derivative of a branch at a zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Vanishing {
    /// λ₀ after refinement.
    pub lambda0: f64,
    pub order: usize,
    pub eta: i8,
    /// Estimate of μ^{(m)}(λ₀).
    pub derivative: f64,
    pub noise: f64,
    /// μ^{(m)} from the least-squares fit, the independent cross-check.
    pub fit_derivative: f64,
}

// stencil multipliers shared by every order: ±{1,2,3,4} at levels h, 2h, 4h
const NODES: [f64; 8] = [1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0];

struct Samples {
    offsets: Vec<f64>,
    values: Vec<f64>,
    vectors: Vec<Vec<C64>>,
    /// tracked state at center + h
    right: BranchPoint,
}

fn sample_around(
    pencil: &MatrixPencil,
    center: f64,
    h: f64,
    anchor: &BranchPoint,
    tol: &Tolerances,
) -> Result<Samples> {
    let avoid = Some((center, 0.5 * h));
    let mut offsets = Vec::with_capacity(16);
    let mut values = Vec::with_capacity(16);
    let mut vectors = Vec::with_capacity(16);
    let right = track(pencil, anchor, center + h, avoid, tol)?;
    let mut cur = right.clone();
    for sign in [1.0, -1.0] {
        for (i, &k) in NODES.iter().enumerate() {
            if i > 0 || sign < 0.0 {
                // the jump from +h to -h is the only step across the center
                let guard = if i == 0 { None } else { avoid };
                cur = track(pencil, &cur, center + sign * k * h, guard, tol)?;
            }
            offsets.push(sign * k * h);
            values.push(cur.mu);
            vectors.push(cur.vector.clone());
        }
        cur = right.clone();
    }
    Ok(Samples { offsets, values, vectors, right })
}

fn sample_index(samples: &Samples, offset: f64, h: f64) -> usize {
    samples.offsets.iter().position(|&x| (x - offset).abs() <= 1e-9 * h).expect("stencil offset sampled")
}

fn derivative_at(samples: &Samples, order: usize, h: f64, noise: f64) -> Estimate {
    let st = Stencil::new(order, h, false);
    let vals: Vec<f64> = st.offsets.iter().map(|&o| samples.values[sample_index(samples, o, h)]).collect();
    st.apply(&vals, noise)
}

/// Taylor coefficients u^{(r)}(λ₀)/r!, r < count, of the eigenvector branch through
/// `anchor`. The gauge fixes one component real positive, which keeps the branch
/// analytic in λ.
pub fn branch_taylor_vectors(
    pencil: &MatrixPencil,
    center: f64,
    anchor: &BranchPoint,
    count: usize,
    tol: &Tolerances,
) -> Result<Vec<Vec<C64>>> {
    let h = tol.branch_step * (1.0 + center.abs());
    let s = sample_around(pencil, center, h, anchor, tol)?;
    let n = pencil.dim();
    let c = (0..n).fold(0, |b, i| if s.right.vector[i].norm() > s.right.vector[b].norm() { i } else { b });
    let gauged: Vec<Vec<C64>> = s
        .vectors
        .iter()
        .map(|v| {
            let ph = v[c] / v[c].norm();
            v.iter().map(|x| x / ph).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for r in 0..count {
        let st = Stencil::new(r, h, false);
        let idx: Vec<usize> = st.offsets.iter().map(|&o| sample_index(&s, o, h)).collect();
        let f = 1.0 / factorial(r);
        let u: Vec<C64> = (0..n)
            .map(|comp| {
                let col: Vec<C64> = idx.iter().map(|&i| gauged[i][comp]).collect();
                st.apply_complex(&col) * f
            })
            .collect();
        out.push(u);
    }
    Ok(out)
}

/// Derivatives μ^{(0..=max)} at the center of the samples.
fn derivatives(samples: &Samples, h: f64, max: usize, noise: f64) -> Vec<Estimate> {
    (0..=max).map(|n| derivative_at(samples, n, h, noise)).collect()
}

/// Order of vanishing of the branch through `anchor` at (approximately) λ₀.
///
/// For each candidate order n, λ₀ is refined by Newton steps on μ^{(n-1)}; the
/// largest n for which μ, …, μ^{(n-1)} are below noise and μ^{(n)} is above it wins.
/// A least-squares polynomial fit on the same samples must agree on μ^{(m)}.
pub fn order_of_vanishing(pencil: &MatrixPencil, lambda0: f64, anchor: &BranchPoint, tol: &Tolerances) -> Result<Vanishing> {
    let h = tol.branch_step * (1.0 + lambda0.abs());
    let max = tol.max_order;
    let undetermined = Error::OrderUndetermined { lambda: lambda0 };
    let noise_at = |c: f64| 16.0 * EPS * pencil.eval_scale(C64::new(c.abs() + 16.0 * h, 0.0)) * (pencil.dim() as f64).sqrt();

    let base = sample_around(pencil, lambda0, h, anchor, tol)?;
    let mut best: Option<(f64, usize, Vec<Estimate>, Samples)> = None;
    for n in (1..=max).rev() {
        let mut c = lambda0;
        let mut s = sample_around(pencil, c, h, &base.right, tol)?;
        let mut d = derivatives(&s, h, max, noise_at(c));
        for _ in 0..8 {
            if d[n].value == 0.0 {
                break;
            }
            let mut step = d[n - 1].value / d[n].value;
            if !step.is_finite() {
                break;
            }
            step = step.clamp(-h, h);
            if (c - step - lambda0).abs() > 4.0 * h {
                break;
            }
            c -= step;
            s = sample_around(pencil, c, h, &s.right, tol)?;
            d = derivatives(&s, h, max, noise_at(c));
            if step.abs() <= 1e-13 * (1.0 + c.abs()) {
                break;
            }
        }
        let f = tol.noise_factor;
        let lower_zero = (0..n).all(|j| d[j].is_zero(f));
        if lower_zero && !d[n].is_zero(f) {
            best = Some((c, n, d, s));
            break;
        }
    }
    let (c, m, d, s) = best.ok_or(undetermined.clone())?;
    let fit = polyfit(&s.offsets, &s.values, m + 2);
    let fit_d = fit[m] * factorial(m);
    let dm = d[m].value;
    if fit_d.signum() != dm.signum() || (fit_d - dm).abs() > 0.1 * dm.abs() {
        return Err(undetermined);
    }
    Ok(Vanishing {
        lambda0: c,
        order: m,
        eta: d[m].sign(),
        derivative: dm,
        noise: d[m].noise(),
        fit_derivative: fit_d,
    })
}

/// dim Ker 𝓛(λ₀): eigenvalues with |μ| ≤ kernel · (evaluation scale at λ₀).
pub fn geometric_multiplicity(pencil: &MatrixPencil, lambda0: f64, tol: &Tolerances) -> Result<usize> {
    let e = eig_at(pencil, lambda0, tol)?;
    let thr = tol.kernel * pencil.eval_scale(C64::new(lambda0, 0.0)).max(f64::MIN_POSITIVE);
    Ok(e.values.iter().filter(|v| v.abs() <= thr).count())
}

/// Anchors for the branches vanishing at λ₀, placed at λ₀ + h where the eigenvectors of
/// different branches are distinct even when 𝓛(λ₀) has a multidimensional kernel.
pub fn branch_anchors(pencil: &MatrixPencil, lambda0: f64, tol: &Tolerances) -> Result<Vec<BranchPoint>> {
    let e = eig_at(pencil, lambda0, tol)?;
    let thr = tol.kernel * pencil.eval_scale(C64::new(lambda0, 0.0)).max(f64::MIN_POSITIVE);
    let kernel: Vec<Vec<C64>> = e
        .values
        .iter()
        .zip(&e.vectors)
        .filter(|(v, _)| v.abs() <= thr)
        .map(|(_, x)| x.clone())
        .collect();
    let k = kernel.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let h = tol.branch_step * (1.0 + lambda0.abs());
    let probe_at = lambda0 + h;
    let mut probe = eig_at(pencil, probe_at, tol)?;
    repair_clusters(pencil, probe_at, &mut probe, Some(&kernel), h / 64.0, tol)?;
    let mut scored: Vec<(f64, usize)> =
        probe.vectors.iter().enumerate().map(|(i, v)| (norm(&project(v, &kernel)), i)).collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut picked: Vec<usize> = scored.iter().take(k).map(|x| x.1).collect();
    picked.sort_unstable();
    Ok(picked
        .into_iter()
        .map(|i| BranchPoint { lambda: probe_at, mu: probe.values[i], vector: probe.vectors[i].clone() })
        .collect())
}

/// Per-branch vanishing data at a crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchOrder {
    pub branch: usize,
    pub result: Result<Vanishing>,
}

/// A real characteristic value found as a zero of one or more branches.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingEvent {
    pub lambda: f64,
    pub branches: Vec<BranchOrder>,
}

impl CrossingEvent {
    pub fn branch_ids(&self) -> Vec<usize> {
        self.branches.iter().map(|b| b.branch).collect()
    }

    /// Geometric multiplicity k.
    pub fn k(&self) -> usize {
        self.branches.len()
    }

    /// (m, η) per branch, or the first failure.
    pub fn orders(&self) -> Result<Vec<(usize, i8)>> {
        self.branches
            .iter()
            .map(|b| b.result.as_ref().map(|v| (v.order, v.eta)).map_err(|e| e.clone()))
            .collect()
    }

    /// Algebraic multiplicity α = Σ m.
    pub fn alpha(&self) -> Result<usize> {
        Ok(self.orders()?.iter().map(|x| x.0).sum())
    }
}

struct Candidate {
    lambda: f64,
    branch: usize,
    anchor: BranchPoint,
}

fn polish_sign_change(
    pencil: &MatrixPencil,
    a0: BranchPoint,
    b0: BranchPoint,
    tol: &Tolerances,
) -> Result<BranchPoint> {
    let (mut a, mut b) = (a0, b0);
    let mut side = 0i32;
    for _ in 0..200 {
        if (b.lambda - a.lambda).abs() <= tol.polish * (1.0 + a.lambda.abs()) {
            break;
        }
        // Illinois-modified regula falsi, falling back to bisection
        let (mut fa, mut fb) = (a.mu, b.mu);
        if side == -1 {
            fa *= 0.5;
        } else if side == 1 {
            fb *= 0.5;
        }
        let mut x = (a.lambda * fb - b.lambda * fa) / (fb - fa);
        let w = b.lambda - a.lambda;
        if !x.is_finite() || (x - a.lambda) / w < 0.05 || (b.lambda - x) / w < 0.05 {
            x = 0.5 * (a.lambda + b.lambda);
        }
        let from = if (x - a.lambda).abs() < (b.lambda - x).abs() { &a } else { &b };
        let p = track(pencil, from, x, None, tol)?;
        if p.mu == 0.0 {
            return Ok(p);
        }
        if (p.mu > 0.0) == (a.mu > 0.0) {
            a = p;
            side = 1;
        } else {
            b = p;
            side = -1;
        }
    }
    Ok(if a.mu.abs() <= b.mu.abs() { a } else { b })
}

fn golden_min(pencil: &MatrixPencil, lo: BranchPoint, hi: f64, sign: f64, tol: &Tolerances) -> Result<BranchPoint> {
    let g = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut a = lo.lambda;
    let mut b = hi;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut p1 = track(pencil, &lo, x1, None, tol)?;
    let mut p2 = track(pencil, &p1, x2, None, tol)?;
    for _ in 0..80 {
        if (b - a) <= 1e-12 * (1.0 + a.abs()) {
            break;
        }
        if sign * p1.mu <= sign * p2.mu {
            b = x2;
            x2 = x1;
            p2 = p1.clone();
            x1 = b - g * (b - a);
            p1 = track(pencil, &p2, x1, None, tol)?;
        } else {
            a = x1;
            x1 = x2;
            p1 = p2.clone();
            x2 = a + g * (b - a);
            p2 = track(pencil, &p1, x2, None, tol)?;
        }
    }
    Ok(if sign * p1.mu <= sign * p2.mu { p1 } else { p2 })
}

/// Every zero of every branch: sign changes are polished by bracketing, local minima of
/// |μ| are minimized and accepted when they reach the crossing tolerance. Zeros of
/// different branches within 1e-6 (1 + |λ|) form one event.
pub fn find_crossings(pencil: &MatrixPencil, family: &BranchFamily, tol: &Tolerances) -> Result<Vec<CrossingEvent>> {
    let ctol = tol.crossing * (1.0 + family.max_abs());
    let len = family.grid.len();
    let mut cands: Vec<Candidate> = Vec::new();
    for j in 0..family.n_branches() {
        let v = &family.values[j];
        let zero = |i: usize| v[i].abs() <= ctol;
        for i in 0..len {
            if zero(i) {
                cands.push(Candidate { lambda: family.grid[i], branch: j, anchor: family.point(j, i) });
            }
        }
        for i in 0..len.saturating_sub(1) {
            if !zero(i) && !zero(i + 1) && (v[i] > 0.0) != (v[i + 1] > 0.0) {
                let p = polish_sign_change(pencil, family.point(j, i), family.point(j, i + 1), tol)?;
                cands.push(Candidate { lambda: p.lambda, branch: j, anchor: p });
            }
        }
        for i in 1..len.saturating_sub(1) {
            let same = (v[i - 1] > 0.0) == (v[i] > 0.0) && (v[i + 1] > 0.0) == (v[i] > 0.0);
            if !zero(i) && same && v[i].abs() <= v[i - 1].abs() && v[i].abs() <= v[i + 1].abs() {
                let s = v[i].signum();
                let p = golden_min(pencil, family.point(j, i - 1), family.grid[i + 1], s, tol)?;
                if p.mu.abs() <= ctol {
                    cands.push(Candidate { lambda: p.lambda, branch: j, anchor: p });
                }
            }
        }
    }

    // refine each candidate, then merge by refined location
    let mut refined: Vec<(f64, BranchOrder)> = cands
        .into_iter()
        .map(|c| {
            let r = order_of_vanishing(pencil, c.lambda, &c.anchor, tol);
            let at = r.as_ref().map(|v| v.lambda0).unwrap_or(c.lambda);
            (at, BranchOrder { branch: c.branch, result: r })
        })
        .collect();
    refined.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));

    let mut events: Vec<CrossingEvent> = Vec::new();
    let mut group: Vec<(f64, BranchOrder)> = Vec::new();
    for item in refined {
        let joins = group.last().map(|g| (item.0 - g.0).abs() <= 1e-6 * (1.0 + g.0.abs())).unwrap_or(true);
        if !joins {
            events.push(make_event(core::mem::take(&mut group)));
        }
        group.push(item);
    }
    if !group.is_empty() {
        events.push(make_event(group));
    }
    Ok(events)
}

fn make_event(group: Vec<(f64, BranchOrder)>) -> CrossingEvent {
    let mut branches: Vec<BranchOrder> = Vec::new();
    let mut lambda = group[0].0;
    let mut best_order = usize::MAX;
    for (at, bo) in group {
        if let Ok(v) = &bo.result {
            if v.order < best_order {
                best_order = v.order;
                lambda = at;
            }
        }
        match branches.iter_mut().find(|b| b.branch == bo.branch) {
            Some(existing) => {
                if existing.result.is_err() && bo.result.is_ok() {
                    *existing = bo;
                }
            }
            None => branches.push(bo),
        }
    }
    branches.sort_by_key(|b| b.branch);
    CrossingEvent { lambda, branches }
}

/// Characteristic values in a window, found graphically.
pub fn crossings_in(
    pencil: &MatrixPencil,
    lambda_min: f64,
    lambda_max: f64,
    steps: usize,
    tol: &Tolerances,
) -> Result<(BranchFamily, Vec<CrossingEvent>)> {
    let fam = sample_branches(pencil, lambda_min, lambda_max, steps, tol)?;
    let ev = find_crossings(pencil, &fam, tol)?;
    Ok((fam, ev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    fn quadratic1() -> MatrixPencil {
        MatrixPencil::polynomial(vec![
            CMatrix::from_real_rows(&[&[1.0, 2.0][..], &[2.0, 3.0]]),
            CMatrix::from_real_rows(&[&[-2.0, -2.0][..], &[-2.0, 0.0]]),
            CMatrix::identity(2),
        ])
        .unwrap()
    }

    fn quadratic2() -> MatrixPencil {
        // [[λ²-λ, 1-λ], [1-λ, λ²-λ]]
        MatrixPencil::polynomial(vec![
            CMatrix::from_real_rows(&[&[0.0, 1.0][..], &[1.0, 0.0]]),
            CMatrix::from_real_rows(&[&[-1.0, -1.0][..], &[-1.0, -1.0]]),
            CMatrix::identity(2),
        ])
        .unwrap()
    }

    #[test]
    fn scalar_cubic_order() {
        let p = MatrixPencil::polynomial(vec![
            CMatrix::from_real_diag(&[-1.0]),
            CMatrix::from_real_diag(&[3.0]),
            CMatrix::from_real_diag(&[-3.0]),
            CMatrix::from_real_diag(&[1.0]),
        ])
        .unwrap();
        let tol = Tolerances::default();
        let (_, ev) = crossings_in(&p, -2.0, 3.0, 200, &tol).unwrap();
        assert_eq!(ev.len(), 1, "{ev:?}");
        assert_eq!(ev[0].orders().unwrap(), vec![(3, 1)]);
        assert!((ev[0].lambda - 1.0).abs() < 1e-8, "{}", ev[0].lambda);
    }

    #[test]
    fn quadratic1_triple() {
        let tol = Tolerances::default();
        let (_, ev) = crossings_in(&quadratic1(), -3.0, 3.0, 300, &tol).unwrap();
        assert_eq!(ev.len(), 2, "{ev:?}");
        assert_eq!(ev[0].orders().unwrap(), vec![(1, ev[0].orders().unwrap()[0].1)]);
        assert_eq!(ev[1].alpha().unwrap(), 3, "{ev:?}");
        assert_eq!(geometric_multiplicity(&quadratic1(), 1.0, &tol).unwrap(), 1);
    }

    #[test]
    fn quadratic2_orders() {
        let tol = Tolerances::default();
        for steps in [300, 301] {
            let (_, ev) = crossings_in(&quadratic2(), -3.0, 3.0, steps, &tol).unwrap();
            assert_eq!(ev.len(), 2, "{ev:?}");
            let mut o: Vec<usize> = ev[1].orders().unwrap().iter().map(|x| x.0).collect();
            o.sort_unstable();
            assert_eq!(o, vec![1, 2], "{ev:?}");
        }
        assert_eq!(geometric_multiplicity(&quadratic2(), 1.0, &tol).unwrap(), 2);
        assert_eq!(geometric_multiplicity(&quadratic2(), 0.5, &tol).unwrap(), 0);
    }

    #[test]
    fn anchors_at_double_kernel() {
        let tol = Tolerances::default();
        let a = branch_anchors(&quadratic2(), 1.0, &tol).unwrap();
        assert_eq!(a.len(), 2);
        let mut o: Vec<usize> =
            a.iter().map(|b| order_of_vanishing(&quadratic2(), 1.0, b, &tol).unwrap().order).collect();
        o.sort_unstable();
        assert_eq!(o, vec![1, 2]);
    }
}
