//! Finite-difference stencils with three-level Richardson extrapolation.
//!
//! A stencil is a fixed linear functional on samples `f(x0 + offset)`. The final
//! weights combine levels h, 2h, 4h of a symmetric second-order stencil, cancelling
//! the h² and h⁴ error terms. The `alt` weights give the once-extrapolated value; the
//! gap between the two is the spread used as a truncation-noise estimate.
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

/// Fornberg weights for the `order`-th derivative at 0 on the given nodes.
pub fn fd_weights(order: usize, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > order, "need more nodes than the derivative order");
    // c[j][k]: weight of node j for derivative k
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[order]).collect()
}

/// Symmetric nodes for a second-order-accurate estimate of the `order`-th derivative.
/// Center-free stencils use ±1..±K and never sample the expansion point itself.
pub fn symmetric_nodes(order: usize, with_center: bool) -> Vec<f64> {
    let k = if with_center { (order + 1) / 2 } else { order / 2 + 1 };
    let mut nodes = Vec::new();
    for i in (1..=k).rev() {
        nodes.push(-(i as f64));
    }
    if with_center {
        nodes.push(0.0);
    }
    for i in 1..=k {
        nodes.push(i as f64);
    }
    nodes
}

/// Richardson level combination for levels h, 2h, 4h.
const FINAL: [f64; 3] = [64.0 / 45.0, -20.0 / 45.0, 1.0 / 45.0];
const ALT: [f64; 3] = [4.0 / 3.0, -1.0 / 3.0, 0.0];

/// Offsets and weights for one derivative estimate.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub offsets: Vec<f64>,
    pub weights: Vec<f64>,
    pub alt: Vec<f64>,
}

impl Stencil {
    pub fn new(order: usize, h: f64, with_center: bool) -> Self {
        let nodes = symmetric_nodes(order, with_center);
        let w = fd_weights(order, &nodes);
        let mut s = Stencil { offsets: Vec::new(), weights: Vec::new(), alt: Vec::new() };
        for level in 0..3 {
            let hl = h * (1u32 << level) as f64;
            let scale = 1.0 / hl.powi(order as i32);
            for (x, wk) in nodes.iter().zip(&w) {
                s.add(x * hl, FINAL[level] * wk * scale, ALT[level] * wk * scale);
            }
        }
        s
    }

    fn add(&mut self, off: f64, w: f64, alt: f64) {
        for (i, &o) in self.offsets.iter().enumerate() {
            if (o - off).abs() <= 1e-12 * off.abs().max(1e-300) {
                self.weights[i] += w;
                self.alt[i] += alt;
                return;
            }
        }
        self.offsets.push(off);
        self.weights.push(w);
        self.alt.push(alt);
    }

    pub fn abs_weight(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// Apply to real samples taken at `self.offsets` (same order).
    pub fn apply(&self, samples: &[f64], sample_noise: f64) -> Estimate {
        let value: f64 = self.weights.iter().zip(samples).map(|(w, f)| w * f).sum();
        let alt: f64 = self.alt.iter().zip(samples).map(|(w, f)| w * f).sum();
        Estimate { value, spread: (value - alt).abs(), roundoff: sample_noise * self.abs_weight() }
    }

    pub fn apply_complex(&self, samples: &[C64]) -> C64 {
        self.weights.iter().zip(samples).map(|(&w, &f)| f * w).sum()
    }
}

/// Tensor-product stencil for ∂^{nx+ny} / ∂x^{nx} ∂y^{ny}.
#[derive(Debug, Clone)]
pub struct Stencil2 {
    pub offsets: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    pub alt: Vec<f64>,
}

impl Stencil2 {
    pub fn new(nx: usize, hx: f64, ny: usize, hy: f64) -> Self {
        let xn = symmetric_nodes(nx, true);
        let yn = symmetric_nodes(ny, true);
        let wx = fd_weights(nx, &xn);
        let wy = fd_weights(ny, &yn);
        let mut s = Stencil2 { offsets: Vec::new(), weights: Vec::new(), alt: Vec::new() };
        for level in 0..3 {
            let f = (1u32 << level) as f64;
            let (hxl, hyl) = (hx * f, hy * f);
            let scale = 1.0 / (hxl.powi(nx as i32) * hyl.powi(ny as i32));
            for (x, a) in xn.iter().zip(&wx) {
                for (y, b) in yn.iter().zip(&wy) {
                    let w = a * b * scale;
                    if w == 0.0 {
                        continue;
                    }
                    s.add((x * hxl, y * hyl), FINAL[level] * w, ALT[level] * w);
                }
            }
        }
        s
    }

    fn add(&mut self, off: (f64, f64), w: f64, alt: f64) {
        for (i, o) in self.offsets.iter().enumerate() {
            if (o.0 - off.0).abs() <= 1e-12 * off.0.abs().max(1e-300) && (o.1 - off.1).abs() <= 1e-12 * off.1.abs().max(1e-300)
            {
                self.weights[i] += w;
                self.alt[i] += alt;
                return;
            }
        }
        self.offsets.push(off);
        self.weights.push(w);
        self.alt.push(alt);
    }

    pub fn abs_weight(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    pub fn apply(&self, samples: &[f64], sample_noise: f64) -> Estimate {
        let value: f64 = self.weights.iter().zip(samples).map(|(w, f)| w * f).sum();
        let alt: f64 = self.alt.iter().zip(samples).map(|(w, f)| w * f).sum();
        Estimate { value, spread: (value - alt).abs(), roundoff: sample_noise * self.abs_weight() }
    }
}

/// A derivative estimate with its noise budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// gap between the two Richardson levels
    pub spread: f64,
    /// propagated rounding error of the samples
    pub roundoff: f64,
}

impl Estimate {
    pub fn noise(&self) -> f64 {
        self.spread + self.roundoff
    }

    /// Below `factor` times the noise estimate.
    pub fn is_zero(&self, factor: f64) -> bool {
        self.value.abs() <= factor * self.noise()
    }

    pub fn sign(&self) -> i8 {
        if self.value > 0.0 {
            1
        } else if self.value < 0.0 {
            -1
        } else {
            0
        }
    }
}

/// Least-squares polynomial fit, ascending coefficients, via Householder QR.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Vec<f64> {
    let m = xs.len();
    let n = degree + 1;
    assert!(m >= n, "not enough points for the fit");
    let mut a: Vec<Vec<f64>> = xs.iter().map(|&x| (0..n).map(|k| x.powi(k as i32)).collect()).collect();
    let mut b = ys.to_vec();
    for k in 0..n {
        let norm: f64 = (k..m).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..n {
            let dotv: f64 = (k..m).map(|i| v[i - k] * a[i][j]).sum();
            let f = 2.0 * dotv / vnorm2;
            for i in k..m {
                a[i][j] -= f * v[i - k];
            }
        }
        let dotb: f64 = (k..m).map(|i| v[i - k] * b[i]).sum();
        let f = 2.0 * dotb / vnorm2;
        for i in k..m {
            b[i] -= f * v[i - k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in (k + 1)..n {
            s -= a[k][j] * x[j];
        }
        x[k] = if a[k][k] != 0.0 { s / a[k][k] } else { 0.0 };
    }
    x
}

/// n!
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_for_second_derivative() {
        let w = fd_weights(2, &[-1.0, 0.0, 1.0]);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] + 2.0).abs() < 1e-14 && (w[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stencil_recovers_exp_derivatives() {
        for order in 0..=5 {
            for &center in &[true, false] {
                if center && order == 0 {
                    continue;
                }
                let h = if order >= 4 { 0.05 } else { 1e-2 };
                let s = Stencil::new(order, h, center);
                let samples: Vec<f64> = s.offsets.iter().map(|&x| (0.3 + x).exp()).collect();
                let e = s.apply(&samples, 2e-16 * 0.3f64.exp());
                let err = (e.value - 0.3f64.exp()).abs();
                assert!(err < 1e-5 && err <= 10.0 * e.noise() + 1e-9, "order {order} center {center}: {e:?}");
            }
        }
    }

    #[test]
    fn mixed_stencil() {
        // f = x^2 y^3 + x y: d^2/dx dy at (0,0) = 1
        let s = Stencil2::new(1, 1e-2, 1, 1e-2);
        let samples: Vec<f64> = s.offsets.iter().map(|&(x, y)| x * x * y * y * y + x * y).collect();
        let e = s.apply(&samples, 1e-16);
        assert!((e.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn polyfit_exact_cubic() {
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * 0.25 - 1.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - 2.0 * x + 0.5 * x * x * x).collect();
        let c = polyfit(&xs, &ys, 4);
        for (a, b) in c.iter().zip([1.0, -2.0, 0.0, 0.5, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
