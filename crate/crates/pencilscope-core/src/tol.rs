/// Numerical thresholds shared by the analysis routines.
///
/// Relative thresholds are multiplied by a scale chosen at the call site
/// (a matrix norm, `1 + |λ|`, the largest branch value on a grid, ...).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermitian symmetry check, relative to ‖A‖.
    pub hermitian: f64,
    /// Jacobi stopping threshold on the off-diagonal Frobenius norm, relative to ‖A‖.
    pub jacobi: f64,
    pub jacobi_max_sweeps: usize,
    /// Default inertia zero band, relative to ‖A‖.
    pub inertia_zero: f64,
    /// Floor of the eigenvalue clustering radius, applied as `cluster * (1 + |λ|)`.
    pub cluster: f64,
    /// Leading coefficient is invertible when |det| > leading_det * ‖L_p‖^N.
    pub leading_det: f64,
    /// Branch zero test, relative to `1 + max |μ|` over the grid.
    pub crossing: f64,
    /// Kernel test for L(λ₀), relative to the evaluation scale of the pencil.
    pub kernel: f64,
    /// Grid refinement trigger on the smallest matched overlap.
    pub overlap_refine: f64,
    /// Smallest acceptable matched overlap.
    pub overlap_floor: f64,
    /// Smallest grid spacing, relative to the window width.
    pub min_step: f64,
    /// Root polishing target on λ.
    pub polish: f64,
    /// Finest finite-difference step for branch derivatives, relative to `1 + |λ₀|`.
    pub branch_step: f64,
    pub max_order: usize,
    /// Rank decisions, relative to the largest singular value.
    pub rank: f64,
    /// Finest finite-difference step for Evans-Krein derivatives.
    pub evans_step: f64,
    /// A derivative is zero when below `noise_factor` times its noise estimate.
    pub noise_factor: f64,
    /// Re ν ≠ 0 test, relative to `1 + spectral radius`.
    pub re: f64,
    /// Orthogonality check for the canonical-form kernels.
    pub kernel_orthogonality: f64,
    /// Imaginary parts of slope-polynomial roots below this are dropped.
    pub slope_imag: f64,
    /// Contour points with |E| below this (relative to the Hadamard bound) count as on a root.
    pub winding_margin: f64,
    pub winding_max_depth: usize,
    /// Two real characteristic values closer than `collision * (1 + |λ|)` are a collision.
    pub collision: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-12,
            jacobi: 1e-13,
            jacobi_max_sweeps: 100,
            inertia_zero: 1e-9,
            cluster: 1e-7,
            leading_det: 1e-10,
            crossing: 1e-9,
            kernel: 1e-8,
            overlap_refine: 0.9,
            overlap_floor: 0.6,
            min_step: 1e-7,
            polish: 1e-10,
            branch_step: 1e-3,
            max_order: 6,
            rank: 1e-8,
            evans_step: 1e-4,
            noise_factor: 10.0,
            re: 1e-7,
            kernel_orthogonality: 1e-8,
            slope_imag: 1e-6,
            winding_margin: 1e-12,
            winding_max_depth: 24,
            collision: 0.02,
        }
    }
}

impl Tolerances {
    /// Tighter matching and root polishing; same classification thresholds.
    pub fn strict() -> Self {
        Tolerances {
            overlap_refine: 0.97,
            overlap_floor: 0.8,
            min_step: 1e-9,
            polish: 1e-12,
            ..Tolerances::default()
        }
    }
}
