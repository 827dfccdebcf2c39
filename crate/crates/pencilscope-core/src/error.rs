use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

/// Every failure the analysis layer can report.
///
/// `code()` gives a stable short identifier for front ends that need one.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not skew-Hermitian (defect {defect:.3e})")]
    NotSkewHermitian { defect: f64 },
    #[error("{what} did not converge")]
    NoConvergence { what: &'static str },
    #[error("dimension mismatch: {what}")]
    DimensionMismatch { what: &'static str },
    #[error("J is singular")]
    SingularJ,
    #[error("leading coefficient is singular")]
    SingularLeadingCoefficient,
    #[error("singular matrix")]
    Singular,
    #[error("operation requires a polynomial pencil")]
    NotPolynomial,
    #[error("pencil is not selfadjoint")]
    NotSelfadjoint,
    #[error("branch matching ambiguous near lambda = {lambda}")]
    MatchingAmbiguous { lambda: f64 },
    #[error("order of vanishing undetermined at lambda = {lambda}")]
    OrderUndetermined { lambda: f64 },
    #[error("chain flag rank decision ambiguous at lambda = {lambda}")]
    FlagDegenerate { lambda: f64 },
    #[error("Gram matrix degenerate at lambda = {lambda}")]
    DegenerateGram { lambda: f64 },
    #[error("weight matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("lambda = {lambda} is not a simple characteristic value")]
    NotSimple { lambda: f64 },
    #[error("derivative {what} is below its noise estimate")]
    DerivativeBelowNoise { what: &'static str },
    #[error("geometric multiplicity at lambda = {lambda} is {found}, expected 1")]
    NotGeometricMultOne { lambda: f64, found: usize },
    #[error("lambda = {lambda} is not a semisimple characteristic value")]
    NotSemisimple { lambda: f64 },
    #[error("slope polynomial has complex roots (imaginary part {imag:.3e})")]
    ComplexRootsDetected { imag: f64 },
    #[error("characteristic value on or near the contour")]
    RootOnContour,
    #[error("phase step stayed above pi/2 after refinement")]
    PhaseStepTooLarge,
    #[error("unstable count mismatch: formula {formula}, direct {direct}")]
    Inconsistent { formula: i64, direct: i64 },
    #[error("eigenvalue of JL too close to the imaginary-axis threshold (Re = {re:.3e})")]
    Borderline { re: f64 },
    #[error("system is not real under the given involution")]
    NotReal,
    #[error("kernels of L+ and L- are not orthogonal (overlap {overlap:.3e})")]
    KernelsNotOrthogonal { overlap: f64 },
    #[error("invalid argument: {what}")]
    InvalidArgument { what: &'static str },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "not_hermitian",
            Error::NotSkewHermitian { .. } => "not_skew_hermitian",
            Error::NoConvergence { .. } => "no_convergence",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::SingularJ => "singular_j",
            Error::SingularLeadingCoefficient => "singular_leading_coefficient",
            Error::Singular => "singular",
            Error::NotPolynomial => "not_polynomial",
            Error::NotSelfadjoint => "not_selfadjoint",
            Error::MatchingAmbiguous { .. } => "matching_ambiguous",
            Error::OrderUndetermined { .. } => "order_undetermined",
            Error::FlagDegenerate { .. } => "flag_degenerate",
            Error::DegenerateGram { .. } => "degenerate_gram",
            Error::NotPositiveDefinite => "not_positive_definite",
            Error::NotSimple { .. } => "not_simple",
            Error::DerivativeBelowNoise { .. } => "derivative_below_noise",
            Error::NotGeometricMultOne { .. } => "not_geometric_mult_one",
            Error::NotSemisimple { .. } => "not_semisimple",
            Error::ComplexRootsDetected { .. } => "complex_roots_detected",
            Error::RootOnContour => "root_on_contour",
            Error::PhaseStepTooLarge => "phase_step_too_large",
            Error::Inconsistent { .. } => "inconsistent",
            Error::Borderline { .. } => "borderline",
            Error::NotReal => "not_real",
            Error::KernelsNotOrthogonal { .. } => "kernels_not_orthogonal",
            Error::InvalidArgument { .. } => "invalid_argument",
        }
    }

    /// True for outcomes that mean "the numbers could not be classified"
    /// rather than "the input was wrong".
    pub fn is_flagged(&self) -> bool {
        matches!(
            self,
            Error::Inconsistent { .. }
                | Error::Borderline { .. }
                | Error::OrderUndetermined { .. }
                | Error::MatchingAmbiguous { .. }
                | Error::FlagDegenerate { .. }
                | Error::DegenerateGram { .. }
                | Error::DerivativeBelowNoise { .. }
                | Error::ComplexRootsDetected { .. }
        )
    }
}
