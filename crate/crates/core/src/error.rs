//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors produced by the numerical operations in this crate.
///
/// Numerical ambiguity (rank decisions inside a tolerance band, peels whose
/// norm sits within the strictness margin) is always surfaced as an error
/// rather than resolved by guessing.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operation requires a square matrix.
    NotSquare { rows: usize, cols: usize },
    /// Matrix or block dimensions do not match.
    ShapeMismatch(String),
    /// Coefficient list was empty.
    EmptyCoefficients,
    /// Leading coefficient is zero.
    ZeroLeadingCoefficient,
    /// Polynomial has degree zero (a nonzero constant defines no relation).
    DegreeZero,
    /// Two roots are closer than the clustering tolerance.
    RootsTooClose { separation: f64, tol: f64 },
    /// The requested root is not a root of the polynomial.
    RootNotInPolynomial,
    /// An iterative eigenvalue or singular value routine did not converge.
    ConvergenceFailed(&'static str),
    /// Ideal support index out of range.
    SupportOutOfRange { index: usize, blocks: usize },
    /// Chain supports are not increasing.
    ChainNotMonotone { position: usize },
    /// `1 + i` is singular or its condition number exceeds the bound.
    IllConditioned { cond: f64, bound: f64 },
    /// The polynomial relation is violated beyond tolerance.
    RelationViolated { residual: f64, tol: f64 },
    /// A singular value fell inside the ambiguity band around the rank
    /// threshold; the numerical rank cannot be decided.
    AmbiguousRank { sigma: f64, lo: f64, hi: f64 },
    /// Input is not an idempotent within tolerance.
    NotIdempotent { residual: f64, tol: f64 },
    /// `b*b^*` has an eigenvalue far from both 0 and [1, inf); the
    /// idempotent is numerically broken.
    BrokenIdempotent { eigenvalue: f64 },
    /// A diagonal block deviates from `label * I` beyond the snap gate.
    DiagonalSnapFailed { deviation: f64, tol: f64 },
    /// Tolerances conflict: the input sits inside a margin where the
    /// result would depend on the tolerance choice.
    ToleranceConflict(String),
    /// Requested norm target is not above the spectral radius, so no
    /// similarity can reach it.
    NormTargetUnreachable { target: f64, spectral_radius: f64 },
    /// `eps` outside (0, 1).
    EpsOutOfRange { eps: f64 },
    /// No stage of the ideal chain admits a lift.
    ChainExhausted,
    /// Generic precondition violation.
    InvalidArgument(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotSquare { rows, cols } => {
                write!(f, "matrix must be square, got {rows}x{cols}")
            }
            Error::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            Error::EmptyCoefficients => write!(f, "coefficient list is empty"),
            Error::ZeroLeadingCoefficient => write!(f, "leading coefficient is zero"),
            Error::DegreeZero => write!(f, "polynomial has degree zero"),
            Error::RootsTooClose { separation, tol } => write!(
                f,
                "roots separated by {separation:.3e} are closer than the clustering tolerance {tol:.3e}"
            ),
            Error::RootNotInPolynomial => write!(f, "root is not a root of the polynomial"),
            Error::ConvergenceFailed(what) => write!(f, "{what} failed to converge"),
            Error::SupportOutOfRange { index, blocks } => write!(
                f,
                "support index {index} out of range for an algebra with {blocks} blocks"
            ),
            Error::ChainNotMonotone { position } => write!(
                f,
                "ideal chain is not increasing at position {position}"
            ),
            Error::IllConditioned { cond, bound } => write!(
                f,
                "1+i has condition number {cond:.3e}, above the bound {bound:.3e}"
            ),
            Error::RelationViolated { residual, tol } => write!(
                f,
                "relation violated: residual {residual:.3e} exceeds tolerance {tol:.3e}"
            ),
            Error::AmbiguousRank { sigma, lo, hi } => write!(
                f,
                "ambiguous numerical rank: singular value {sigma:.3e} inside ({lo:.3e}, {hi:.3e})"
            ),
            Error::NotIdempotent { residual, tol } => write!(
                f,
                "not an idempotent: |b^2 - b| = {residual:.3e} exceeds {tol:.3e}"
            ),
            Error::BrokenIdempotent { eigenvalue } => write!(
                f,
                "numerically broken idempotent: b*b^* has eigenvalue {eigenvalue:.3e} inside (0.1, 0.9)"
            ),
            Error::DiagonalSnapFailed { deviation, tol } => write!(
                f,
                "diagonal block deviates from label*I by {deviation:.3e}, above the snap gate {tol:.3e}"
            ),
            Error::ToleranceConflict(msg) => write!(f, "tolerance conflict: {msg}"),
            Error::NormTargetUnreachable { target, spectral_radius } => write!(
                f,
                "norm target {target:.6} is not above the spectral radius {spectral_radius:.6}"
            ),
            Error::EpsOutOfRange { eps } => write!(f, "eps {eps} outside (0, 1)"),
            Error::ChainExhausted => write!(f, "chain exhausted without an admissible stage"),
            Error::InvalidArgument(msg) => write!(f, "{msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
