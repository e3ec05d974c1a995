//! Error types shared across the crate.

use alloc::string::String;
use thiserror::Error;

/// Everything that can go wrong while building or evaluating a connection.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// The input text did not parse; `offset` is a byte offset into it.
    #[error("syntax error at byte {offset}: {message}")]
    Syntax {
        /// Byte offset of the offending token.
        offset: usize,
        /// Short description of what was expected or found.
        message: String,
    },
    /// An identifier that is neither a declared variable nor a function.
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier {
        /// Byte offset of the identifier.
        offset: usize,
        /// The identifier text.
        name: String,
    },
    /// Empty input where an expression was required.
    #[error("empty expression")]
    EmptyExpression,
    /// An evaluation left the domain of one of the elementary functions
    /// (logarithm of a non-positive value, square root of a negative value).
    #[error("domain error while evaluating `{context}`")]
    Domain {
        /// What was being evaluated.
        context: String,
    },
    /// The coframe matrix is numerically singular at the queried point.
    #[error("singular frame: |det e^a_mu| = {det:e} below threshold {threshold:e}")]
    SingularFrame {
        /// Absolute determinant found.
        det: f64,
        /// Threshold it was compared against.
        threshold: f64,
    },
    /// The metric vanishes at the queried direction; the connection formulas
    /// divide by `L` and are undefined on the null cone.
    #[error("null direction: |L| = {l:e} is below {threshold:e}")]
    NullDirection {
        /// `|L(theta)|` found.
        l: f64,
        /// Threshold it was compared against.
        threshold: f64,
    },
    /// Two singular values of the Hessian straddle the rank cutoff too
    /// closely for the rank to be trusted.
    #[error("ambiguous Hessian rank: singular values {above:e} and {below:e} straddle the cutoff {cutoff:e}")]
    RankUnstable {
        /// Smallest singular value counted into the rank.
        above: f64,
        /// Largest singular value dropped from the rank.
        below: f64,
        /// The cutoff used.
        cutoff: f64,
    },
    /// No index subset of the required size yields an invertible Hessian block.
    #[error("no invertible Hessian block of size {size}: best |det| = {best_det:e}")]
    BlockSingular {
        /// Requested block size.
        size: usize,
        /// Best determinant magnitude over the subsets tried.
        best_det: f64,
    },
    /// The Hessian does not have the block-diagonal shape required by the
    /// simplified Berwald formula.
    #[error("Hessian is not in block form: max |L_I| / cross-block entry = {worst:e}")]
    NotBlockForm {
        /// Largest offending entry.
        worst: f64,
    },
    /// The holonomic Hessian is rank-deficient, so the holonomic-coordinate
    /// route (which is restricted to regular metrics) does not apply.
    #[error("metric is not regular in holonomic coordinates: rank {rank}, expected {expected}")]
    NotRegular {
        /// Rank found.
        rank: usize,
        /// Rank required.
        expected: usize,
    },
    /// The adaptive step controller could not reach the requested accuracy.
    #[error("integration step failure at s = {s}: step size underflow")]
    StepFailure {
        /// Curve parameter where the controller gave up.
        s: f64,
    },
    /// A trajectory is too short for the finite-difference stencils.
    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples {
        /// Number of samples supplied.
        got: usize,
        /// Minimum required.
        need: usize,
    },
    /// Mismatched dimensions between inputs.
    #[error("dimension mismatch: {message}")]
    Dimension {
        /// Description of the mismatch.
        message: String,
    },
}
