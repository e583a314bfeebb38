use thiserror::Error;

/// Everything that can go wrong across the toolkit.
///
/// Numerical failures (`NoConvergence`) are kept distinct from input
/// validation so callers can map them to different process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix was supplied whose determinant is not exactly 1.
    #[error("matrix has determinant {det}, expected exactly 1")]
    NotUnimodular { det: String },

    /// An operation requiring integer entries met a proper fraction.
    #[error("entry {entry} is not an integer")]
    NonIntegerEntry { entry: String },

    /// A half-plane point must have strictly positive imaginary part.
    #[error("point {re}+{im}i lies outside the open upper half-plane")]
    InvalidPoint { re: f64, im: f64 },

    /// A path or interval degenerated to a single point.
    #[error("degenerate pair: {0}")]
    DegeneratePair(String),

    /// Adaptive quadrature hit its refinement cap without stabilising.
    #[error("quadrature did not converge within {doublings} refinements")]
    NoConvergence { doublings: u32 },

    /// A finite model failed structural validation.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Malformed textual input (rational, point, word, matrix, JSON...).
    #[error("parse error: {0}")]
    Parse(String),
}
