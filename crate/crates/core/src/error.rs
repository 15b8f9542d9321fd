use num_complex::Complex64;
use thiserror::Error;

/// Which operator a determinant test refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    /// The realization `H_{θ0,θR}` itself.
    Main,
    /// `H_{θ0,0}`, the normalizing operator of `u₋`.
    LeftAuxiliary,
    /// `H_{0,θR}`, the normalizing operator of `u₊`.
    RightAuxiliary,
    /// The realization with the primed angles.
    Primed,
}

impl std::fmt::Display for Operator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Operator::Main => "H(θ0,θR)",
            Operator::LeftAuxiliary => "H(θ0,0)",
            Operator::RightAuxiliary => "H(0,θR)",
            Operator::Primed => "H(θ0',θR')",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("z = {z} is (numerically) an eigenvalue of {operator}: |Δ| = {det_abs:.3e}")]
    EigenvalueHit {
        z: Complex64,
        operator: Operator,
        det_abs: f64,
    },
    #[error("step size underflow at x = {x} (h = {h:.3e}); the problem is too stiff for the tolerance")]
    StepUnderflow { x: f64, h: f64 },
    #[error("integration accuracy check failed: {0}")]
    Accuracy(String),
    #[error("singular matrix in {context} (condition number {cond:.3e})")]
    Singular { context: String, cond: f64 },
    #[error("pole hit: {0}")]
    Pole(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("eigenvalue search failed: {0}")]
    SearchFailure(String),
    #[error("zero of Δ on or near the contour; inflate the rectangle by about {suggested_inflation:.3e}")]
    ZeroOnContour { suggested_inflation: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
