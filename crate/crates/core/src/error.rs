use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    Dimension {
        op: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The equality constraints of a box LP admit no solution.
    #[error("linear program is infeasible")]
    Infeasible,

    #[error("constrained zonotope is empty")]
    EmptySet,

    #[error("matrix is not orthogonal (residual {residual:.3e})")]
    NotOrthogonal { residual: f64 },

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("data matrix is rank deficient (sigma_min/sigma_max = {ratio:.3e})")]
    Identifiability { ratio: f64 },

    #[error("degenerate spectrum: eigen-gap {gap:.3e} too small")]
    DegenerateSpectrum { gap: f64 },

    #[error("volume budget exceeded: {subsets} subsets > cap {cap}")]
    Budget { subsets: u128, cap: u128 },

    #[error("unknown method label `{0}`")]
    UnknownMethod(String),

    #[error("objective evaluation failed: {0}")]
    Objective(String),
}

impl Error {
    pub(crate) fn dim(op: &'static str, expected: usize, got: usize) -> Self {
        Error::Dimension { op, expected, got }
    }

    pub(crate) fn check_dim(op: &'static str, expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::dim(op, expected, got))
        }
    }
}
