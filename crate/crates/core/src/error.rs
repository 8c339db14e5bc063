use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate gadget at vertex {vertex}: normalization weight d is zero")]
    DegenerateGadget { vertex: usize },

    #[error("indeterminate ratio: z{} and z{} both vanish{}", .pair.0, .pair.1, location(.vertex))]
    IndeterminateRatio {
        pair: (usize, usize),
        vertex: Option<usize>,
    },

    #[error("singular base change: {0}")]
    InvalidBase(String),

    #[error("parity constraint violated at vertex {vertex} (relative residual {residual:.3e})")]
    NotRealizable { vertex: usize, residual: f64 },

    #[error("not an odd matchgate (relative residual {residual:.3e})")]
    NotAMatchgate { residual: f64 },

    #[error("no solution: {0}")]
    Infeasible(String),

    #[error("degenerate quadratic: leading coefficient vanishes")]
    DegenerateQuadratic,

    #[error("{what} of size {size} exceeds the limit {limit}")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("inconsistent weights: {0}")]
    InconsistentWeights(String),

    #[error("degenerate split: w011 + w101 + w110 = 0")]
    DegenerateSplit,
}

fn location(v: &Option<usize>) -> String {
    match v {
        Some(v) => format!(" at vertex {v}"),
        None => String::new(),
    }
}

impl Error {
    /// True for malformed input (bad shapes, out-of-range parameters), false for
    /// mathematical failures on well-formed input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::InvalidInput(_) | Error::SizeGuard { .. }
        )
    }
}
