use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GgrError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("accuracy not reached: achieved {achieved:.3e} ({context})")]
    Accuracy { achieved: f64, context: String },
    #[error("solver did not converge: residual {residual:.3e} ({context})")]
    Solver { residual: f64, context: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("grid too coarse: {reason}; need M >= {needed_m}")]
    Refinement { needed_m: usize, reason: String },
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, GgrError>;
