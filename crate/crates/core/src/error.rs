use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input `{field}`: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    #[error("alpha = {alpha} lies within the guard band of a tan(alpha/2) pole")]
    Pole { alpha: f64 },

    #[error("alpha = {alpha} is above the critical value {critical}: exponents are complex")]
    ComplexBranch { alpha: f64, critical: f64 },

    #[error("root search in [{lo}, {hi}] did not converge to a sign change (|f| = {residual:e})")]
    Bracketing { lo: f64, hi: f64, residual: f64 },

    #[error("only {found} of {requested} eigenvalues could be resolved below alpha = {limit}")]
    PartialResult {
        found: usize,
        requested: usize,
        limit: f64,
    },

    #[error("Gram matrix is numerically singular at mode {mode} (condition ~ {condition:e}); use fewer modes")]
    DegenerateBasis { mode: usize, condition: f64 },

    #[error("mode alpha = {alpha} sits on the critical point: mu1 = mu2")]
    DegenerateMode { alpha: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("non-finite density at step j = {step}, node i = {node} (lambda = {lambda})")]
    Instability {
        step: usize,
        node: usize,
        lambda: f64,
    },

    #[error("time ranges do not overlap: [{a_start}, {a_end}] vs [{b_start}, {b_end}]")]
    NonOverlapping {
        a_start: f64,
        a_end: f64,
        b_start: f64,
        b_end: f64,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            reason: reason.into(),
        }
    }
}
