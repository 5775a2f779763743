use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("model has bounded variation paths: {0}")]
    BoundedVariation(String),

    #[error("bad parameter `{field}`: {reason}")]
    BadParameter { field: String, reason: String },

    #[error("root finding did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("quadrature did not reach tolerance: estimated error {estimate:.3e} > {tolerance:.3e} ({context})")]
    QuadratureFailure {
        estimate: f64,
        tolerance: f64,
        context: String,
    },

    #[error("Laplace inversion missed precision target: estimated relative error {estimate:.3e} > {target:.3e} at x = {x}")]
    InversionFailure { estimate: f64, target: f64, x: f64 },

    #[error("scale-function series diverges outside its domination region: {0}")]
    SeriesDivergence(String),

    #[error("degenerate denominator 1 - (sigma^2/2) Phi'(beta) Phi(beta) = {value:.3e} at beta = {beta}")]
    DegenerateDenominator { beta: f64, value: f64 },

    #[error("bad Monte Carlo configuration: {0}")]
    BadConfig(String),

    #[error("too few crossings for an estimate: {crossings} of {paths} paths")]
    InsufficientCrossings { crossings: usize, paths: usize },

    #[error("estimator requires drift to +infinity, model regime is {0}")]
    WrongRegime(String),

    #[error("deadline exceeded during {0}")]
    DeadlineExceeded(String),

    #[error("model document: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, LevyError>;

pub(crate) fn bad_param(field: &str, reason: impl Into<String>) -> LevyError {
    LevyError::BadParameter {
        field: field.to_string(),
        reason: reason.into(),
    }
}
