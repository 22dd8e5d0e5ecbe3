use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("multiplier `{name}` is not finite at xi = {xi}")]
    UnboundedSymbol { name: String, xi: f64 },

    #[error("operation requires a mean-zero field (|mean coefficient| = {mean:e})")]
    NonzeroMean { mean: f64 },

    #[error("operation requires a real-valued field")]
    ComplexInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least {needed} time slices, got {got}")]
    TooFewSlices { needed: usize, got: usize },

    #[error("trajectory was not produced by the rescaled equation")]
    NotRescaled,

    #[error("blow-up guard tripped at t = {t}: sup|u| = {sup:e} exceeds {limit:e}")]
    BlowUp { t: f64, sup: f64, limit: f64 },

    #[error("wrap-around condition violated: 2*xi_max*T = {lhs} >= L/4 = {rhs}")]
    WrapAround { lhs: f64, rhs: f64 },

    #[error("quadrature did not converge: relative disagreement {disagreement:.3e} under refinement")]
    QuadratureNonConvergence { disagreement: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
