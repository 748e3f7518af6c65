use thiserror::Error;

/// Errors raised by the geometry, flow and monitoring layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: non-finite value in component {component} at grid point ({i}, {j})")]
    InvalidField { component: usize, i: usize, j: usize },

    #[error("blow-up at t = {t}: non-finite value at grid point ({i}, {j})")]
    BlowUp { t: f64, i: usize, j: usize },

    #[error("initial map is not area decreasing: Tr(S) = {value} <= 0 at grid point ({i}, {j})")]
    NotAreaDecreasing { value: f64, i: usize, j: usize },

    #[error("map is not Lagrangian: residual {residual:e} exceeds {tol:e}")]
    NotLagrangian { residual: f64, tol: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("snapshot format: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
