use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("aliasing: padding factor {pad} below the required {required} for degree {degree}")]
    Aliasing { pad: usize, required: f64, degree: usize },

    #[error("numeric range exceeded: {0}")]
    NumericRange(String),

    #[error("smallness violated: linear-part B-norm {b_norm:.6e} exceeds half the budget nu = {nu:.6e}")]
    Smallness { b_norm: f64, nu: f64 },

    #[error("Picard iteration diverged at iteration {iteration} (contraction factors {factors:?})")]
    Divergence { iteration: usize, factors: Vec<f64> },

    #[error("spectral truncation monitor breached: outer-shell fraction {fraction:.3e} > {tol:.1e}")]
    SpectralOverflow { fraction: f64, tol: f64 },

    #[error("ODE oracle failure: {0}")]
    Oracle(String),

    #[error("inapplicable: {0}")]
    Inapplicable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
