use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("measure support radius {required} exceeds the configured maximum {limit}")]
    SupportTooLarge { required: f64, limit: f64 },

    #[error("series truncation did not converge at lambda = {lambda} (term ratio {ratio:e})")]
    NonConvergentSeries { lambda: f64, ratio: f64 },

    #[error("level {level} not crossed (tails {left}, {right})")]
    LevelNotCrossed { level: f64, left: f64, right: f64 },

    #[error("range violation: {0}")]
    Range(String),

    #[error("comparison principle violated numerically: projection correction {correction:e} > {tol:e}")]
    ProjectionBudget { correction: f64, tol: f64 },

    #[error("epsilon too large: eps = {eps}, worst residual margin {margin:e}; try eps = {suggested}")]
    EpsilonTooLarge { eps: f64, margin: f64, suggested: f64 },

    #[error("order preservation broken at iteration {iteration}: {detail}")]
    OrderBroken { iteration: usize, detail: String },

    #[error("fixed point iteration for n = {n} did not converge in {iterations} iterations (last step {last:e})")]
    NotConverged {
        n: u32,
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("speed estimates not Cauchy across n_list (spread {spread:e} > {tol:e}); increase n_list")]
    NotCauchy { spread: f64, tol: f64 },

    #[error("profile not settled; enlarge domain or time (tail {tail})")]
    NotSettled { tail: f64 },

    #[error("domain too small: crossing {crossing} left the window [{lo}, {hi}]")]
    DomainTooSmall { crossing: f64, lo: f64, hi: f64 },

    #[error("bound applies to sub-fronts only")]
    NotSubFront,

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
