use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("{k} folds cannot evenly partition {n} points")]
    FoldsIndivisible { n: usize, k: usize },

    #[error("fold partition covers {partition} points but the dataset has {data}")]
    FoldMismatch { partition: usize, data: usize },

    #[error("algorithm `{0}` is not symmetric; full conformal requires a symmetric algorithm")]
    NotSymmetric(String),

    #[error("grid has {0} points, above the 1e7 guard")]
    GridTooLarge(f64),

    #[error("adversarial events do not all hold (e_max={e_max}, e_mod={e_mod}, e_unif={e_unif})")]
    EventsNotSatisfied {
        e_max: bool,
        e_mod: bool,
        e_unif: bool,
    },

    #[error("linear system is singular")]
    Singular,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}
