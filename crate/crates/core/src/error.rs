use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state component `{component}` became non-finite at t = {t}")]
    NonFinite { t: f64, component: String },

    #[error("cost vanishes at x = {x} (|h(x)| = {value:e}); the separable solution is undefined")]
    VanishingCost { x: f64, value: f64 },

    #[error("could not bracket H(x) = {target} starting from x = {start}")]
    NoBracket { target: f64, start: f64 },

    #[error("initial state has dimension {got}, system `{system}` expects {expected}")]
    DimensionMismatch {
        system: String,
        expected: usize,
        got: usize,
    },

    #[error("trajectories are sampled on different time grids")]
    GridMismatch,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
