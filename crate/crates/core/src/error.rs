use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite solution value at x = {x}")]
    Overflow { x: f64 },

    #[error("no bracket for eigenvalue index {index} inside [{lower}, {upper}]; solver grid too coarse?")]
    BracketNotFound {
        index: usize,
        lower: f64,
        upper: f64,
    },

    #[error("eigenvalue {value} lies below -sup|V| = {floor}; the shifted potential is required")]
    NegativeEigenvalue { value: f64, floor: f64 },

    #[error("eigenvalue {index} is {lambda} <= 0; shift the potential by sup|V| first")]
    ShiftRequired { index: usize, lambda: f64 },

    #[error("sampled function is numerically identically zero; zero counting is undefined")]
    DegenerateSampler,

    #[error("sampled function vanishes on the contour near z = {re} + {im}i")]
    ZeroOnContour { re: f64, im: f64 },

    #[error("argument-principle count rejected (residual {residual:.3} from nearest integer at r = {radius})")]
    CountRejected { radius: f64, residual: f64 },

    #[error("pole of the Weyl function near z = {re} + {im}i")]
    PoleProximity { re: f64, im: f64 },

    #[error("eigenvalues {first} and {second} collide within solver tolerance")]
    EigenvalueCollision { first: usize, second: usize },

    #[error("jacobian rank collapse ({rank} of {unknowns}); add data or raise the regularization")]
    RankCollapse { rank: usize, unknowns: usize },

    #[error("cosh overflow guard: mode {index} with eigenvalue {lambda} exceeds the argument cap at t = {t}")]
    CoshOverflow { index: usize, lambda: f64, t: f64 },

    #[error("moment problem infeasible at truncation: {0}")]
    Infeasible(String),

    #[error("least-squares system is rank deficient ({rank} of {unknowns}); use a denser z grid")]
    RankDeficient { rank: usize, unknowns: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
