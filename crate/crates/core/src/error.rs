use thiserror::Error;

/// Errors raised by the library. Each variant maps to one failure mode of an
/// operation; the CLI turns them into exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Daubechies order {0} is unsupported (expected 1..=10)")]
    OrderUnsupported(usize),
    #[error("cascade level {0} is out of range (expected 1..=14)")]
    GridTooLarge(u32),
    #[error("grid step {dt} is too coarse for support {support} (need dt <= T/16)")]
    GridTooCoarse { dt: f64, support: f64 },
    #[error("omega*T = {0} is a multiple of pi; phase relation is singular")]
    BranchSingularity(f64),
    #[error("theta = {0} makes tan(theta) unbounded")]
    TangentSingularity(f64),
    #[error("model frequencies must be sorted ascending")]
    InputNotSorted,
    #[error("{samples} samples cannot determine {params} parameters")]
    Underdetermined { samples: usize, params: usize },
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("target is constant; R^2 is undefined")]
    DegenerateTarget,
    #[error("no preset named `{0}`")]
    NoSuchPreset(String),
    #[error("bad scale grid: {0}")]
    BadScales(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
