use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidSpec(String),
    #[error("site {site} outside 1..={n}")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("readout time {t} precedes the interruption at t0 = {t0}")]
    BeforeInterruption { t: f64, t0: f64 },
    #[error("gate is not unitary: |gamma|^2 + |delta|^2 = {0}")]
    NonUnitaryGate(f64),
    #[error("initial state not normalized: |alpha|^2 + |beta|^2 = {0}")]
    NotNormalized(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("quadrature did not converge: estimated error {achieved:.3e} exceeds {requested:.3e}")]
    NonConvergence { achieved: f64, requested: f64 },
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("golden record: {0}")]
    Golden(String),
}

pub type Result<T> = std::result::Result<T, Error>;
