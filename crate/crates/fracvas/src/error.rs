use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate denominator in {0}")]
    Degenerate(&'static str),
    #[error("circulant embedding has eigenvalue {min:e} below tolerance (max {max:e})")]
    Embedding { min: f64, max: f64 },
    #[error("size limit exceeded: n = {n} > {limit}")]
    SizeLimit { n: usize, limit: usize },
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("outside mgf domain: D = {0}")]
    MgfDomain(f64),
    #[error("panel misalignment: {0} vs {1}")]
    Misaligned(usize, usize),
    #[error("sample too small: {got} < {need}")]
    SampleSize { got: usize, need: usize },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{failed} of {total} replications failed")]
    Aborted { failed: usize, total: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
