use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The drift matrix has an eigenvalue with non-negative real part.
    #[error("unstable drift matrix (max Re(eig) = {max_real:.6e})")]
    Unstable {
        max_real: f64,
        eigenvalues: Vec<Complex64>,
    },

    #[error("numerical failure in {context}: {detail}")]
    Numerical { context: &'static str, detail: String },

    /// The requested excitation-count outcome has (numerically) zero probability.
    #[error("zero-probability outcome s = {s} (G_s(0) = {g0:.3e})")]
    ZeroProbability { s: usize, g0: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn numerical(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            context,
            detail: detail.into(),
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            Error::Unstable { .. } => 3,
            Error::Domain(_) | Error::Io(_) => 2,
            Error::Numerical { .. } | Error::ZeroProbability { .. } => 4,
        }
    }
}
