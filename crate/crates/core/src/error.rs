use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("grazing singularity in Lambda (|a| = {a:e}); use projected_area")]
    GrazingSingularity { a: f64 },

    #[error("degenerate visibility: projected area {0:e} is too small")]
    DegenerateVisibility(f64),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("majorant violation: extinction {extinction:e} exceeds majorant {majorant:e} at sdf value {sdf:e}")]
    MajorantViolation { extinction: f64, majorant: f64, sdf: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::UnsupportedGeometry(_) => 1,
            Error::GrazingSingularity { .. }
            | Error::DegenerateVisibility(_)
            | Error::NumericFailure(_)
            | Error::MajorantViolation { .. } => 2,
            Error::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
