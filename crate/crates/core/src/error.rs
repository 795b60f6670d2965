use std::path::PathBuf;

use thiserror::Error;

use crate::report::Lob;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("missing accident year {year} for ({company}, {lob}, report year {report_year})")]
    MissingAccidentYear {
        company: String,
        lob: Lob,
        report_year: i32,
        year: i32,
    },

    #[error("cannot pair report years {first} and {second}: {reason}")]
    Pairing {
        first: i32,
        second: i32,
        reason: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("degenerate statistic: {0}")]
    Degenerate(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("grid resolution insufficient: {0}")]
    Resolution(String),

    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    /// True for errors caused by the input data or configuration rather than
    /// by a numerical procedure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::Validation(_)
                | Error::MissingAccidentYear { .. }
                | Error::Pairing { .. }
                | Error::Config(_)
                | Error::Usage(_)
        )
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::MissingAccidentYear { .. } => "missing_accident_year",
            Error::Pairing { .. } => "pairing",
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::Unsupported(_) => "unsupported",
            Error::Degenerate(_) => "degenerate",
            Error::NotPositiveDefinite(_) => "not_positive_definite",
            Error::Estimation(_) => "estimation",
            Error::Resolution(_) => "resolution",
            Error::Usage(_) => "usage",
        }
    }
}
