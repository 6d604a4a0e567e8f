use std::path::PathBuf;

use crate::aprank::ScoreState;
use crate::month::YearMonth;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{location}: {message}")]
    Ingest { location: String, message: String },

    #[error("{location}: duplicate paper id {id:?}")]
    DuplicatePaper { id: String, location: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("corpus is empty (N={papers}, M={authors})")]
    EmptyCorpus { papers: usize, authors: usize },

    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("cannot normalize a vector with non-positive total {0}")]
    ZeroMass(f64),

    #[error("no convergence after {iterations} iterations (last delta {delta:e})")]
    NonConvergence {
        iterations: usize,
        delta: f64,
        state: Box<ScoreState>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid month {0:?}, expected YYYY-MM")]
    InvalidMonth(String),

    #[error("papers without pub_month: {}", .0.join(", "))]
    MissingPubMonth(Vec<String>),

    #[error("paper {paper} published {published} after observing month {observe}")]
    PublishedAfterObservation {
        paper: String,
        published: YearMonth,
        observe: YearMonth,
    },

    #[error("need at least 2 entries to compare, got {0}")]
    TooFewEntries(usize),

    #[error("non-finite score at position {0}")]
    NonFinite(usize),

    #[error("entity sets differ: only in first [{}], only in second [{}]", .only_a.join(", "), .only_b.join(", "))]
    EntityMismatch {
        only_a: Vec<String>,
        only_b: Vec<String>,
    },

    #[error("ranking table has no score for paper {0}")]
    MissingScore(String),

    #[error("metrics line {line}: {message}")]
    Metrics { line: u64, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
