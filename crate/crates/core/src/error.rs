use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is empty: {0}")]
    EmptyGraph(&'static str),

    #[error("invalid weight {weight} on record {src} -> {dst}")]
    InvalidWeight { src: String, dst: String, weight: f64 },

    #[error("missing required column `{0}` in CSV header")]
    MissingColumn(String),

    #[error("bad column mapping `{0}` (expected key=value with key in year,reporter,partner,flow,value)")]
    BadColumnMap(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("histogram is degenerate: all edge weights are equal; pass --threshold to split manually")]
    DegenerateHistogram,

    #[error("no empty-bin discontinuity of at least {min_gap} bins found in a {bins}-bin histogram; pass --threshold to split manually")]
    NoDiscontinuity { bins: usize, min_gap: usize },

    #[error("unsupported motif size {0} (class tables exist for k = 3 and k = 4)")]
    UnsupportedMotifSize(usize),

    #[error("motif id {0} does not encode a connected loop-free pattern")]
    InvalidMotifId(u64),

    #[error("null ensemble failed: {failed} of {total} replicates failed")]
    EnsembleFailed { failed: usize, total: usize },

    #[error("unknown output format `{0}` (expected csv, json or markdown)")]
    UnknownFormat(String),

    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn at_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}

/// Attach a pipeline stage name to any error.
pub trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}
