use std::path::PathBuf;

use thiserror::Error;

use crate::dataset::UserId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("empty dataset: {path}")]
    EmptyDataset { path: PathBuf },
    #[error("rating matrix has no records")]
    NoRecords,
    #[error("degenerate rating scale: r_min == r_max == {value}")]
    DegenerateScale { value: f64 },
    #[error("invalid parameter {name}: {msg}")]
    InvalidParam { name: &'static str, msg: String },
    #[error("unknown user id {0}")]
    UnknownUser(UserId),
    #[error("non-positive rating among the co-rated items of users {u} and {v}")]
    NonPositiveRating { u: UserId, v: UserId },
    #[error("similarity table line {line}: {msg}")]
    TableParse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
