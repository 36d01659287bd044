use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("cannot compare segmentations of different words: {candidate:?} vs {reference:?}")]
    WordMismatch {
        candidate: String,
        reference: String,
    },

    #[error("marker symbol {marker:?} occurs in word {word:?}")]
    MarkerCollision { marker: char, word: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("token {token:?} is out of vocabulary and smoothing is disabled")]
    OovScoring { token: String },

    #[error("context {context:?} was never observed and smoothing is disabled")]
    UnseenContext { context: Vec<String> },

    #[error("attention row {row} has no positive weight")]
    DegenerateRow { row: usize },

    #[error("render error: {0}")]
    Render(String),

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
