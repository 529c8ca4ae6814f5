use std::path::PathBuf;

use thiserror::Error;

/// Malformed textual values: months, spans, model names.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("invalid month `{0}`, expected YYYY-MM")]
    Month(String),
    #[error("invalid month span `{0}`, expected YYYY-MM..YYYY-MM with start <= end")]
    Span(String),
    #[error("unknown retrieval model `{0}`")]
    Model(String),
    #[error("invalid date `{0}`, expected YYYY-MM-DD")]
    Date(String),
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write corpus {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid synthetic corpus request: {0}")]
    Synthetic(String),
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("cannot build an index over an empty corpus")]
    EmptyCorpus,
    #[error("index i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("index format version {found} is not supported (expected {expected})")]
    Version { found: u8, expected: u8 },
    #[error("index file truncated: expected {expected} payload bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("index checksum mismatch")]
    Checksum,
    #[error("corrupt index: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RankError {
    #[error("query has no terms after tokenization")]
    EmptyQuery,
    #[error("no query term occurs in the collection")]
    NoMatches,
    #[error("no documents match the query under the given constraints")]
    NoMatchesUnderConstraints,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("unknown stage {0}")]
    UnknownStage(u64),
    #[error("the trail has no query yet; the first action must be a new query")]
    NoQuery,
    #[error("invalid export at {path}: {message}")]
    Schema { path: String, message: String },
}
