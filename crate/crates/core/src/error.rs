use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("not a git repository: {}", .0.display())]
    NotARepository(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("git {command} failed: {stderr}")]
    Git { command: String, stderr: String },

    #[error("unknown commit: {0}")]
    UnknownCommit(String),

    #[error("line {line_no} out of range for {path} ({len} lines)")]
    LineOutOfRange { path: String, line_no: u32, len: u32 },

    #[error("file {path} absent at {commit}")]
    FileAbsent { path: String, commit: String },

    #[error("malformed diff at line {line}: {reason}")]
    MalformedDiff { line: usize, reason: String },

    #[error("malformed ticket export: {0}")]
    MalformedExport(String),

    #[error("schema mismatch at column {position}: found {found:?}, expected {expected:?}")]
    SchemaMismatch {
        position: usize,
        found: String,
        expected: String,
    },

    #[error("malformed row {row}: column {column}: {reason}")]
    MalformedRow {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("too few rows: need at least 2 of each class (have {positives} defective, {negatives} clean)")]
    TooFewRows { positives: usize, negatives: usize },

    #[error("only one class present in training data")]
    SingleClass,

    #[error("bad shape: {0}")]
    BadShape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown pair: {0}")]
    UnknownPair(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
