use std::path::PathBuf;

use crate::regex::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("syntax error: {0}")]
    Syntax(#[from] ParseError),
    #[error("string {string:?} is not in the language of {regex}")]
    NotInLanguage { regex: String, string: String },
    #[error("empty batch")]
    EmptyBatch,
    #[error("attribute vector of an empty set")]
    EmptySet,
    #[error("character index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("search space has no alternative to the true expression")]
    DegenerateSpace,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("model file: {0}")]
    Model(String),
    #[error("{path}:{line}: {msg}")]
    Corpus { path: PathBuf, line: usize, msg: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn not_in_language(regex: &crate::regex::Regex, string: &str) -> Error {
        Error::NotInLanguage {
            regex: regex.to_string(),
            string: string.to_string(),
        }
    }
}
