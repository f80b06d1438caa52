use thiserror::Error;

/// Errors produced by parsing, validation, and report finalization.
#[derive(Debug, Error)]
pub enum CorefError {
    /// Malformed input text; `line` is 1-based within the parsed string.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A document-scoped problem (bad indices, duplicate spans, missing layers).
    #[error("document {doc_id}: {msg}")]
    Doc { doc_id: String, msg: String },

    /// An operation was asked for something undefined or inconsistent.
    #[error("{0}")]
    Invalid(String),
}

impl CorefError {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        CorefError::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn doc(doc_id: impl Into<String>, msg: impl Into<String>) -> Self {
        CorefError::Doc {
            doc_id: doc_id.into(),
            msg: msg.into(),
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CorefError::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, CorefError>;
