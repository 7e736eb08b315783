use thiserror::Error;

/// Errors raised while constructing, parsing or transforming the objects of this crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),

    #[error("separator `{0}` already belongs to the alphabet")]
    SeparatorClash(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("substitution domain does not match the grammar terminals: {0}")]
    DomainMismatch(String),

    #[error("substitution is not λ-free: image of `{0}` contains the empty word")]
    NotLambdaFree(String),

    #[error("component {0}: the ω-power base generates only the empty word")]
    OnlyLambda(usize),

    #[error("pushed word of length {0} exceeds the per-transition limit of {1}")]
    PushTooLong(usize, usize),

    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    #[error("invalid grammar: {0}")]
    InvalidGrammar(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
