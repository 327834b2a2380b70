use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("rank {rank} out of range (valid: {lo}..={hi})")]
    RankOutOfRange { rank: usize, lo: usize, hi: usize },

    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),

    #[error("invalid poset: {0}")]
    InvalidPoset(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("factor {factor} is stored only through rank {have}, need {need}")]
    FactorTooShort { factor: usize, have: usize, need: usize },

    #[error("chain cannot be extended past rank {0}: no cover that covers exactly one element")]
    ChainStuck(usize),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("matrix is singular")]
    Singular,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("growth certificate failed at rank {n}: {reason}")]
    Certificate { n: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
