use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spec error: {0}")]
    Spec(String),
    #[error("depth error: level {needed} requested, spec provides levels up to {available}")]
    Depth { needed: usize, available: usize },
    #[error("budget error: {needed} letters requested, budget allows {budget}")]
    Budget { needed: String, budget: u64 },
    #[error("range error: {0}")]
    Range(String),
    #[error("undecidable: {0}")]
    Undecidable(String),
    #[error("extended word: position {0} is an unfilled hole and no fill letter was given")]
    ExtendedWord(i64),
    #[error("bound exceeded: answer is larger than {lower_bound}")]
    BoundExceeded { lower_bound: u64 },
    #[error("argument error: {0}")]
    Arg(String),
    #[error("potential error: {0}")]
    Potential(String),
    #[error("pattern error: {0}")]
    Pattern(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Spec(_)
            | Error::Arg(_)
            | Error::Potential(_)
            | Error::ExtendedWord(_) => 2,
            Error::Depth { .. }
            | Error::Budget { .. }
            | Error::Range(_)
            | Error::Undecidable(_)
            | Error::BoundExceeded { .. }
            | Error::Pattern(_) => 3,
            Error::Verification(_) => 4,
            Error::Io(_) => 5,
        }
    }
}
