//! Simple Toeplitz subshifts: words, factor statistics, de Bruijn graphs and
//! the spectral side of the associated Jacobi operators.

pub mod cli;
pub mod closed_forms;
pub mod debruijn;
pub mod error;
pub mod oracle;
pub mod spec_io;
pub mod spectral;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
pub use words::{Alphabet, CodingSpec, Letter, Tail, TailLetters, Word};
