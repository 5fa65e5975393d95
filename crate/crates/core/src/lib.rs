//! Nested words, weighted visibly pushdown automata, and the nested Hankel
//! matrix that links them.
//!
//! * [`nested_words`]: tagged words, nested words, enumeration.
//! * [`linalg`]: dense matrices, SVD, rank, least squares.
//! * [`wvpa`]: automata and their behavior.
//! * [`oracle`]: functions on well-matched words.
//! * [`hankel`]: finite Hankel blocks and their ranks.
//! * [`synthesis`]: automata from finite-rank Hankel matrices.

pub mod error;
pub mod hankel;
pub mod linalg;
pub mod nested_words;
pub mod oracle;
pub mod synthesis;
pub mod wvpa;

pub use error::{Error, Result};
pub use hankel::{build_block, format_sig12, select_spanning, stabilized_block, word_hankel_rank_growth, HankelBlock};
pub use linalg::{Matrix, Vector};
pub use nested_words::{Alphabet, BaseLetter, LetterKind, NestedWord, TaggedLetter, TaggedWord};
pub use oracle::FunctionOracle;
pub use synthesis::{synthesize, verify_equivalence, SpanningGrid, SynthesisOptions, SynthesisReport};
pub use wvpa::Wvpa;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/nested-words.md")]
    mod nested_words {}
    #[doc = include_str!("../../../book/src/automata.md")]
    mod automata {}
    #[doc = include_str!("../../../book/src/hankel.md")]
    mod hankel {}
    #[doc = include_str!("../../../book/src/synthesis.md")]
    mod synthesis {}
}
