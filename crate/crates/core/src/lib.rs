//! Compressed self-index over an LZ77 parse and a balanced grammar.

pub mod boundary;
pub mod corpus;
pub mod error;
pub mod fingerprint;
pub mod geometry;
pub mod grammar;
pub mod index;
pub mod lz77;
pub mod trie;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

mod rmq;
mod suffix;

pub use error::{Error, Result};
pub use index::{BuildOptions, LocateOptions, Mode, OccKind, Occurrence, SelfIndex};
