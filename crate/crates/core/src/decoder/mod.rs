//! Grammar-constrained decoding of programs over a persistent tree store.
//!
//! [`decode`] runs a best-first search that always expands the leftmost
//! hole of each partial tree. A [`Scorer`] ranks the legal productions at
//! a hole; [`UniformScorer`] and the corpus-based [`FrequencyScorer`] are
//! provided.

mod grammar;
mod scorer;
mod search;
mod store;

use thiserror::Error;

pub use grammar::{derivations, BodyShape, DerivationStep, Grammar, Nonterminal, Production, ProductionKind, Skeleton};
pub use scorer::{FrequencyScorer, Scorer, UniformScorer};
pub use search::{decode, decode_in, extend, legal_extensions, project, Decoded, SearchConfig};
pub use store::{History, Hole, HoleContext, NodeId, NodeView, NtId, PartialTree, ProdId, TreeStore};

#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("no hole at index {0}")]
    UnknownHole(usize),
    #[error("production {0} is not legal at this hole")]
    IllegalProduction(String),
    #[error("scorer returned an invalid log-probability for {0}")]
    BadScore(String),
    #[error("tree still has holes")]
    Incomplete,
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error("bad skeleton: {0}")]
    Skeleton(String),
    #[error("bad search config: {0}")]
    Config(&'static str),
}
