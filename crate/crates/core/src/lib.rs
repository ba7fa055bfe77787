//! Cognate discovery, reference validation, noun-class statistics and
//! phylogenetic recovery over per-language lemma embeddings, with a
//! synthetic language-family generator that plants ground truth for every
//! stage.

pub mod corpus;
pub mod discovery;
pub mod error;
pub mod filtering;
pub mod geometry;
pub mod normalize;
pub mod nounclass;
pub mod permutation;
pub mod phylo;
pub mod synthfam;
pub mod validation;

pub use error::{Error, Result};
