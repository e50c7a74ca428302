//! Learning regular expressions that describe batches of strings.
//!
//! Given training pairs of (batch of strings, expert-written expression),
//! the learner fits a linear model over joint features of a batch and a
//! candidate expression. At prediction time the decoder aligns the batch,
//! builds a finite space of specializations of the alignment from
//! subexpressions seen in training, and returns the highest-scoring one.
//!
//! Module map:
//!
//! - [`regex`]: the dialect, its parser and canonical printer, syntax trees
//! - [`matcher`]: membership, parse-tree enumeration, matching lists
//! - [`align`]: pairwise and progressive alignments of strings
//! - [`loss`]: tree-path loss and zero-one loss
//! - [`features`]: the joint feature map
//! - [`decoder`]: search-space construction and (loss-augmented) decoding
//! - [`learner`]: cutting-plane training and model files
//! - [`corpus`]: corpora, synthetic campaigns, evaluation

pub mod align;
pub mod corpus;
pub mod decoder;
mod error;
pub mod features;
pub mod learner;
pub mod loss;
pub mod matcher;
pub mod regex;

pub use error::{Error, Result};
