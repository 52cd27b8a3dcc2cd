//! Evaluation and retrieval toolkit for universal (word, phrase and sentence)
//! embeddings.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`embed_store`] loads word and sequence vector tables from text files.
//! - [`composer`] tokenizes text and builds mean-pooled bag-of-words vectors.
//! - [`analogy`] holds analogy datasets at every linguistic level, builds them,
//!   solves them with normalized vector offsets and scores them, including the
//!   cross-level preservation ratios.
//! - [`retrieval`] ranks FAQ question-answer pairs with TF-IDF, BM25 or dense
//!   cosine and computes Top-1 accuracy and MRR.
//! - [`data_prep`] turns paraphrase-database dumps and NLI files into labelled
//!   training examples.
//! - [`projection`] computes 2-D PCA layouts and pair-difference vectors.

pub mod analogy;
pub mod composer;
pub mod data_prep;
pub mod embed_store;
pub mod error;
pub mod projection;
pub mod retrieval;
pub mod vecmath;

pub use error::{Error, Result};
