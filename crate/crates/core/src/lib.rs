//! Labelled relation-extraction training data from knowledge-graph facts.
//!
//! The pipeline turns a triple dump into synthetic two-column tables
//! ([`synth`]), attaches retrieved sentences that connect each row's cells
//! ([`corpus`] and [`context`]), infers column headers from a web-table corpus
//! ([`headers`]), serializes everything as JSON Lines ([`dataset`]) and scores
//! predictions with micro precision/recall/F1 ([`eval`]).

pub mod config;
pub mod context;
pub mod corpus;
pub mod dataset;
mod error;
pub mod eval;
pub mod headers;
pub mod jsonl;
pub mod kg;
pub mod pipeline;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};

/// Relation label of synthetic tables whose columns stand in no known relation.
pub const NEGATIVE_LABEL: &str = "__NEGATIVE__";
