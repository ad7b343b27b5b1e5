//! Lexical complexity prediction workbench.
//!
//! The crate covers target sampling from tagged corpora ([`corpus`]), lexical
//! resources and the fixed-layout word feature vector ([`resources`],
//! [`features`]), crowd annotation quality control and aggregation
//! ([`annotations`]), from-scratch predictors ([`models`]) and the evaluation
//! drivers ([`eval`]).

pub mod annotations;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod models;
pub mod resources;
