//! Analysis of positive/negative-conditional term rewriting systems with a
//! constructor sub-signature: critical peaks, syntactic confluence criteria,
//! the depth-stratified reduction relation, and bounded search for
//! non-confluence witnesses.

pub mod cli;
pub mod corpus;
pub mod criteria;
pub mod crs;
pub mod engine;
pub mod peaks;
pub mod report;
pub mod syntax;
pub mod term;
