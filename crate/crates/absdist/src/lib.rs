//! Abstract interpretation of logic programs with metrics over abstract
//! domains and whole analyses.

pub mod analyzer;
pub mod bench;
pub mod domain;
pub mod lattice;
pub mod metrics;
pub mod parser;
pub mod program;
pub mod regtypes;
pub mod term;
pub mod term_metric;
