//! BitMat-indexed RDF store and evaluation engine for SPARQL queries built
//! from basic graph patterns, OPTIONAL, UNION, FILTER and DISTINCT.

pub mod analysis;
pub mod distinct;
pub mod error;
pub mod exec;
pub mod explain;
pub mod oracle;
pub mod prune;
pub mod query;
pub mod rewrite;
pub mod store;
pub mod term;
pub mod working;

pub use error::{Error, Result};
pub use query::{parse, FilterExpr, PatternNode, Query, TriplePattern};
pub use store::Store;
pub use term::{Term, TermOrVar, Variable};
