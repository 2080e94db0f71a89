//! Ranked enumeration for weighted annotation transducers.
//!
//! A query is a cost transducer: a nondeterministic finite automaton whose
//! transitions carry an input symbol, a weight from an ordered abelian group,
//! and a marker. Running it over a text document yields output tuples of
//! (marker, position) pairs, each with a weight, and the engine streams those
//! tuples in non-decreasing weight order.
//!
//! The pipeline reduces the problem to enumerating shortest paths:
//!
//! 1. [`transducer`] — the query model, run semantics, validation.
//! 2. [`dag`] — the document×transducer product DAG and its shortest-path tree.
//! 3. [`eppstein`] — an implicit degree-4 heap over all source-to-sink paths,
//!    navigable by lightweight cursors.
//! 4. [`enumerate`] — best-first and epoch-paced enumerators over that heap.
//! 5. [`nsum`] — sorting of weights expressed as bounded sums over a small
//!    generator basis, including a randomized rounding backend.
//! 6. [`group`] — the weight domain: ordered abelian groups and n-sums.
//!
//! Weights are generic over [`group::GroupElement`]; machine integers and
//! fixed-length integer vectors under lexicographic order are provided and
//! serialize to the file formats understood by the CLI.

pub mod dag;
pub mod enumerate;
pub mod eppstein;
pub mod fixtures;
pub mod group;
pub mod nsum;
pub mod transducer;

mod exec;

pub use dag::{build_product_dag, LabeledWeightedDag, ShortestPathTree};
pub use enumerate::{enumerate_transducer, Algorithm, RankedOutput};
pub use eppstein::{EppsteinDag, PathCursor};
pub use group::{GeneratorBasis, GroupElement, IntVec, NSum, PrecomputeTable};
pub use transducer::{CostTransducer, Document, OutputTuple};

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A file or in-memory description failed to parse.
    #[error("parse error: {0}")]
    Parse(String),

    /// Structural validation of a loaded artifact failed.
    #[error("validation error: {0}")]
    Validation(String),

    /// The graph has no source-to-sink path.
    #[error("graph has no paths")]
    NoPaths,

    /// A cursor navigation step was out of range.
    #[error("cursor branch {branch} out of range (out-degree {degree})")]
    BranchOutOfRange { branch: usize, degree: usize },

    /// Attempted to take the parent of the root cursor.
    #[error("cursor is at the root")]
    AtRoot,

    /// The constraint system admits no solution.
    #[error("infeasible constraint system")]
    Infeasible,

    /// Two distinct accepting runs produce the same output with different
    /// weights, so the output set has no well-defined weight function.
    #[error("transducer is ambiguous on {document:?}")]
    Ambiguous { document: String },

    /// A desk-scale size bound was exceeded.
    #[error("size bound exceeded: {0}")]
    SizeBound(String),

    /// I/O error.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Library-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
