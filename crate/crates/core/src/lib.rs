//! Attributed network embedding by jointly factorizing a random-walk
//! co-occurrence matrix and a node content matrix.
//!
//! The pipeline runs graph loading ([`graph`]), walk sampling
//! ([`cooccur`]), training ([`emf`]) and downstream evaluation ([`eval`]).
//! [`proximity`] holds the exact proximity matrices that the sampled
//! co-occurrences approximate.

pub mod cooccur;
pub mod emf;
mod error;
pub mod eval;
pub mod graph;
pub mod proximity;
pub mod sparse;

pub use cooccur::{CooccurrenceMatrix, WalkConfig, WalkSet};
pub use emf::{EmbeddingModel, QMatrix, TrainConfig, TrainOutcome};
pub use error::{Error, Result};
pub use graph::{ContentMatrix, Graph, LabelSet, NodeIndex, TransitionMatrix};
pub use sparse::CsrMatrix;
