//! Ontology-grounded contrastive representation learning at desk scale.
//!
//! The pipeline runs in stages, each backed by one module:
//!
//! - [`ontograph`] loads a multi-relational ontology (concepts, names,
//!   definitions, semantic types, typed edges) from JSONL.
//! - [`descgen`] verbalizes graph relationships into templated descriptions.
//! - [`pairset`] samples name ↔ definition/description training pairs.
//! - [`trainer`] holds the hashed bag-of-tokens bi-encoder, the symmetric
//!   in-batch InfoNCE loss, AdamW and the warmup-linear schedule.
//! - [`vecindex`] is an exact, parallel top-k cosine index.
//! - [`evalsuite`] implements the evaluation battery (concept similarity,
//!   leaf-to-parent linking, STS, NLI triplets, entity linking, similarity
//!   matrices).
//!
//! [`synth`] builds synthetic ontologies with a controlled shape for tests
//! and demos.

pub mod descgen;
pub mod digest;
pub mod evalsuite;
pub mod ontograph;
pub mod pairset;
pub mod synth;
pub mod trainer;
pub mod tsv;
pub mod vecindex;

pub use descgen::{Description, VerbLexicon, VerbRule};
pub use evalsuite::{EvalReport, Embedder};
pub use ontograph::{Concept, ConceptId, EdgeKind, OntologyGraph, Relationship};
pub use pairset::{DatasetManifest, PairKind, TrainingPair};
pub use trainer::{Encoder, TrainConfig};
pub use vecindex::{EmbeddingMatrix, RankedHits};

/// Seeded generator used everywhere randomness is needed.
///
/// ChaCha8 supports independent streams (`set_stream`), which is how
/// parallel generation keeps a thread-count independent output.
pub type SeededRng = rand_chacha::ChaCha8Rng;
