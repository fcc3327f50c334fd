//! Scholarly retrieval with science-model search services.
//!
//! A TF-IDF baseline ([`index`]) is extended by three services:
//!
//! * co-word term suggestion and query expansion ([`coword`]),
//! * Bradfordizing by journal productivity ([`bradford`]),
//! * author-centrality re-ranking on co-authorship networks ([`authnet`]).
//!
//! [`evalkit`] implements pooled relevance assessment (precision, Fleiss
//! kappa, top-k overlap) and [`engine`] wires everything into one search
//! pipeline.
//!
//! Scoring kernels are generic over the scalar type (see [`num`]); the
//! aliases below fix the default `f64` instantiation used by the engine.

pub mod authnet;
pub mod bradford;
pub mod corpus;
pub mod coword;
pub mod engine;
pub mod evalkit;
pub mod index;
pub mod num;
pub mod ranking;
pub mod synth;

pub use authnet::{rank_by_centrality, CoauthorGraph as CoauthorGraphOf, GraphScope};
pub use bradford::{bradfordize, zone_partition, BradMode, BradfordTable};
pub use corpus::{load_corpus, normalize_author, parse_record, AuthorKey, Corpus, Issn, Record};
pub use coword::{association_score, AssociationModel as AssociationModelOf, Contingency};
pub use engine::{Engine, EngineConfig, EngineError, Expand, Rank, SearchRequest, SearchResponse};
pub use evalkit::{build_report, EvalReport, Judgment, Topic};
pub use index::{tokenize, SearchIndex};
pub use ranking::{Model, ScoredResult as ScoredResultOf};

/// Default score type.
pub type Score = f64;

pub type ScoredResult = ranking::ScoredResult<Score>;
pub type ScoredResult32 = ranking::ScoredResult<f32>;
pub type TermAssociation = coword::TermAssociation<Score>;
pub type AssociationModel = coword::AssociationModel<Score>;
pub type AssociationModel32 = coword::AssociationModel<f32>;
pub type CoauthorGraph = authnet::CoauthorGraph<Score>;
pub type CoauthorGraph32 = authnet::CoauthorGraph<f32>;
