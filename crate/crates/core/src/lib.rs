//! Time-aware exploratory search over annotated longitudinal document archives.
//!
//! The crate covers the whole query-side engine: corpus ingest, an immutable
//! inverted/entity/time index, five selectable retrieval models, query-specific
//! monthly timelines with burst detection, salient-entity selectors, refinement
//! semantics, query-biased snippets, and the search-trail session schema.

pub mod config;
pub mod corpus;
pub mod engine;
pub mod entities;
pub mod error;
pub mod index;
pub mod month;
pub mod ranking;
pub mod refine;
pub mod session;
pub mod snippet;
pub mod text;
pub mod timeline;

pub use config::Params;
pub use corpus::{Corpus, Document, EntityMention, TemporalRef};
pub use engine::Engine;
pub use error::{CorpusError, IndexError, ParseError, RankError, SessionError};
pub use index::{DocNo, Index};
pub use month::{Month, MonthSpan};
pub use ranking::{RetrievalModel, ScoredDoc};
pub use refine::Constraints;
