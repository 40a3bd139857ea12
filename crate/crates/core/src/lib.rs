//! Grounded question answering over Alzheimer's disease gene data.
//!
//! The pipeline ingests gene annotations, per-region eQTL/sQTL significance
//! tables and curated molecular-genetics records into a [`KnowledgeBase`],
//! generates four instruction-tuning corpora from it, trains a naive-Bayes
//! [`RouterModel`] that assigns free-text queries to one of four task
//! categories, and answers queries with deterministic, knowledge-base
//! grounded engines. The [`eval`] module holds the scoring harness and the
//! paired statistics used to compare model ratings.

pub mod corpora;
pub mod engines;
pub mod eval;
pub mod ingest;
pub mod knowledge;
pub mod reasoning;
pub mod router;
pub mod task;
pub mod text;

pub use corpora::{Corpus, InstructionExample, TemplateSet, SYSTEM_PROMPT};
pub use engines::{dispatch, Answer, GenerativeBackend, GroundedTemplateBackend};
pub use knowledge::{
    Attribute, BrainRegion, GeneAnnotation, GeneSymbol, KnowledgeBase, MolecularGeneticsRecord, QtlKind, QtlRecord,
};
pub use reasoning::Verdict;
pub use router::RouterModel;
pub use task::TaskLabel;
