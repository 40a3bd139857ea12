//! Shared setup for the benchmarks.

use std::path::PathBuf;

use adgene_core::corpora::{generate, TemplateSet};
use adgene_core::ingest::{Dataset, Manifest};
use adgene_core::router::{train_router, RouterModel, DEFAULT_SMOOTHING};
use adgene_core::{KnowledgeBase, TaskLabel};

pub fn fixture_manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/ad144/manifest.toml")
}

pub fn dataset() -> Dataset {
    Manifest::load(fixture_manifest())
        .and_then(|m| m.read_dataset())
        .expect("fixture dataset loads")
}

pub fn kb() -> KnowledgeBase {
    dataset().build(None).expect("fixture builds")
}

/// Router over all standard-template instructions.
pub fn router(kb: &KnowledgeBase) -> RouterModel {
    let set = TemplateSet::standard();
    let corpora: Vec<_> = TaskLabel::ALL
        .into_iter()
        .map(|t| generate(kb, &set, t, 0).expect("corpus generates"))
        .collect();
    train_router(
        corpora
            .iter()
            .flat_map(|c| c.examples.iter().map(|e| (e.instruction.as_str(), e.task))),
        DEFAULT_SMOOTHING,
    )
    .expect("router trains")
}
