#![allow(dead_code)]

use std::path::PathBuf;

use adgene_core::corpora::{generate, split_corpus, Corpus, TemplateSet};
use adgene_core::ingest::{Dataset, Manifest};
use adgene_core::router::{train_router, RouterModel, DEFAULT_SMOOTHING};
use adgene_core::{KnowledgeBase, TaskLabel};

pub const SPLIT_SEED: u64 = 20240601;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn dataset() -> Dataset {
    Manifest::load(fixtures().join("ad144/manifest.toml"))
        .unwrap()
        .read_dataset()
        .unwrap()
}

pub fn kb() -> KnowledgeBase {
    dataset().build(None).unwrap()
}

pub fn corpus(kb: &KnowledgeBase, templates: &TemplateSet, task: TaskLabel) -> Corpus {
    generate(kb, templates, task, SPLIT_SEED).unwrap()
}

/// Standard templates plus paraphrases: (train, test) per task.
pub fn router_splits(kb: &KnowledgeBase) -> Vec<(Corpus, Corpus)> {
    let mut all = TemplateSet::standard();
    all.templates.extend(TemplateSet::paraphrases().templates);
    TaskLabel::ALL
        .into_iter()
        .map(|t| split_corpus(&corpus(kb, &all, t), 0.1, SPLIT_SEED).unwrap())
        .collect()
}

pub fn train_on(corpora: &[&Corpus]) -> RouterModel {
    train_router(
        corpora
            .iter()
            .flat_map(|c| c.examples.iter().map(|e| (e.instruction.as_str(), e.task))),
        DEFAULT_SMOOTHING,
    )
    .unwrap()
}

/// Router trained on every standard-template instruction.
pub fn standard_router(kb: &KnowledgeBase) -> RouterModel {
    let set = TemplateSet::standard();
    let corpora: Vec<Corpus> = TaskLabel::ALL.into_iter().map(|t| corpus(kb, &set, t)).collect();
    train_on(&corpora.iter().collect::<Vec<_>>())
}
