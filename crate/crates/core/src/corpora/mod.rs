//! Instruction-tuning corpora generated from the knowledge base.
//!
//! Every example is a (system prompt, instruction, output) triple tagged
//! with its task and provenance metadata. Generation is a pure function of
//! the knowledge base and the template set; only [`split_corpus`] uses the
//! seed.

mod jsonl;
mod templates;

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use jsonl::{export_jsonl, import_jsonl, meta_path, read_jsonl, write_jsonl, CorpusMeta};
pub use templates::{placeholders, render, Template, TemplateError, TemplateSet};

use crate::knowledge::{Attribute, BrainRegion, KnowledgeBase, KnowledgeError, QtlKind};
use crate::reasoning::{region_ad_chain, Verdict};
use crate::task::TaskLabel;

/// System prompt carried by every example.
pub const SYSTEM_PROMPT: &str =
    "You are a bioinformatics expert. Based on the following instruction, provide an accurate and professional response.";

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("seed gene `{0}` has no annotation")]
    MissingAnnotation(String),
    #[error("gene `{0}` is flagged AD-related but has no curated reasoning")]
    MissingReasoning(String),
    #[error("test fraction {0} must lie strictly between 0 and 1")]
    BadFraction(f64),
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstructionExample {
    pub system: String,
    pub instruction: String,
    pub output: String,
    pub task: TaskLabel,
    /// Provenance: `template_id` always, plus `gene`, `region`, `kind` and
    /// `attribute` where they apply.
    pub meta: BTreeMap<String, String>,
}

impl InstructionExample {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub task: TaskLabel,
    pub examples: Vec<InstructionExample>,
    pub generation_seed: u64,
}

impl Corpus {
    pub fn new(task: TaskLabel, generation_seed: u64) -> Self {
        Self {
            task,
            examples: Vec::new(),
            generation_seed,
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// Accumulates examples, dropping repeated (instruction, output) pairs.
struct Builder {
    corpus: Corpus,
    seen: HashSet<(String, String)>,
}

impl Builder {
    fn new(task: TaskLabel) -> Self {
        Self {
            corpus: Corpus::new(task, 0),
            seen: HashSet::new(),
        }
    }

    fn push(&mut self, template: &Template, instruction: String, output: String, meta: &[(&str, &str)]) {
        if !self.seen.insert((instruction.clone(), output.clone())) {
            return;
        }
        let mut map: BTreeMap<String, String> =
            meta.iter().map(|(k, v)| ((*k).to_string(), (*v).to_string())).collect();
        map.insert("template_id".into(), template.id.clone());
        self.corpus.examples.push(InstructionExample {
            system: SYSTEM_PROMPT.to_string(),
            instruction,
            output,
            task: self.corpus.task,
            meta: map,
        });
    }
}

/// Gene x attribute x template; each output states the stored value.
pub fn generate_task1(kb: &KnowledgeBase, templates: &TemplateSet) -> Result<Corpus, CorpusError> {
    let mut b = Builder::new(TaskLabel::Task1);
    for gene in kb.seed_genes() {
        let g = gene.as_str();
        if !kb.contains_gene(g) {
            return Err(CorpusError::MissingAnnotation(g.to_string()));
        }
        for attribute in Attribute::ALL {
            let value = kb.gene_attribute(g, attribute)?.to_string();
            for t in templates.for_task(TaskLabel::Task1) {
                if t.attribute.is_some_and(|a| a != attribute) {
                    continue;
                }
                let vals = [
                    ("gene", g),
                    ("attribute", attribute.phrase()),
                    ("value", value.as_str()),
                ];
                b.push(
                    t,
                    render(&t.instruction, &vals),
                    render(&t.output, &vals),
                    &[("gene", g), ("attribute", attribute.id())],
                );
            }
        }
    }
    Ok(b.corpus)
}

/// Gene x region x kind x template; the output is the binary verdict.
pub fn generate_task2(kb: &KnowledgeBase, templates: &TemplateSet) -> Result<Corpus, CorpusError> {
    let mut b = Builder::new(TaskLabel::Task2);
    for gene in kb.seed_genes() {
        let g = gene.as_str();
        for region in BrainRegion::ALL {
            for kind in QtlKind::ALL {
                let verdict = Verdict::from_bool(kb.significant_association(g, region, kind)?);
                for t in templates.for_task(TaskLabel::Task2) {
                    let vals = [
                        ("gene", g),
                        ("region", region.display_label()),
                        ("kind", kind.mechanism()),
                        ("verdict", verdict.sentence()),
                    ];
                    b.push(
                        t,
                        render(&t.instruction, &vals),
                        render(&t.output, &vals),
                        &[("gene", g), ("region", region.id()), ("kind", kind.label())],
                    );
                }
            }
        }
    }
    Ok(b.corpus)
}

/// One example per gene with a molecular-genetics record, per template.
pub fn generate_task3(kb: &KnowledgeBase, templates: &TemplateSet) -> Result<Corpus, CorpusError> {
    let mut b = Builder::new(TaskLabel::Task3);
    for gene in kb.seed_genes() {
        let g = gene.as_str();
        let Some(record) = kb.molecular_genetics(g) else {
            continue;
        };
        if record.ad_related && record.curated_reasoning.trim().is_empty() {
            return Err(CorpusError::MissingReasoning(g.to_string()));
        }
        for t in templates.for_task(TaskLabel::Task3) {
            let vals = [("gene", g), ("reasoning", record.curated_reasoning.as_str())];
            let output = if record.ad_related {
                render(&t.output, &vals)
            } else {
                render(&templates.task3_negative, &vals)
            };
            b.push(t, render(&t.instruction, &vals), output, &[("gene", g)]);
        }
    }
    Ok(b.corpus)
}

/// Gene x region x template; the output is a three-step chain and conclusion.
pub fn generate_task4(kb: &KnowledgeBase, templates: &TemplateSet) -> Result<Corpus, CorpusError> {
    let mut b = Builder::new(TaskLabel::Task4);
    for gene in kb.seed_genes() {
        let g = gene.as_str();
        for region in BrainRegion::ALL {
            let chain = region_ad_chain(kb, g, region)?;
            let steps = chain.steps_text();
            for t in templates.for_task(TaskLabel::Task4) {
                let vals = [
                    ("gene", g),
                    ("region", region.display_label()),
                    ("steps", steps.as_str()),
                    ("conclusion", chain.conclusion.as_str()),
                ];
                b.push(
                    t,
                    render(&t.instruction, &vals),
                    render(&t.output, &vals),
                    &[("gene", g), ("region", region.id())],
                );
            }
        }
    }
    Ok(b.corpus)
}

/// Generates the corpus for `task` and records `seed` on it.
pub fn generate(
    kb: &KnowledgeBase,
    templates: &TemplateSet,
    task: TaskLabel,
    seed: u64,
) -> Result<Corpus, CorpusError> {
    let mut corpus = match task {
        TaskLabel::Task1 => generate_task1(kb, templates),
        TaskLabel::Task2 => generate_task2(kb, templates),
        TaskLabel::Task3 => generate_task3(kb, templates),
        TaskLabel::Task4 => generate_task4(kb, templates),
    }?;
    corpus.generation_seed = seed;
    Ok(corpus)
}

/// Random train/test split with `round(test_fraction * n)` test examples.
/// Both halves keep the original example order.
pub fn split_corpus(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<(Corpus, Corpus), CorpusError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CorpusError::BadFraction(test_fraction));
    }
    let n = corpus.len();
    let n_test = (test_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut is_test = vec![false; n];
    for &i in &order[..n_test] {
        is_test[i] = true;
    }
    let mut train = Corpus::new(corpus.task, corpus.generation_seed);
    let mut test = Corpus::new(corpus.task, corpus.generation_seed);
    for (example, in_test) in corpus.examples.iter().zip(is_test) {
        if in_test {
            test.examples.push(example.clone());
        } else {
            train.examples.push(example.clone());
        }
    }
    Ok((train, test))
}
