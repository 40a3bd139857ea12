//! Multinomial naive-Bayes query router.
//!
//! Features are unigram and bigram counts over [`crate::text::tokens`].
//! Every feature not seen in training shares one out-of-vocabulary column,
//! so each class row is a proper distribution over `vocab + 1` outcomes.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::task::TaskLabel;
use crate::text::tokens;

pub const ROUTER_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SMOOTHING: f64 = 1.0;

#[derive(Debug, thiserror::Error)]
pub enum RouterError {
    #[error("no training example for {0}")]
    MissingClass(TaskLabel),
    #[error("smoothing alpha must be finite and positive, got {0}")]
    BadSmoothing(f64),
    #[error("router snapshot schema version {found} (expected {expected})")]
    SchemaVersion { found: u64, expected: u32 },
    #[error("router snapshot lacks `router_schema_version`")]
    MissingSchemaVersion,
    #[error("malformed router snapshot: {0}")]
    Malformed(String),
    #[error("line {line}: {message}")]
    TrainingData { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Anything that can route a query. The naive-Bayes model is the only
/// implementation shipped.
pub trait QueryClassifier: Send + Sync {
    /// Predicted label and one score per task, indexed by [`TaskLabel::index`].
    fn classify(&self, query: &str) -> (TaskLabel, [f64; 4]);

    /// Stable identifier of the trained parameters.
    fn fingerprint(&self) -> String;
}

/// Unigram and bigram counts; bigrams join their tokens with `_`.
pub fn featurize(query: &str) -> BTreeMap<String, u32> {
    let toks = tokens(query);
    let mut counts = BTreeMap::new();
    for t in &toks {
        *counts.entry(t.clone()).or_insert(0) += 1;
    }
    for w in toks.windows(2) {
        *counts.entry(format!("{}_{}", w[0], w[1])).or_insert(0) += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouterModel {
    router_schema_version: u32,
    smoothing_alpha: f64,
    /// Feature to dense column index; the OOV column is `vocabulary.len()`.
    vocabulary: BTreeMap<String, usize>,
    log_priors: [f64; 4],
    /// One row per task, `vocabulary.len() + 1` columns.
    log_likelihoods: Vec<Vec<f64>>,
}

pub fn train_router<'a, I>(examples: I, smoothing_alpha: f64) -> Result<RouterModel, RouterError>
where
    I: IntoIterator<Item = (&'a str, TaskLabel)>,
{
    if !(smoothing_alpha.is_finite() && smoothing_alpha > 0.0) {
        return Err(RouterError::BadSmoothing(smoothing_alpha));
    }
    let mut docs = [0u64; 4];
    let mut class_counts: [BTreeMap<String, u64>; 4] = Default::default();
    for (query, label) in examples {
        docs[label.index()] += 1;
        for (f, n) in featurize(query) {
            *class_counts[label.index()].entry(f).or_insert(0) += u64::from(n);
        }
    }
    if let Some(missing) = TaskLabel::ALL.into_iter().find(|t| docs[t.index()] == 0) {
        return Err(RouterError::MissingClass(missing));
    }

    let mut vocabulary: BTreeMap<String, usize> = class_counts
        .iter()
        .flat_map(|m| m.keys().cloned())
        .map(|f| (f, 0))
        .collect();
    for (i, v) in vocabulary.values_mut().enumerate() {
        *v = i;
    }
    let width = vocabulary.len() + 1;
    let total_docs: u64 = docs.iter().sum();

    let mut log_priors = [0.0; 4];
    let mut log_likelihoods = Vec::with_capacity(4);
    for (c, counts) in class_counts.iter().enumerate() {
        log_priors[c] = (docs[c] as f64 / total_docs as f64).ln();
        let total: u64 = counts.values().sum();
        let denom = total as f64 + smoothing_alpha * width as f64;
        let mut row = vec![(smoothing_alpha / denom).ln(); width];
        for (f, n) in counts {
            row[vocabulary[f]] = ((*n as f64 + smoothing_alpha) / denom).ln();
        }
        log_likelihoods.push(row);
    }

    Ok(RouterModel {
        router_schema_version: ROUTER_SCHEMA_VERSION,
        smoothing_alpha,
        vocabulary,
        log_priors,
        log_likelihoods,
    })
}

impl RouterModel {
    pub fn smoothing_alpha(&self) -> f64 {
        self.smoothing_alpha
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn log_priors(&self) -> [f64; 4] {
        self.log_priors
    }

    pub fn log_likelihood_row(&self, task: TaskLabel) -> &[f64] {
        &self.log_likelihoods[task.index()]
    }

    /// Sparse column-count vector; unknown features land in the OOV column.
    pub fn vectorize(&self, query: &str) -> BTreeMap<usize, u32> {
        let oov = self.vocabulary.len();
        let mut out = BTreeMap::new();
        for (f, n) in featurize(query) {
            let col = self.vocabulary.get(&f).copied().unwrap_or(oov);
            *out.entry(col).or_insert(0) += n;
        }
        out
    }

    /// Unnormalised log-posteriors per task.
    pub fn scores(&self, query: &str) -> [f64; 4] {
        let x = self.vectorize(query);
        let mut scores = self.log_priors;
        for (c, s) in scores.iter_mut().enumerate() {
            let row = &self.log_likelihoods[c];
            *s += x.iter().map(|(&col, &n)| f64::from(n) * row[col]).sum::<f64>();
        }
        scores
    }

    pub fn snapshot_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec(self).expect("router serialises");
        bytes.push(b'\n');
        bytes
    }

    pub fn snapshot_hash(&self) -> String {
        hex::encode(Sha256::digest(self.snapshot_bytes()))
    }

    pub fn from_snapshot_bytes(bytes: &[u8]) -> Result<Self, RouterError> {
        let value: serde_json::Value = serde_json::from_slice(bytes)?;
        let found = value
            .get("router_schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or(RouterError::MissingSchemaVersion)?;
        if found != u64::from(ROUTER_SCHEMA_VERSION) {
            return Err(RouterError::SchemaVersion {
                found,
                expected: ROUTER_SCHEMA_VERSION,
            });
        }
        let model: Self = serde_json::from_value(value)?;
        let width = model.vocabulary.len() + 1;
        if model.log_likelihoods.len() != 4 || model.log_likelihoods.iter().any(|r| r.len() != width) {
            return Err(RouterError::Malformed("likelihood matrix shape".into()));
        }
        let mut cols: Vec<usize> = model.vocabulary.values().copied().collect();
        cols.sort_unstable();
        if cols.iter().enumerate().any(|(i, &c)| i != c) {
            return Err(RouterError::Malformed("vocabulary indices are not dense".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RouterError> {
        std::fs::write(path, self.snapshot_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RouterError> {
        Self::from_snapshot_bytes(&std::fs::read(path)?)
    }
}

impl QueryClassifier for RouterModel {
    fn classify(&self, query: &str) -> (TaskLabel, [f64; 4]) {
        let scores = self.scores(query);
        let mut best = 0;
        for c in 1..4 {
            if scores[c] > scores[best] {
                best = c;
            }
        }
        (TaskLabel::ALL[best], scores)
    }

    fn fingerprint(&self) -> String {
        self.snapshot_hash()
    }
}

pub fn classify(model: &RouterModel, query: &str) -> (TaskLabel, [f64; 4]) {
    model.classify(query)
}

/// Reads `(instruction, task)` pairs from corpus JSONL, ignoring every
/// other key.
pub fn read_training_jsonl<R: Read>(input: R) -> Result<Vec<(String, TaskLabel)>, RouterError> {
    #[derive(Deserialize)]
    struct Row {
        instruction: String,
        task: TaskLabel,
    }
    let mut out = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = serde_json::from_str(&line).map_err(|e| RouterError::TrainingData {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((row.instruction, row.task));
    }
    Ok(out)
}
