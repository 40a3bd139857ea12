//! Scoring harness, paired statistics and adapter accounting.

mod lora;
mod metrics;
mod ratings;
mod stats;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use lora::{
    llama31_8b_all_projections, lora_param_count, AdaptedMatrix, LoraCount, LoraLayerSpec, LoraSpecError,
    LLAMA31_8B_PARAMS,
};
pub use metrics::{confusion, metrics, ConfusionCounts, Metrics, MetricsError};
pub use ratings::{aggregate_ratings, QueryMeans, RatingError, RatingSet, RatingSummary, Scores};
pub use stats::{
    ci_mean_diff, cohens_d_paired, incomplete_beta, ln_gamma, paired_stats, paired_t_test, t_cdf, t_quantile,
    t_two_sided_p, CohenVariant, PairedStats, PairedTTest, StatsError,
};

use crate::corpora::Corpus;
use crate::engines::{dispatch_with, GenerativeBackend, Lexicon};
use crate::knowledge::KnowledgeBase;
use crate::reasoning::Verdict;
use crate::router::QueryClassifier;
use crate::task::TaskLabel;

pub const REPORT_VERSION: u32 = 1;

/// Adapter size quoted for the fine-tuned 8B model, and that model's
/// rounded parameter total.
pub const REPORTED_LORA_PARAMS: u64 = 134_000_000;
pub const REPORTED_BASE_PARAMS: u64 = 8_000_000_000;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("rating files cover different queries")]
    QueryMismatch,
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Ratings(#[from] RatingError),
}

/// Lowercased, whitespace-collapsed text after the last ` is `, without a
/// trailing period. Task 1 answers are compared on this payload.
pub fn task1_payload(text: &str) -> String {
    let norm = text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    let tail = norm.rsplit_once(" is ").map_or(norm.as_str(), |(_, v)| v);
    tail.trim_end_matches('.').trim().to_string()
}

/// Gold verdict implied by a corpus output.
pub fn gold_verdict(task: TaskLabel, output: &str) -> Option<bool> {
    match task {
        TaskLabel::Task1 => None,
        TaskLabel::Task2 | TaskLabel::Task3 => Some(output.trim_start().starts_with("Yes")),
        TaskLabel::Task4 => Some(output.lines().last().unwrap_or("").starts_with("Conclusion: Yes")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: TaskLabel,
    pub n: usize,
    /// Share of queries the router sent to this corpus's task.
    pub routing_accuracy: f64,
    pub error_answers: usize,
    /// Task 1: payload match. Task 2: verdict match. Tasks 3-4: full text.
    pub exact_match_accuracy: f64,
    /// Verdict scoring for Tasks 2-4; error answers count as wrong.
    pub confusion: Option<ConfusionCounts>,
    pub metrics: Option<Metrics>,
}

/// Runs every test instruction through the dispatcher and scores it.
pub fn evaluate_engine(
    kb: &KnowledgeBase,
    router: &dyn QueryClassifier,
    backend: &dyn GenerativeBackend,
    test: &Corpus,
) -> TaskReport {
    let lexicon = Lexicon::new(kb);
    let mut routed = 0;
    let mut errors = 0;
    let mut exact = 0;
    let mut counts = ConfusionCounts::default();
    for ex in &test.examples {
        let answer = dispatch_with(kb, &lexicon, router, backend, &ex.instruction);
        routed += usize::from(answer.task == test.task);
        errors += usize::from(answer.is_error());
        let hit = match test.task {
            TaskLabel::Task1 => !answer.is_error() && task1_payload(&answer.text) == task1_payload(&ex.output),
            TaskLabel::Task2 => answer.verdict.map(Verdict::sentence) == Some(ex.output.trim()),
            TaskLabel::Task3 | TaskLabel::Task4 => answer.text == ex.output,
        };
        exact += usize::from(hit);
        if let Some(gold) = gold_verdict(test.task, &ex.output) {
            let pred = match answer.verdict {
                Some(Verdict::Yes) if answer.task == test.task => true,
                Some(Verdict::No) if answer.task == test.task => false,
                _ => !gold,
            };
            counts.record(pred, gold);
        }
    }
    let n = test.len();
    let rate = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let scored = test.task != TaskLabel::Task1 && n > 0;
    TaskReport {
        task: test.task,
        n,
        routing_accuracy: rate(routed),
        error_answers: errors,
        exact_match_accuracy: rate(exact),
        confusion: scored.then_some(counts),
        metrics: scored.then(|| metrics(&counts)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticsBlock {
    pub system_a: RatingSummary,
    pub system_b: RatingSummary,
    /// Paired over per-query means, d = b − a.
    pub precision: PairedStats,
    pub relevance: PairedStats,
}

/// Paired comparison of two systems rated on the same queries.
pub fn compare_ratings(a: &RatingSet, b: &RatingSet, level: f64) -> Result<StatisticsBlock, EvalError> {
    if !a.queries().eq(b.queries()) {
        return Err(EvalError::QueryMismatch);
    }
    let sa = aggregate_ratings(a);
    let sb = aggregate_ratings(b);
    let col = |s: &RatingSummary, f: fn(&QueryMeans) -> f64| s.per_query.iter().map(f).collect::<Vec<_>>();
    let precision = paired_stats(&col(&sa, |q| q.precision), &col(&sb, |q| q.precision), level)?;
    let relevance = paired_stats(&col(&sa, |q| q.relevance), &col(&sb, |q| q.relevance), level)?;
    Ok(StatisticsBlock {
        system_a: sa,
        system_b: sb,
        precision,
        relevance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoraBlock {
    pub rank: u64,
    pub reported_added_params: u64,
    pub reported_base_params: u64,
    pub reported_fraction: f64,
    /// All attention and feed-forward projections of a 32-layer 8B model.
    pub enumerated: LoraLayerSpec,
    pub enumerated_added_params: u64,
    pub enumerated_fraction: f64,
    /// enumerated − reported.
    pub delta_vs_reported: i64,
}

pub fn lora_block(rank: u64) -> LoraBlock {
    let spec = llama31_8b_all_projections(rank);
    let count = lora_param_count(&spec).expect("preset is valid");
    LoraBlock {
        rank,
        reported_added_params: REPORTED_LORA_PARAMS,
        reported_base_params: REPORTED_BASE_PARAMS,
        reported_fraction: REPORTED_LORA_PARAMS as f64 / REPORTED_BASE_PARAMS as f64,
        enumerated: spec,
        enumerated_added_params: count.added_params,
        enumerated_fraction: count.fraction_of_base,
        delta_vs_reported: count.added_params as i64 - REPORTED_LORA_PARAMS as i64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub report_version: u32,
    pub kb_hash: String,
    pub router_hash: String,
    pub backend: String,
    pub significance_alpha: f64,
    /// SHA-256 over the hashes, backend name, alpha and test corpora.
    pub config_fingerprint: String,
    pub tasks: Vec<TaskReport>,
    pub statistics: Option<StatisticsBlock>,
    pub lora: LoraBlock,
}

pub fn build_report(
    kb: &KnowledgeBase,
    router: &dyn QueryClassifier,
    backend: &dyn GenerativeBackend,
    tests: &[Corpus],
    statistics: Option<StatisticsBlock>,
) -> EvaluationReport {
    let kb_hash = kb.snapshot_hash();
    let router_hash = router.fingerprint();
    let mut h = Sha256::new();
    h.update(kb_hash.as_bytes());
    h.update(router_hash.as_bytes());
    h.update(backend.name().as_bytes());
    h.update(kb.significance_alpha().to_le_bytes());
    for c in tests {
        h.update(c.task.to_string().as_bytes());
        for e in &c.examples {
            h.update(serde_json::to_vec(e).expect("example serialises"));
        }
    }
    EvaluationReport {
        report_version: REPORT_VERSION,
        config_fingerprint: hex::encode(h.finalize()),
        kb_hash,
        router_hash,
        backend: backend.name().to_string(),
        significance_alpha: kb.significance_alpha(),
        tasks: tests.iter().map(|c| evaluate_engine(kb, router, backend, c)).collect(),
        statistics,
        lora: lora_block(64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payload_extraction() {
        assert_eq!(task1_payload("The start position of GENEA is 1000."), "1000");
        assert_eq!(task1_payload("For the gene GENEA, the  strand orientation is +."), "+");
        assert_eq!(
            task1_payload("The genomic location of GENEA is chr19:1000-2000 (+)."),
            "chr19:1000-2000 (+)"
        );
        assert_eq!(task1_payload("  X. "), "x");
    }

    #[test]
    fn gold_verdicts() {
        assert_eq!(gold_verdict(TaskLabel::Task2, "Yes."), Some(true));
        assert_eq!(gold_verdict(TaskLabel::Task3, "No, the summary..."), Some(false));
        assert_eq!(
            gold_verdict(TaskLabel::Task4, "Step 1: x\nConclusion: Yes, the"),
            Some(true)
        );
        assert_eq!(gold_verdict(TaskLabel::Task1, "The x is 1."), None);
    }

    #[test]
    fn lora_report_block() {
        let b = lora_block(64);
        assert_eq!(b.enumerated_added_params, 167_772_160);
        assert_eq!(b.delta_vs_reported, 33_772_160);
        assert!((b.reported_fraction - 0.01675).abs() < 1e-15);
    }

    #[test]
    fn rating_comparison() {
        let a =
            RatingSet::from_csv("query,expert,precision,relevance\nq1,e,1,2\nq2,e,2,2\nq3,e,2,3\n".as_bytes()).unwrap();
        let b =
            RatingSet::from_csv("query,expert,precision,relevance\nq1,e,2,3\nq2,e,4,4\nq3,e,3,5\n".as_bytes()).unwrap();
        let s = compare_ratings(&a, &b, 0.95).unwrap();
        assert_eq!(s.precision.df, 2);
        assert!(s.precision.t > 0.0);
        let c =
            RatingSet::from_csv("query,expert,precision,relevance\nq9,e,1,1\nq2,e,1,2\nq3,e,2,3\n".as_bytes()).unwrap();
        assert!(matches!(compare_ratings(&a, &c, 0.95), Err(EvalError::QueryMismatch)));
    }
}
