//! The four answer engines and the router-driven dispatcher.
//!
//! Every engine builds a grounded draft from knowledge-base lookups, passes
//! it through a [`GenerativeBackend`], and rejects backend output that
//! drops any knowledge-base fact. Failures at any stage come back as an
//! [`Answer`] with `error` set; nothing here panics on user input.

mod backend;
mod entities;

use serde::{Deserialize, Serialize};

pub use backend::{backend_by_name, BackendPrompt, GenerativeBackend, GroundedTemplateBackend};
pub use entities::{extract_entities, EntityError, Lexicon, ParsedQuery};

use crate::knowledge::{KnowledgeBase, KnowledgeError};
use crate::reasoning::{gene_ad_verdict, region_ad_chain, ReasoningStep, Verdict, TASK3_NEGATIVE, TASK3_POSITIVE};
use crate::router::QueryClassifier;
use crate::task::TaskLabel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerError {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub task: TaskLabel,
    pub verdict: Option<Verdict>,
    pub text: String,
    pub reasoning_steps: Vec<ReasoningStep>,
    pub sources: Vec<String>,
    pub error: Option<AnswerError>,
}

impl Answer {
    /// Structured failure. Tasks 2-4 still carry a verdict, `unknown`.
    pub fn error(task: TaskLabel, code: &str, message: impl Into<String>) -> Self {
        let message = message.into();
        Self {
            task,
            verdict: (task != TaskLabel::Task1).then_some(Verdict::Unknown),
            text: message.clone(),
            reasoning_steps: Vec::new(),
            sources: Vec::new(),
            error: Some(AnswerError {
                code: code.into(),
                message,
            }),
        }
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, thiserror::Error)]
enum EngineError {
    #[error(transparent)]
    Entity(#[from] EntityError),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error("backend `{backend}` dropped the knowledge-base fact `{fact}`")]
    Ungrounded { backend: String, fact: String },
}

impl EngineError {
    fn into_answer(self, task: TaskLabel) -> Answer {
        let code = match &self {
            Self::Entity(e) => e.code(),
            Self::Knowledge(KnowledgeError::UnknownGene(_)) => "unknown_gene",
            Self::Knowledge(_) => "knowledge_error",
            Self::Ungrounded { .. } => "ungrounded_output",
        };
        let mut message = self.to_string();
        if code == "unknown_gene" {
            message.push_str("; see the gene list for supported symbols");
        }
        Answer::error(task, code, message)
    }
}

fn missing(field: &'static str) -> EngineError {
    EngineError::Entity(EntityError::MissingEntity(field))
}

/// Runs the backend and checks that every fact survived verbatim.
fn phrase(
    backend: &dyn GenerativeBackend,
    task: TaskLabel,
    query: &str,
    draft: &str,
    facts: Vec<&str>,
) -> Result<String, EngineError> {
    let prompt = BackendPrompt {
        task,
        query,
        draft,
        facts,
    };
    let text = backend.generate(&prompt);
    if let Some(f) = prompt.facts.iter().find(|f| !text.contains(**f)) {
        return Err(EngineError::Ungrounded {
            backend: backend.name().to_string(),
            fact: f.to_string(),
        });
    }
    Ok(text)
}

fn task1(
    kb: &KnowledgeBase,
    pq: &ParsedQuery,
    backend: &dyn GenerativeBackend,
    query: &str,
) -> Result<Answer, EngineError> {
    let gene = pq.gene.as_ref().ok_or_else(|| missing("gene"))?;
    let attribute = pq.attribute.ok_or_else(|| missing("gene attribute"))?;
    let value = kb.gene_attribute(gene.as_str(), attribute)?.to_string();
    let draft = format!("The {} of {gene} is {value}.", attribute.phrase());
    let text = phrase(backend, TaskLabel::Task1, query, &draft, vec![value.as_str()])?;
    let annotations = &kb.provenance().annotations;
    Ok(Answer {
        task: TaskLabel::Task1,
        verdict: None,
        text,
        reasoning_steps: Vec::new(),
        sources: if annotations.is_empty() {
            Vec::new()
        } else {
            vec![annotations.clone()]
        },
        error: None,
    })
}

fn task2(
    kb: &KnowledgeBase,
    pq: &ParsedQuery,
    backend: &dyn GenerativeBackend,
    query: &str,
) -> Result<Answer, EngineError> {
    let gene = pq.gene.as_ref().ok_or_else(|| missing("gene"))?;
    let region = pq.region.ok_or_else(|| missing("brain region"))?;
    let kind = pq.kind.ok_or_else(|| missing("QTL kind (expression or splicing)"))?;
    let n = kb.significant_records(gene.as_str(), region, kind)?.len();
    let alpha = kb.significance_alpha();
    let label = region.display_label();
    let verdict = Verdict::from_bool(n > 0);
    let draft = if n > 0 {
        format!(
            "{} {gene} harbors {n} significant {kind} variant{} (q-value at or below {alpha}) affecting {} in the {label}.",
            verdict.sentence(),
            if n == 1 { "" } else { "s" },
            kind.mechanism(),
        )
    } else {
        format!(
            "{} {gene} harbors no {kind} variant with q-value at or below {alpha} in the {label}.",
            verdict.sentence()
        )
    };
    let text = phrase(backend, TaskLabel::Task2, query, &draft, vec![verdict.sentence()])?;
    Ok(Answer {
        task: TaskLabel::Task2,
        verdict: Some(verdict),
        text,
        reasoning_steps: Vec::new(),
        sources: kb
            .provenance()
            .qtl_table(region, kind)
            .map(str::to_string)
            .into_iter()
            .collect(),
        error: None,
    })
}

fn task3(
    kb: &KnowledgeBase,
    pq: &ParsedQuery,
    backend: &dyn GenerativeBackend,
    query: &str,
) -> Result<Answer, EngineError> {
    let gene = pq.gene.as_ref().ok_or_else(|| missing("gene"))?;
    kb.annotation(gene.as_str())?;
    let record = kb.molecular_genetics(gene.as_str());
    let verdict = gene_ad_verdict(record);
    let (draft, facts) = match record {
        Some(r) if r.ad_related => (
            TASK3_POSITIVE.replace("{reasoning}", &r.curated_reasoning),
            vec![r.curated_reasoning.as_str()],
        ),
        Some(_) => (TASK3_NEGATIVE.to_string(), vec!["No"]),
        None => (
            format!("No curated molecular genetics evidence is available for {gene}, so its relation to Alzheimer's disease is unknown."),
            vec![],
        ),
    };
    let text = phrase(backend, TaskLabel::Task3, query, &draft, facts)?;
    Ok(Answer {
        task: TaskLabel::Task3,
        verdict: Some(verdict),
        text,
        reasoning_steps: Vec::new(),
        sources: record.map(|r| r.citations.clone()).unwrap_or_default(),
        error: None,
    })
}

fn task4(
    kb: &KnowledgeBase,
    pq: &ParsedQuery,
    backend: &dyn GenerativeBackend,
    query: &str,
) -> Result<Answer, EngineError> {
    let gene = pq.gene.as_ref().ok_or_else(|| missing("gene"))?;
    let region = pq.region.ok_or_else(|| missing("brain region"))?;
    let chain = region_ad_chain(kb, gene.as_str(), region)?;
    let draft = format!("{}\n{}", chain.steps_text(), chain.conclusion);
    let text = phrase(
        backend,
        TaskLabel::Task4,
        query,
        &draft,
        vec![chain.conclusion.as_str()],
    )?;
    Ok(Answer {
        task: TaskLabel::Task4,
        verdict: Some(chain.verdict),
        text,
        reasoning_steps: chain.steps.to_vec(),
        sources: chain.sources,
        error: None,
    })
}

/// Answers an already-parsed query with the engine for `pq.task`.
pub fn answer(kb: &KnowledgeBase, pq: &ParsedQuery, backend: &dyn GenerativeBackend, query: &str) -> Answer {
    let result = match pq.task {
        TaskLabel::Task1 => task1(kb, pq, backend, query),
        TaskLabel::Task2 => task2(kb, pq, backend, query),
        TaskLabel::Task3 => task3(kb, pq, backend, query),
        TaskLabel::Task4 => task4(kb, pq, backend, query),
    };
    result.unwrap_or_else(|e| e.into_answer(pq.task))
}

/// Classify, extract, answer, with a prebuilt lexicon.
pub fn dispatch_with(
    kb: &KnowledgeBase,
    lexicon: &Lexicon,
    router: &dyn QueryClassifier,
    backend: &dyn GenerativeBackend,
    query: &str,
) -> Answer {
    let (task, _) = router.classify(query);
    if query.trim().is_empty() {
        return Answer::error(task, "empty_query", "query text is empty");
    }
    match extract_entities(lexicon, task, query) {
        Ok(pq) => answer(kb, &pq, backend, query),
        Err(e) => EngineError::from(e).into_answer(task),
    }
}

pub fn dispatch(
    kb: &KnowledgeBase,
    router: &dyn QueryClassifier,
    backend: &dyn GenerativeBackend,
    query: &str,
) -> Answer {
    dispatch_with(kb, &Lexicon::new(kb), router, backend, query)
}
