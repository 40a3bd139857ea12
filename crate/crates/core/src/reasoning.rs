//! Verdicts and the evidence chains behind Task 3 and Task 4 answers.
//!
//! The corpus generator and the answer engines both build their text from
//! these functions, so a served answer and the corresponding training
//! output always agree.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::knowledge::{BrainRegion, KnowledgeBase, KnowledgeError, MolecularGeneticsRecord, QtlKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Self::Yes
        } else {
            Self::No
        }
    }

    /// `Yes.` / `No.` as used in the binary Task 2 corpus.
    pub fn sentence(self) -> &'static str {
        match self {
            Self::Yes => "Yes.",
            Self::No => "No.",
            Self::Unknown => "Unknown.",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Yes => "yes",
            Self::No => "no",
            Self::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasoningStep {
    pub text: String,
    pub verdict: Verdict,
}

/// Positive gene-AD answer; `{reasoning}` is the curated reasoning verbatim.
pub const TASK3_POSITIVE: &str = "Yes, there is a potential relation based on the {reasoning}.";

/// Negative gene-AD answer.
pub const TASK3_NEGATIVE: &str =
    "No, the molecular genetics summary does not support a relation to Alzheimer's disease.";

/// Gene-AD verdict from the molecular-genetics record; `Unknown` without one.
pub fn gene_ad_verdict(record: Option<&MolecularGeneticsRecord>) -> Verdict {
    match record {
        Some(r) => Verdict::from_bool(r.ad_related),
        None => Verdict::Unknown,
    }
}

/// The three-step chain relating a region to AD through one gene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionAdChain {
    pub steps: [ReasoningStep; 3],
    pub conclusion: String,
    pub verdict: Verdict,
    /// KB citations consulted while building the chain.
    pub sources: Vec<String>,
}

impl RegionAdChain {
    /// `Step 1: ...` lines joined by newlines.
    pub fn steps_text(&self) -> String {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| format!("Step {}: {}", i + 1, s.text))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

pub fn region_ad_chain(kb: &KnowledgeBase, gene: &str, region: BrainRegion) -> Result<RegionAdChain, KnowledgeError> {
    let symbol = kb.annotation(gene)?.symbol.as_str();
    let label = region.display_label();
    let record = kb.molecular_genetics(symbol);
    let mut sources: Vec<String> = record.map(|r| r.citations.clone()).unwrap_or_default();

    let gene_ad = gene_ad_verdict(record);
    let step1 = match (gene_ad, record) {
        (Verdict::Yes, Some(r)) => format!(
            "{symbol} shows a potential relation to Alzheimer's disease based on the {}.",
            r.curated_reasoning
        ),
        (Verdict::No, _) => format!(
            "The molecular genetics summary of {symbol} does not support a relation to Alzheimer's disease."
        ),
        _ => format!(
            "No curated molecular genetics evidence is available for {symbol}, so its relation to Alzheimer's disease is unknown."
        ),
    };

    let mut mechanisms = Vec::new();
    for kind in QtlKind::ALL {
        if kb.significant_association(symbol, region, kind)? {
            mechanisms.push(kind.mechanism());
        }
        if let Some(c) = kb.provenance().qtl_table(region, kind) {
            sources.push(c.to_string());
        }
    }
    let region_gene = Verdict::from_bool(!mechanisms.is_empty());
    let step2 = if mechanisms.is_empty() {
        format!(
            "{symbol} harbors no variants that significantly affect expression or splicing regulation in the {label}."
        )
    } else {
        format!(
            "{symbol} harbors significant variants affecting {} in the {label}.",
            mechanisms.join(" and ")
        )
    };

    let verdict = Verdict::from_bool(gene_ad == Verdict::Yes && region_gene == Verdict::Yes);
    let (step3, conclusion) = match (verdict, gene_ad) {
        (Verdict::Yes, _) => (
            format!("Both relationships are established, so the {label} is related to AD with regard to gene {symbol}."),
            format!("Conclusion: Yes, the {label} is related to AD with regard to gene {symbol}."),
        ),
        (_, Verdict::Unknown) => (
            format!("There is insufficient evidence for the gene-AD relationship, so the {label} cannot be related to AD with regard to gene {symbol}."),
            format!("Conclusion: No, there is insufficient evidence that the {label} is related to AD with regard to gene {symbol}."),
        ),
        _ => (
            format!("At least one relationship is not established, so the {label} is not related to AD with regard to gene {symbol}."),
            format!("Conclusion: No, the {label} is not related to AD with regard to gene {symbol}."),
        ),
    };

    Ok(RegionAdChain {
        steps: [
            ReasoningStep {
                text: step1,
                verdict: gene_ad,
            },
            ReasoningStep {
                text: step2,
                verdict: region_gene,
            },
            ReasoningStep { text: step3, verdict },
        ],
        conclusion,
        verdict,
        sources,
    })
}
