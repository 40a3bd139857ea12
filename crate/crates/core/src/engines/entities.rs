//! Lexicon-based entity extraction over query text.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::knowledge::{Attribute, BrainRegion, GeneSymbol, KnowledgeBase, QtlKind};
use crate::task::TaskLabel;
use crate::text::tokens;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedQuery {
    pub task: TaskLabel,
    pub gene: Option<GeneSymbol>,
    pub region: Option<BrainRegion>,
    pub attribute: Option<Attribute>,
    pub kind: Option<QtlKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EntityError {
    #[error("query names several genes: {}", .0.join(", "))]
    AmbiguousGene(Vec<String>),
    #[error("query names several brain regions: {}", .0.join(", "))]
    AmbiguousRegion(Vec<String>),
    #[error("query does not mention a {0}")]
    MissingEntity(&'static str),
    #[error("gene `{0}` is not in the knowledge base")]
    UnknownGene(String),
}

impl EntityError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::AmbiguousGene(_) => "ambiguous_gene",
            Self::AmbiguousRegion(_) => "ambiguous_region",
            Self::MissingEntity(_) => "missing_entity",
            Self::UnknownGene(_) => "unknown_gene",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Entry {
    Gene(usize),
    Region(BrainRegion),
}

/// Token-sequence lexicon for gene symbols and region aliases.
#[derive(Debug, Clone)]
pub struct Lexicon {
    genes: Vec<GeneSymbol>,
    entries: BTreeMap<Vec<String>, Entry>,
    longest: usize,
}

/// Uppercase words that look like symbols but are not genes.
const NOT_GENES: &[&str] = &["AD", "DNA", "RNA", "QTL", "EQTL", "SQTL", "OMIM", "GTEX", "CHR", "BP"];

impl Lexicon {
    pub fn new(kb: &KnowledgeBase) -> Self {
        let mut entries = BTreeMap::new();
        for region in BrainRegion::ALL {
            for alias in region.aliases() {
                entries.insert(alias.split(' ').map(str::to_string).collect(), Entry::Region(region));
            }
        }
        let genes: Vec<GeneSymbol> = kb.annotated_genes().cloned().collect();
        for (i, g) in genes.iter().enumerate() {
            // Gene symbols take precedence over a region alias with the same tokens.
            entries.insert(tokens(g.as_str()), Entry::Gene(i));
        }
        let longest = entries.keys().map(Vec::len).max().unwrap_or(0);
        Self {
            genes,
            entries,
            longest,
        }
    }

    /// Genes and regions in order of first mention, found by greedy
    /// longest match.
    fn scan(&self, toks: &[String]) -> (Vec<&GeneSymbol>, Vec<BrainRegion>) {
        let mut genes: Vec<&GeneSymbol> = Vec::new();
        let mut regions = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            let max = self.longest.min(toks.len() - i);
            let hit = (1..=max)
                .rev()
                .find_map(|n| self.entries.get(&toks[i..i + n]).map(|e| (n, *e)));
            match hit {
                Some((n, entry)) => {
                    match entry {
                        Entry::Gene(g) => {
                            if !genes.contains(&&self.genes[g]) {
                                genes.push(&self.genes[g]);
                            }
                        }
                        Entry::Region(r) => {
                            if !regions.contains(&r) {
                                regions.push(r);
                            }
                        }
                    }
                    i += n;
                }
                None => i += 1,
            }
        }
        (genes, regions)
    }
}

fn attribute_keyword(token: &str) -> Option<Attribute> {
    Some(match token {
        "chromosome" => Attribute::Chromosome,
        "start" | "starts" | "begin" | "begins" => Attribute::Start,
        "end" | "ends" => Attribute::End,
        "strand" | "orientation" => Attribute::Strand,
        "location" | "locus" | "coordinates" | "located" => Attribute::LocationSummary,
        _ => return None,
    })
}

fn kind_keyword(token: &str) -> Option<QtlKind> {
    Some(match token {
        "expression" | "expressed" | "eqtl" | "eqtls" => QtlKind::Eqtl,
        "splicing" | "spliced" | "sqtl" | "sqtls" => QtlKind::Sqtl,
        _ => return None,
    })
}

/// A word written like a gene symbol that the lexicon does not know.
fn unknown_symbol(query: &str, lexicon: &Lexicon) -> Option<String> {
    query
        .split(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
        .map(|w| w.trim_matches('-'))
        .filter(|w| w.len() >= 2 && w.chars().any(|c| c.is_ascii_uppercase()))
        .filter(|w| GeneSymbol::new(*w).is_ok() && !NOT_GENES.contains(w))
        .find(|w| !lexicon.entries.contains_key(&tokens(w)))
        .map(str::to_string)
}

/// Pulls every entity the task needs out of `query`.
pub fn extract_entities(lexicon: &Lexicon, task: TaskLabel, query: &str) -> Result<ParsedQuery, EntityError> {
    let toks = tokens(query);
    let (genes, regions) = lexicon.scan(&toks);
    let mut pq = ParsedQuery {
        task,
        gene: None,
        region: None,
        attribute: toks.iter().find_map(|t| attribute_keyword(t)),
        kind: toks.iter().find_map(|t| kind_keyword(t)),
    };

    match genes.as_slice() {
        [] => {
            return Err(match unknown_symbol(query, lexicon) {
                Some(s) => EntityError::UnknownGene(s),
                None => EntityError::MissingEntity("gene"),
            })
        }
        [g] => pq.gene = Some((*g).clone()),
        _ => {
            return Err(EntityError::AmbiguousGene(
                genes.iter().map(|g| g.to_string()).collect(),
            ))
        }
    }

    let needs_region = matches!(task, TaskLabel::Task2 | TaskLabel::Task4);
    match regions.as_slice() {
        [] if needs_region => return Err(EntityError::MissingEntity("brain region")),
        [] => {}
        [r] => pq.region = Some(*r),
        _ if needs_region => {
            return Err(EntityError::AmbiguousRegion(
                regions.iter().map(|r| r.id().to_string()).collect(),
            ))
        }
        _ => {}
    }

    if task == TaskLabel::Task1 && pq.attribute.is_none() {
        return Err(EntityError::MissingEntity("gene attribute"));
    }
    if task == TaskLabel::Task2 && pq.kind.is_none() {
        return Err(EntityError::MissingEntity("QTL kind (expression or splicing)"));
    }
    Ok(pq)
}
