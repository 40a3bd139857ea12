//! Immutable, indexed knowledge base and the derived gene-region and
//! gene-disease relations every answer is grounded in.
//!
//! A [`KnowledgeBase`] is built once from parsed inputs, validated for
//! cross-references, and never mutated afterwards. Its JSON snapshot is
//! deterministic, so the SHA-256 of the snapshot identifies the exact data
//! an answer was computed from.

mod records;
mod region;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use records::{
    Attribute, AttributeValue, BadChromosome, BadStrand, Chromosome, GeneAnnotation, GeneSymbol, MalformedSymbol,
    MolecularGeneticsRecord, ParseKindError, QtlKind, QtlRecord, Strand,
};
pub use region::{BrainRegion, ParseRegionError};

/// Snapshot schema version; bumped on any incompatible layout change.
pub const KB_SCHEMA_VERSION: u32 = 1;

/// Default q-value threshold (inclusive).
pub const DEFAULT_SIGNIFICANCE_ALPHA: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum KnowledgeError {
    #[error("QTL record references gene `{0}` which has no annotation")]
    UnknownGeneInQtl(GeneSymbol),
    #[error("molecular genetics record references gene `{0}` which has no annotation")]
    UnknownGeneInOmim(GeneSymbol),
    #[error("gene `{0}` is annotated more than once")]
    DuplicateAnnotation(GeneSymbol),
    #[error("duplicate molecular genetics record for gene `{0}`")]
    DuplicateOmim(GeneSymbol),
    #[error("gene `{0}` is flagged AD-related but has no curated reasoning")]
    MissingReasoning(GeneSymbol),
    #[error("duplicate QTL record ({gene}, {variant_id}, {region}, {kind})")]
    DuplicateQtl {
        gene: GeneSymbol,
        variant_id: String,
        region: BrainRegion,
        kind: QtlKind,
    },
    #[error("q-value {q} of ({gene}, {variant_id}) is outside [0, 1]")]
    QValueRange {
        gene: GeneSymbol,
        variant_id: String,
        q: f64,
    },
    #[error("annotation of `{0}` has start > end")]
    CoordinateOrder(GeneSymbol),
    #[error("significance alpha {0} must lie in (0, 1)")]
    BadAlpha(f64),
    #[error("unknown gene `{0}`")]
    UnknownGene(String),
    #[error("snapshot schema version {found} does not match supported version {expected}")]
    SchemaVersion { found: u64, expected: u32 },
    #[error("snapshot is missing `kb_schema_version`")]
    MissingSchemaVersion,
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Citation strings for the tabular sources; molecular-genetics citations
/// live on their records.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub annotations: String,
    pub qtl_tables: BTreeMap<String, String>,
}

impl Provenance {
    fn qtl_key(region: BrainRegion, kind: QtlKind) -> String {
        format!("{}.{}", region.id(), kind.label())
    }

    pub fn set_qtl_table(&mut self, region: BrainRegion, kind: QtlKind, citation: impl Into<String>) {
        self.qtl_tables.insert(Self::qtl_key(region, kind), citation.into());
    }

    pub fn qtl_table(&self, region: BrainRegion, kind: QtlKind) -> Option<&str> {
        self.qtl_tables.get(&Self::qtl_key(region, kind)).map(String::as_str)
    }
}

/// Everything needed to build a knowledge base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbInputs {
    pub seed: Vec<GeneSymbol>,
    pub annotations: Vec<GeneAnnotation>,
    pub qtls: Vec<QtlRecord>,
    pub omim: Vec<MolecularGeneticsRecord>,
    pub significance_alpha: f64,
    #[serde(default)]
    pub provenance: Provenance,
}

impl KbInputs {
    pub fn new(seed: Vec<GeneSymbol>, annotations: Vec<GeneAnnotation>) -> Self {
        Self {
            seed,
            annotations,
            qtls: Vec::new(),
            omim: Vec::new(),
            significance_alpha: DEFAULT_SIGNIFICANCE_ALPHA,
            provenance: Provenance::default(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    kb_schema_version: u32,
    #[serde(flatten)]
    inputs: KbInputs,
}

type QtlKey = (GeneSymbol, BrainRegion, QtlKind);

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    seed: Vec<GeneSymbol>,
    annotations: BTreeMap<GeneSymbol, GeneAnnotation>,
    qtl_index: BTreeMap<QtlKey, Vec<QtlRecord>>,
    omim: BTreeMap<GeneSymbol, MolecularGeneticsRecord>,
    significance_alpha: f64,
    provenance: Provenance,
}

impl KnowledgeBase {
    /// Validates cross-references and builds the indices.
    pub fn build(inputs: KbInputs) -> Result<Self, KnowledgeError> {
        let KbInputs {
            seed,
            annotations: annotation_list,
            qtls,
            omim: omim_list,
            significance_alpha,
            provenance,
        } = inputs;

        if !(significance_alpha > 0.0 && significance_alpha < 1.0) {
            return Err(KnowledgeError::BadAlpha(significance_alpha));
        }

        let mut annotations = BTreeMap::new();
        for a in annotation_list {
            if a.start > a.end {
                return Err(KnowledgeError::CoordinateOrder(a.symbol));
            }
            if annotations.contains_key(&a.symbol) {
                return Err(KnowledgeError::DuplicateAnnotation(a.symbol));
            }
            annotations.insert(a.symbol.clone(), a);
        }

        let mut qtl_index: BTreeMap<QtlKey, Vec<QtlRecord>> = BTreeMap::new();
        for r in qtls {
            if !annotations.contains_key(&r.gene) {
                return Err(KnowledgeError::UnknownGeneInQtl(r.gene));
            }
            if !(0.0..=1.0).contains(&r.q_value) {
                return Err(KnowledgeError::QValueRange {
                    gene: r.gene,
                    variant_id: r.variant_id,
                    q: r.q_value,
                });
            }
            let bucket = qtl_index.entry((r.gene.clone(), r.region, r.kind)).or_default();
            if bucket.iter().any(|x| x.variant_id == r.variant_id) {
                return Err(KnowledgeError::DuplicateQtl {
                    gene: r.gene,
                    variant_id: r.variant_id,
                    region: r.region,
                    kind: r.kind,
                });
            }
            bucket.push(r);
        }
        for bucket in qtl_index.values_mut() {
            bucket.sort_by(|a, b| a.variant_id.cmp(&b.variant_id));
        }

        let mut omim = BTreeMap::new();
        for rec in omim_list {
            if !annotations.contains_key(&rec.gene) {
                return Err(KnowledgeError::UnknownGeneInOmim(rec.gene));
            }
            if omim.contains_key(&rec.gene) {
                return Err(KnowledgeError::DuplicateOmim(rec.gene));
            }
            if rec.ad_related && rec.curated_reasoning.trim().is_empty() {
                return Err(KnowledgeError::MissingReasoning(rec.gene));
            }
            omim.insert(rec.gene.clone(), rec);
        }

        let mut seen = BTreeSet::new();
        let seed = seed.into_iter().filter(|g| seen.insert(g.clone())).collect();

        Ok(Self {
            seed,
            annotations,
            qtl_index,
            omim,
            significance_alpha,
            provenance,
        })
    }

    /// Returns the inputs this knowledge base was built from, in canonical order.
    pub fn to_inputs(&self) -> KbInputs {
        KbInputs {
            seed: self.seed.clone(),
            annotations: self.annotations.values().cloned().collect(),
            qtls: self.qtl_index.values().flatten().cloned().collect(),
            omim: self.omim.values().cloned().collect(),
            significance_alpha: self.significance_alpha,
            provenance: self.provenance.clone(),
        }
    }

    /// Same data, different threshold.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self, KnowledgeError> {
        let mut inputs = self.to_inputs();
        inputs.significance_alpha = alpha;
        Self::build(inputs)
    }

    /// Seed genes in their original order.
    pub fn seed_genes(&self) -> &[GeneSymbol] {
        &self.seed
    }

    /// Every annotated symbol, sorted.
    pub fn annotated_genes(&self) -> impl Iterator<Item = &GeneSymbol> {
        self.annotations.keys()
    }

    pub fn significance_alpha(&self) -> f64 {
        self.significance_alpha
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn annotation(&self, gene: &str) -> Result<&GeneAnnotation, KnowledgeError> {
        self.annotations
            .get(gene)
            .ok_or_else(|| KnowledgeError::UnknownGene(gene.to_string()))
    }

    pub fn contains_gene(&self, gene: &str) -> bool {
        self.annotations.contains_key(gene)
    }

    pub fn molecular_genetics(&self, gene: &str) -> Option<&MolecularGeneticsRecord> {
        self.omim.get(gene)
    }

    pub fn molecular_genetics_records(&self) -> impl Iterator<Item = &MolecularGeneticsRecord> {
        self.omim.values()
    }

    pub fn qtl_records(&self) -> impl Iterator<Item = &QtlRecord> {
        self.qtl_index.values().flatten()
    }

    pub fn qtl_count(&self) -> usize {
        self.qtl_index.values().map(Vec::len).sum()
    }

    /// Records of the given kind in the given region, significant or not.
    pub fn records(&self, gene: &str, region: BrainRegion, kind: QtlKind) -> Result<&[QtlRecord], KnowledgeError> {
        let (symbol, _) = self
            .annotations
            .get_key_value(gene)
            .ok_or_else(|| KnowledgeError::UnknownGene(gene.to_string()))?;
        Ok(self
            .qtl_index
            .get(&(symbol.clone(), region, kind))
            .map(Vec::as_slice)
            .unwrap_or_default())
    }

    /// Records whose q-value is at or below the threshold.
    pub fn significant_records(
        &self,
        gene: &str,
        region: BrainRegion,
        kind: QtlKind,
    ) -> Result<Vec<&QtlRecord>, KnowledgeError> {
        let alpha = self.significance_alpha;
        Ok(self
            .records(gene, region, kind)?
            .iter()
            .filter(|r| r.q_value <= alpha)
            .collect())
    }

    /// True iff the gene has at least one variant of `kind` in `region`
    /// with q-value at or below the threshold.
    pub fn significant_association(
        &self,
        gene: &str,
        region: BrainRegion,
        kind: QtlKind,
    ) -> Result<bool, KnowledgeError> {
        let alpha = self.significance_alpha;
        Ok(self.records(gene, region, kind)?.iter().any(|r| r.q_value <= alpha))
    }

    /// Association through either mechanism.
    pub fn any_association(&self, gene: &str, region: BrainRegion) -> Result<bool, KnowledgeError> {
        for kind in QtlKind::ALL {
            if self.significant_association(gene, region, kind)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn gene_attribute(&self, gene: &str, attribute: Attribute) -> Result<AttributeValue, KnowledgeError> {
        let a = self.annotation(gene)?;
        Ok(match attribute {
            Attribute::Chromosome => AttributeValue::Chromosome(a.chromosome),
            Attribute::Start => AttributeValue::Position(a.start),
            Attribute::End => AttributeValue::Position(a.end),
            Attribute::Strand => AttributeValue::Strand(a.strand),
            Attribute::LocationSummary => AttributeValue::Location(a.location_summary()),
        })
    }

    pub fn regions_for_gene(&self, gene: &str, kind: QtlKind) -> Result<BTreeSet<BrainRegion>, KnowledgeError> {
        let mut out = BTreeSet::new();
        for region in BrainRegion::ALL {
            if self.significant_association(gene, region, kind)? {
                out.insert(region);
            }
        }
        Ok(out)
    }

    /// Every citation string stored in the knowledge base.
    pub fn citations(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self
            .omim
            .values()
            .flat_map(|r| r.citations.iter().map(String::as_str))
            .collect();
        if !self.provenance.annotations.is_empty() {
            out.insert(&self.provenance.annotations);
        }
        out.extend(self.provenance.qtl_tables.values().map(String::as_str));
        out
    }

    /// Deterministic JSON snapshot.
    pub fn snapshot_bytes(&self) -> Vec<u8> {
        let snap = Snapshot {
            kb_schema_version: KB_SCHEMA_VERSION,
            inputs: self.to_inputs(),
        };
        let mut bytes = serde_json::to_vec(&snap).expect("snapshot serialisation cannot fail");
        bytes.push(b'\n');
        bytes
    }

    /// Lowercase hex SHA-256 of [`Self::snapshot_bytes`].
    pub fn snapshot_hash(&self) -> String {
        hex::encode(Sha256::digest(self.snapshot_bytes()))
    }

    pub fn from_snapshot_bytes(bytes: &[u8]) -> Result<Self, KnowledgeError> {
        let value: serde_json::Value = serde_json::from_slice(bytes)?;
        let found = value
            .get("kb_schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or(KnowledgeError::MissingSchemaVersion)?;
        if found != u64::from(KB_SCHEMA_VERSION) {
            return Err(KnowledgeError::SchemaVersion {
                found,
                expected: KB_SCHEMA_VERSION,
            });
        }
        let snap: Snapshot = serde_json::from_value(value)?;
        Self::build(snap.inputs)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), KnowledgeError> {
        std::fs::write(path, self.snapshot_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, KnowledgeError> {
        Self::from_snapshot_bytes(&std::fs::read(path)?)
    }
}
