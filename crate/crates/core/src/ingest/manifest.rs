//! Dataset manifest: maps input files to their role and, for QTL tables,
//! to a (region, kind) pair. Paths are relative to the manifest file.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    parse_gene_annotations, parse_molecular_genetics, parse_qtl_table, parse_seed_genes, IngestError, SeedGeneList,
};
use crate::knowledge::{
    BrainRegion, GeneAnnotation, KbInputs, KnowledgeBase, KnowledgeError, MolecularGeneticsRecord, Provenance, QtlKind,
    QtlRecord, DEFAULT_SIGNIFICANCE_ALPHA,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub seed_genes: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub molecular_genetics: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub significance_alpha: Option<f64>,
    pub annotations: AnnotationsEntry,
    #[serde(default)]
    pub qtl: Vec<QtlEntry>,
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationsEntry {
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QtlEntry {
    pub path: PathBuf,
    pub region: BrainRegion,
    pub kind: QtlKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
}

impl QtlEntry {
    fn citation_or_default(&self) -> String {
        self.citation
            .clone()
            .unwrap_or_else(|| format!("{} table ({})", self.kind, self.path.display()))
    }
}

/// Parsed contents of every file named in a manifest.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub seed: SeedGeneList,
    pub annotations: Vec<GeneAnnotation>,
    pub qtls: Vec<QtlRecord>,
    pub omim: Vec<MolecularGeneticsRecord>,
    pub significance_alpha: f64,
    pub provenance: Provenance,
    /// `(relative path, data rows)` for every QTL table, in manifest order.
    pub qtl_file_counts: Vec<(PathBuf, usize)>,
}

impl Manifest {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, IngestError> {
        let mut m: Manifest = toml::from_str(text).map_err(|e| IngestError::Manifest(e.to_string()))?;
        m.base_dir = base_dir.into();
        let mut seen = BTreeSet::new();
        for entry in &m.qtl {
            if !seen.insert((entry.region, entry.kind)) {
                return Err(IngestError::Manifest(format!(
                    "more than one table for ({}, {})",
                    entry.region, entry.kind
                )));
            }
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| IngestError::File {
            path: path.display().to_string(),
            source: Box::new(e.into()),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    pub fn resolve(&self, relative: &Path) -> PathBuf {
        self.base_dir.join(relative)
    }

    fn open(&self, relative: &Path) -> Result<(String, BufReader<File>), IngestError> {
        let path = self.resolve(relative);
        let shown = path.display().to_string();
        let file = File::open(&path).map_err(|e| IngestError::File {
            path: shown.clone(),
            source: Box::new(e.into()),
        })?;
        Ok((shown, BufReader::new(file)))
    }

    /// Parses every referenced file.
    pub fn read_dataset(&self) -> Result<Dataset, IngestError> {
        let in_file = |path: String| {
            move |e: IngestError| IngestError::File {
                path,
                source: Box::new(e),
            }
        };

        let (p, r) = self.open(&self.seed_genes)?;
        let seed = parse_seed_genes(r).map_err(in_file(p))?;

        let (p, r) = self.open(&self.annotations.path)?;
        let annotations = parse_gene_annotations(r).map_err(in_file(p))?;

        let mut provenance = Provenance {
            annotations: self
                .annotations
                .citation
                .clone()
                .unwrap_or_else(|| format!("gene annotation table ({})", self.annotations.path.display())),
            ..Provenance::default()
        };

        let mut qtls = Vec::new();
        let mut qtl_file_counts = Vec::with_capacity(self.qtl.len());
        for entry in &self.qtl {
            let (p, r) = self.open(&entry.path)?;
            let rows = parse_qtl_table(r, entry.kind, entry.region).map_err(in_file(p))?;
            qtl_file_counts.push((entry.path.clone(), rows.len()));
            qtls.extend(rows);
            provenance.set_qtl_table(entry.region, entry.kind, entry.citation_or_default());
        }

        let omim = match &self.molecular_genetics {
            Some(path) => {
                let (p, r) = self.open(path)?;
                parse_molecular_genetics(r).map_err(in_file(p))?
            }
            None => Vec::new(),
        };

        Ok(Dataset {
            seed,
            annotations,
            qtls,
            omim,
            significance_alpha: self.significance_alpha.unwrap_or(DEFAULT_SIGNIFICANCE_ALPHA),
            provenance,
            qtl_file_counts,
        })
    }
}

impl Dataset {
    pub fn into_inputs(self) -> KbInputs {
        KbInputs {
            seed: self.seed.into_inner(),
            annotations: self.annotations,
            qtls: self.qtls,
            omim: self.omim,
            significance_alpha: self.significance_alpha,
            provenance: self.provenance,
        }
    }

    /// Builds the knowledge base, optionally overriding the manifest's alpha.
    pub fn build(self, alpha: Option<f64>) -> Result<KnowledgeBase, KnowledgeError> {
        let mut inputs = self.into_inputs();
        if let Some(alpha) = alpha {
            inputs.significance_alpha = alpha;
        }
        KnowledgeBase::build(inputs)
    }
}
