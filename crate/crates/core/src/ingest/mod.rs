//! Parsers for the external data files.
//!
//! All parsers are pure functions of their input stream. Line numbers in
//! errors are 1-based and count the header line.

mod manifest;

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

pub use manifest::{AnnotationsEntry, Dataset, Manifest, QtlEntry};

use crate::knowledge::{
    BrainRegion, Chromosome, GeneAnnotation, GeneSymbol, MolecularGeneticsRecord, QtlKind, QtlRecord, Strand,
};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("seed gene list contains no symbols")]
    EmptyList,
    #[error("line {0}: malformed gene symbol")]
    MalformedSymbol(usize),
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("line {0}: start is greater than end")]
    CoordinateOrder(usize),
    #[error("line {0}: strand must be `+` or `-`")]
    BadStrand(usize),
    #[error("line {0}: chromosome must be one of 1-22, X, Y, MT")]
    BadChromosome(usize),
    #[error("line {0}: q-value outside [0, 1]")]
    QValueRange(usize),
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("gene `{0}` is flagged AD-related but has no curated reasoning")]
    MissingReasoning(String),
    #[error("gene `{0}` appears more than once")]
    DuplicateGene(String),
    #[error("line {line}: invalid record: {message}")]
    Json { line: usize, message: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: Box<IngestError>,
    },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Ordered, duplicate-free list of seed gene symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedGeneList(Vec<GeneSymbol>);

impl SeedGeneList {
    pub fn new(symbols: Vec<GeneSymbol>) -> Result<Self, IngestError> {
        if symbols.is_empty() {
            return Err(IngestError::EmptyList);
        }
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if !seen.insert(s) {
                return Err(IngestError::DuplicateGene(s.to_string()));
            }
        }
        Ok(Self(symbols))
    }

    pub fn symbols(&self) -> &[GeneSymbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<GeneSymbol> {
        self.0
    }
}

/// Newline-delimited symbols; `#` lines and blank lines are skipped and
/// repeated symbols keep their first position.
pub fn parse_seed_genes(input: impl BufRead) -> Result<SeedGeneList, IngestError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let symbol = GeneSymbol::new(text).map_err(|_| IngestError::MalformedSymbol(idx + 1))?;
        if seen.insert(symbol.clone()) {
            out.push(symbol);
        }
    }
    SeedGeneList::new(out)
}

pub fn write_seed_genes(list: &SeedGeneList, mut out: impl Write) -> std::io::Result<()> {
    for s in list.symbols() {
        writeln!(out, "{s}")?;
    }
    Ok(())
}

/// Column positions resolved from a TSV header line.
struct Header {
    positions: Vec<usize>,
    width: usize,
}

impl Header {
    fn resolve(line: Option<&str>, required: &[&str]) -> Result<Self, IngestError> {
        let cols: Vec<&str> = line.map(|l| l.split('\t').map(str::trim).collect()).unwrap_or_default();
        let positions = required
            .iter()
            .map(|name| {
                cols.iter()
                    .position(|c| c == name)
                    .ok_or_else(|| IngestError::MissingColumn((*name).to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            positions,
            width: cols.len(),
        })
    }

    /// Splits a data row into the required fields, in `required` order.
    fn fields<'a>(&self, line_no: usize, line: &'a str) -> Result<Vec<&'a str>, IngestError> {
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != self.width {
            return Err(IngestError::MalformedRow {
                line: line_no,
                reason: format!("expected {} fields, found {}", self.width, cols.len()),
            });
        }
        let fields: Vec<&str> = self.positions.iter().map(|&p| cols[p]).collect();
        if fields.iter().any(|f| f.is_empty()) {
            return Err(IngestError::MalformedRow {
                line: line_no,
                reason: "empty field".into(),
            });
        }
        Ok(fields)
    }
}

/// Yields `(line_no, line)` for the header and every non-blank data line.
fn tsv_lines(input: impl BufRead) -> Result<Vec<(usize, String)>, IngestError> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        out.push((idx + 1, line.to_string()));
    }
    Ok(out)
}

const ANNOTATION_COLUMNS: [&str; 5] = ["gene_symbol", "chromosome", "start", "end", "strand"];

fn parse_position(line: usize, text: &str) -> Result<u64, IngestError> {
    match text.parse::<u64>() {
        Ok(p) if p > 0 => Ok(p),
        _ => Err(IngestError::MalformedRow {
            line,
            reason: format!("`{text}` is not a positive coordinate"),
        }),
    }
}

/// Parses `gene_symbol  chromosome  start  end  strand` (tab-separated).
pub fn parse_gene_annotations(input: impl BufRead) -> Result<Vec<GeneAnnotation>, IngestError> {
    let lines = tsv_lines(input)?;
    let header = Header::resolve(lines.first().map(|(_, l)| l.as_str()), &ANNOTATION_COLUMNS)?;
    let mut out = Vec::with_capacity(lines.len().saturating_sub(1));
    for (line_no, line) in lines.iter().skip(1) {
        let line_no = *line_no;
        let f = header.fields(line_no, line)?;
        let symbol = GeneSymbol::new(f[0]).map_err(|_| IngestError::MalformedSymbol(line_no))?;
        let chromosome: Chromosome = f[1].parse().map_err(|_| IngestError::BadChromosome(line_no))?;
        let start = parse_position(line_no, f[2])?;
        let end = parse_position(line_no, f[3])?;
        let strand: Strand = f[4].parse().map_err(|_| IngestError::BadStrand(line_no))?;
        if start > end {
            return Err(IngestError::CoordinateOrder(line_no));
        }
        out.push(GeneAnnotation {
            symbol,
            chromosome,
            start,
            end,
            strand,
        });
    }
    Ok(out)
}

pub fn write_gene_annotations(rows: &[GeneAnnotation], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{}", ANNOTATION_COLUMNS.join("\t"))?;
    for a in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            a.symbol, a.chromosome, a.start, a.end, a.strand
        )?;
    }
    Ok(())
}

const QTL_COLUMNS: [&str; 3] = ["gene_symbol", "variant_id", "q_value"];

/// Parses one per-(region, kind) significance table; every record is
/// stamped with the supplied region and kind.
pub fn parse_qtl_table(input: impl BufRead, kind: QtlKind, region: BrainRegion) -> Result<Vec<QtlRecord>, IngestError> {
    let lines = tsv_lines(input)?;
    let header = Header::resolve(lines.first().map(|(_, l)| l.as_str()), &QTL_COLUMNS)?;
    let mut out = Vec::with_capacity(lines.len().saturating_sub(1));
    for (line_no, line) in lines.iter().skip(1) {
        let line_no = *line_no;
        let f = header.fields(line_no, line)?;
        let gene = GeneSymbol::new(f[0]).map_err(|_| IngestError::MalformedSymbol(line_no))?;
        let q_value: f64 = f[2].parse().map_err(|_| IngestError::MalformedRow {
            line: line_no,
            reason: format!("`{}` is not a number", f[2]),
        })?;
        if !(0.0..=1.0).contains(&q_value) {
            return Err(IngestError::QValueRange(line_no));
        }
        out.push(QtlRecord {
            gene,
            variant_id: f[1].to_string(),
            region,
            kind,
            q_value,
        });
    }
    Ok(out)
}

/// Writes the `gene_symbol  variant_id  q_value` columns; region and kind
/// are carried by the file name.
pub fn write_qtl_table(rows: &[QtlRecord], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{}", QTL_COLUMNS.join("\t"))?;
    for r in rows {
        writeln!(out, "{}\t{}\t{}", r.gene, r.variant_id, r.q_value)?;
    }
    Ok(())
}

/// Parses JSON Lines, one record object per line.
pub fn parse_molecular_genetics(input: impl BufRead) -> Result<Vec<MolecularGeneticsRecord>, IngestError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: MolecularGeneticsRecord = serde_json::from_str(&line).map_err(|e| IngestError::Json {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if rec.ad_related && rec.curated_reasoning.trim().is_empty() {
            return Err(IngestError::MissingReasoning(rec.gene.to_string()));
        }
        if !seen.insert(rec.gene.clone()) {
            return Err(IngestError::DuplicateGene(rec.gene.to_string()));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_molecular_genetics(rows: &[MolecularGeneticsRecord], mut out: impl Write) -> std::io::Result<()> {
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        writeln!(out)?;
    }
    Ok(())
}
