//! Validated domain records held by the knowledge base.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BrainRegion;

/// An uppercase gene symbol matching `[A-Z0-9][A-Z0-9-]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GeneSymbol(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed gene symbol `{0}`")]
pub struct MalformedSymbol(pub String);

impl GeneSymbol {
    pub fn new(symbol: impl Into<String>) -> Result<Self, MalformedSymbol> {
        let symbol = symbol.into();
        let mut chars = symbol.chars();
        let head_ok = chars
            .next()
            .is_some_and(|c| c.is_ascii_uppercase() || c.is_ascii_digit());
        let tail_ok = chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '-');
        if head_ok && tail_ok {
            Ok(Self(symbol))
        } else {
            Err(MalformedSymbol(symbol))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for GeneSymbol {
    type Error = MalformedSymbol;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<GeneSymbol> for String {
    fn from(value: GeneSymbol) -> Self {
        value.0
    }
}

impl FromStr for GeneSymbol {
    type Err = MalformedSymbol;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl fmt::Display for GeneSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for GeneSymbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for GeneSymbol {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Human chromosome: autosomes 1-22, X, Y, or mitochondrial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Chromosome {
    Autosome(u8),
    X,
    Y,
    MT,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown chromosome `{0}`")]
pub struct BadChromosome(pub String);

impl FromStr for Chromosome {
    type Err = BadChromosome;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "X" => Ok(Self::X),
            "Y" => Ok(Self::Y),
            "MT" => Ok(Self::MT),
            _ => match s.parse::<u8>() {
                // reject "07" and "+7" so text round-trips exactly
                Ok(n @ 1..=22) if n.to_string() == s => Ok(Self::Autosome(n)),
                _ => Err(BadChromosome(s.to_string())),
            },
        }
    }
}

impl TryFrom<String> for Chromosome {
    type Error = BadChromosome;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Chromosome> for String {
    fn from(value: Chromosome) -> Self {
        value.to_string()
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Autosome(n) => write!(f, "{n}"),
            Self::X => f.write_str("X"),
            Self::Y => f.write_str("Y"),
            Self::MT => f.write_str("MT"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strand {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown strand `{0}`")]
pub struct BadStrand(pub String);

impl FromStr for Strand {
    type Err = BadStrand;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+" => Ok(Self::Plus),
            // U+2212 MINUS SIGN shows up in some exports
            "-" | "\u{2212}" => Ok(Self::Minus),
            _ => Err(BadStrand(s.to_string())),
        }
    }
}

impl fmt::Display for Strand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plus => "+",
            Self::Minus => "-",
        })
    }
}

/// Genomic coordinates of one gene, 1-based inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneAnnotation {
    pub symbol: GeneSymbol,
    pub chromosome: Chromosome,
    pub start: u64,
    pub end: u64,
    pub strand: Strand,
}

impl GeneAnnotation {
    /// `chr{chromosome}:{start}-{end} ({strand})`
    pub fn location_summary(&self) -> String {
        format!("chr{}:{}-{} ({})", self.chromosome, self.start, self.end, self.strand)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QtlKind {
    #[serde(rename = "eQTL")]
    Eqtl,
    #[serde(rename = "sQTL")]
    Sqtl,
}

impl QtlKind {
    pub const ALL: [QtlKind; 2] = [Self::Eqtl, Self::Sqtl];

    pub const fn label(self) -> &'static str {
        match self {
            Self::Eqtl => "eQTL",
            Self::Sqtl => "sQTL",
        }
    }

    /// The regulatory mechanism as phrased in questions.
    pub const fn mechanism(self) -> &'static str {
        match self {
            Self::Eqtl => "expression",
            Self::Sqtl => "splicing regulation",
        }
    }
}

impl fmt::Display for QtlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown QTL kind `{0}` (expected eQTL or sQTL)")]
pub struct ParseKindError(pub String);

impl FromStr for QtlKind {
    type Err = ParseKindError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "eqtl" => Ok(Self::Eqtl),
            "sqtl" => Ok(Self::Sqtl),
            _ => Err(ParseKindError(s.to_string())),
        }
    }
}

/// One gene-variant significance record in one region for one QTL kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QtlRecord {
    pub gene: GeneSymbol,
    pub variant_id: String,
    pub region: BrainRegion,
    pub kind: QtlKind,
    pub q_value: f64,
}

/// Curated molecular-genetics narrative for one gene.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MolecularGeneticsRecord {
    #[serde(rename = "gene_symbol")]
    pub gene: GeneSymbol,
    pub summary_text: String,
    pub curated_reasoning: String,
    pub ad_related: bool,
    #[serde(default)]
    pub citations: Vec<String>,
}

/// Gene attributes answerable from the annotation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Chromosome,
    Start,
    End,
    Strand,
    LocationSummary,
}

impl Attribute {
    pub const ALL: [Attribute; 5] = [
        Self::Chromosome,
        Self::Start,
        Self::End,
        Self::Strand,
        Self::LocationSummary,
    ];

    pub const fn id(self) -> &'static str {
        match self {
            Self::Chromosome => "chromosome",
            Self::Start => "start",
            Self::End => "end",
            Self::Strand => "strand",
            Self::LocationSummary => "location_summary",
        }
    }

    /// Noun phrase used in question and answer text.
    pub const fn phrase(self) -> &'static str {
        match self {
            Self::Chromosome => "chromosome",
            Self::Start => "start position",
            Self::End => "end position",
            Self::Strand => "strand orientation",
            Self::LocationSummary => "genomic location",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Attribute {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| format!("unknown attribute `{s}`"))
    }
}

/// A value returned by an attribute lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttributeValue {
    Chromosome(Chromosome),
    Position(u64),
    Strand(Strand),
    Location(String),
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Chromosome(c) => write!(f, "{c}"),
            Self::Position(p) => write!(f, "{p}"),
            Self::Strand(s) => write!(f, "{s}"),
            Self::Location(l) => f.write_str(l),
        }
    }
}
