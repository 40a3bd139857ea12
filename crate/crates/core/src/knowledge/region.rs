//! The closed set of brain regions covered by the QTL tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrainRegion {
    FrontalCortex,
    Amygdala,
    AnteriorCingulateCortex,
    CaudateBasalGanglia,
    CerebellarHemisphere,
    Cerebellum,
    NucleusAccumbensBasalGanglia,
    PutamenBasalGanglia,
    CervicalSpinalCord,
    Cortex,
    Hypothalamus,
    Hippocampus,
    SubstantiaNigra,
}

impl BrainRegion {
    pub const ALL: [BrainRegion; 13] = [
        Self::FrontalCortex,
        Self::Amygdala,
        Self::AnteriorCingulateCortex,
        Self::CaudateBasalGanglia,
        Self::CerebellarHemisphere,
        Self::Cerebellum,
        Self::NucleusAccumbensBasalGanglia,
        Self::PutamenBasalGanglia,
        Self::CervicalSpinalCord,
        Self::Cortex,
        Self::Hypothalamus,
        Self::Hippocampus,
        Self::SubstantiaNigra,
    ];

    /// Canonical identifier, also used in QTL file names.
    pub const fn id(self) -> &'static str {
        match self {
            Self::FrontalCortex => "frontal_cortex",
            Self::Amygdala => "amygdala",
            Self::AnteriorCingulateCortex => "anterior_cingulate_cortex",
            Self::CaudateBasalGanglia => "caudate_basal_ganglia",
            Self::CerebellarHemisphere => "cerebellar_hemisphere",
            Self::Cerebellum => "cerebellum",
            Self::NucleusAccumbensBasalGanglia => "nucleus_accumbens_basal_ganglia",
            Self::PutamenBasalGanglia => "putamen_basal_ganglia",
            Self::CervicalSpinalCord => "cervical_spinal_cord",
            Self::Cortex => "cortex",
            Self::Hypothalamus => "hypothalamus",
            Self::Hippocampus => "hippocampus",
            Self::SubstantiaNigra => "substantia_nigra",
        }
    }

    /// Human-readable label used in generated text.
    pub const fn display_label(self) -> &'static str {
        match self {
            Self::FrontalCortex => "frontal cortex",
            Self::Amygdala => "amygdala",
            Self::AnteriorCingulateCortex => "anterior cingulate cortex",
            Self::CaudateBasalGanglia => "caudate (basal ganglia)",
            Self::CerebellarHemisphere => "cerebellar hemisphere",
            Self::Cerebellum => "cerebellum",
            Self::NucleusAccumbensBasalGanglia => "nucleus accumbens (basal ganglia)",
            Self::PutamenBasalGanglia => "putamen (basal ganglia)",
            Self::CervicalSpinalCord => "cervical spinal cord",
            Self::Cortex => "cortex",
            Self::Hypothalamus => "hypothalamus",
            Self::Hippocampus => "hippocampus",
            Self::SubstantiaNigra => "substantia nigra",
        }
    }

    /// Extra surface forms recognised in free text, beyond the id and label.
    const fn extra_aliases(self) -> &'static [&'static str] {
        match self {
            Self::FrontalCortex => &["frontal cortex ba9", "frontal lobe cortex"],
            Self::Amygdala => &[],
            Self::AnteriorCingulateCortex => &["anterior cingulate cortex ba24", "anterior cingulate"],
            Self::CaudateBasalGanglia => &["caudate", "caudate nucleus"],
            Self::CerebellarHemisphere => &["cerebellar hemispheres"],
            Self::Cerebellum => &[],
            Self::NucleusAccumbensBasalGanglia => &["nucleus accumbens"],
            Self::PutamenBasalGanglia => &["putamen"],
            Self::CervicalSpinalCord => &["cervical spinal cord c1", "spinal cord"],
            Self::Cortex => &[],
            Self::Hypothalamus => &[],
            Self::Hippocampus => &["hippocampal formation"],
            Self::SubstantiaNigra => &[],
        }
    }

    /// All normalised surface forms (lowercase, single-spaced tokens).
    pub fn aliases(self) -> Vec<String> {
        let mut out = vec![text::normalized(self.id()), text::normalized(self.display_label())];
        out.extend(self.extra_aliases().iter().map(|a| text::normalized(a)));
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for BrainRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown brain region `{0}`")]
pub struct ParseRegionError(pub String);

impl FromStr for BrainRegion {
    type Err = ParseRegionError;

    /// Accepts the canonical id, the display label, or any alias.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = text::normalized(s);
        Self::ALL
            .into_iter()
            .find(|r| r.aliases().contains(&key))
            .ok_or_else(|| ParseRegionError(s.to_string()))
    }
}
