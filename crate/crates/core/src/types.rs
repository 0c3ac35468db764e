//! Enumerations shared by every stage: MR metrics, anatomical regions,
//! class labels and clinical covariates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// One diffusion / WMTI parametric map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MetricId {
    MD,
    FA,
    MK,
    AWF,
    /// Intra-axonal diffusivity (D_axon).
    DA,
    DePar,
    DePer,
}

impl MetricId {
    pub const ALL: [MetricId; 7] = [
        MetricId::MD,
        MetricId::FA,
        MetricId::MK,
        MetricId::AWF,
        MetricId::DA,
        MetricId::DePar,
        MetricId::DePer,
    ];

    /// Metrics used for visual-word features.
    pub const BOW: [MetricId; 5] = [MetricId::AWF, MetricId::DA, MetricId::DePar, MetricId::FA, MetricId::MD];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::MD => "MD",
            MetricId::FA => "FA",
            MetricId::MK => "MK",
            MetricId::AWF => "AWF",
            MetricId::DA => "DA",
            MetricId::DePar => "DePar",
            MetricId::DePer => "DePer",
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "MD" => MetricId::MD,
            "FA" => MetricId::FA,
            "MK" => MetricId::MK,
            "AWF" => MetricId::AWF,
            "DA" | "D_axon" | "Daxon" => MetricId::DA,
            "DePar" | "De_par" => MetricId::DePar,
            "DePer" | "De_per" => MetricId::DePer,
            other => return Err(Error::UnknownMetricKey(other.to_string())),
        })
    }
}

/// Anatomical region. The first five variants are atomic mask labels;
/// `CorpusCallosum` is the union of the three callosal parts and never
/// appears as a label in a mask file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    Thalamus,
    PrefrontalWM,
    CCBody,
    CCGenu,
    CCSplenium,
    CorpusCallosum,
}

impl Region {
    pub const ATOMIC: [Region; 5] = [
        Region::Thalamus,
        Region::PrefrontalWM,
        Region::CCBody,
        Region::CCGenu,
        Region::CCSplenium,
    ];

    /// Regions used for visual-word features.
    pub const BOW: [Region; 2] = [Region::Thalamus, Region::CorpusCallosum];

    pub fn is_composite(self) -> bool {
        self == Region::CorpusCallosum
    }

    /// Atomic regions making up this region.
    pub fn atoms(self) -> &'static [Region] {
        match self {
            Region::Thalamus => &[Region::Thalamus],
            Region::PrefrontalWM => &[Region::PrefrontalWM],
            Region::CCBody => &[Region::CCBody],
            Region::CCGenu => &[Region::CCGenu],
            Region::CCSplenium => &[Region::CCSplenium],
            Region::CorpusCallosum => &[Region::CCBody, Region::CCGenu, Region::CCSplenium],
        }
    }

    /// Label written by default into mask files.
    pub fn default_label(self) -> Option<u32> {
        match self {
            Region::Thalamus => Some(1),
            Region::PrefrontalWM => Some(2),
            Region::CCBody => Some(3),
            Region::CCGenu => Some(4),
            Region::CCSplenium => Some(5),
            Region::CorpusCallosum => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Thalamus => "Thalamus",
            Region::PrefrontalWM => "PrefrontalWM",
            Region::CCBody => "CCBody",
            Region::CCGenu => "CCGenu",
            Region::CCSplenium => "CCSplenium",
            Region::CorpusCallosum => "CorpusCallosum",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "Thalamus" => Region::Thalamus,
            "PrefrontalWM" => Region::PrefrontalWM,
            "CCBody" => Region::CCBody,
            "CCGenu" => Region::CCGenu,
            "CCSplenium" => Region::CCSplenium,
            "CorpusCallosum" | "CC" => Region::CorpusCallosum,
            other => return Err(Error::InvalidConfig(format!("unknown region {other:?}"))),
        })
    }
}

/// Class label; MTBI is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Mtbi,
    Control,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::Mtbi, Label::Control];

    pub fn sign(self) -> f64 {
        match self {
            Label::Mtbi => 1.0,
            Label::Control => -1.0,
        }
    }

    pub fn from_sign(v: f64) -> Label {
        if v >= 0.0 {
            Label::Mtbi
        } else {
            Label::Control
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Mtbi => "mtbi",
            Label::Control => "control",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mtbi" => Ok(Label::Mtbi),
            "control" => Ok(Label::Control),
            _ => Err(Error::BadLabel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    M,
    F,
}

impl Sex {
    /// M → 0, F → 1.
    pub fn encode(self) -> f64 {
        match self {
            Sex::M => 0.0,
            Sex::F => 1.0,
        }
    }
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "M" | "m" => Ok(Sex::M),
            "F" | "f" => Ok(Sex::F),
            other => Err(Error::InvalidConfig(format!("bad sex value {other:?}"))),
        }
    }
}

/// Demographic and neurocognitive covariates, in feature-table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClinicalField {
    Age,
    Sex,
    Stroop,
    Sdmt,
    Cvlt,
    Fss,
}

impl ClinicalField {
    pub const ALL: [ClinicalField; 6] = [
        ClinicalField::Age,
        ClinicalField::Sex,
        ClinicalField::Stroop,
        ClinicalField::Sdmt,
        ClinicalField::Cvlt,
        ClinicalField::Fss,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClinicalField::Age => "age",
            ClinicalField::Sex => "sex",
            ClinicalField::Stroop => "stroop",
            ClinicalField::Sdmt => "sdmt",
            ClinicalField::Cvlt => "cvlt",
            ClinicalField::Fss => "fss",
        }
    }
}

impl fmt::Display for ClinicalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClinicalField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClinicalField::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown clinical field {s:?}")))
    }
}
