use std::fs;
use std::path::{Path, PathBuf};

use mtbi_core::bow::BowConfig;
use mtbi_core::pipeline::DictionaryMode;
use mtbi_core::roi::RoiConfig;
use mtbi_core::selection::{AccuracyMode, CvSettings, SvmSettings};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Approach {
    RoiMeans,
    Bow,
    Both,
}

impl Approach {
    pub fn runs_roi(self) -> bool {
        matches!(self, Approach::RoiMeans | Approach::Both)
    }

    pub fn runs_bow(self) -> bool {
        matches!(self, Approach::Bow | Approach::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub folds: usize,
    pub accuracy: AccuracyMode,
    /// Stop greedy selection after this many features.
    pub max_features: Option<usize>,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 10,
            accuracy: AccuracyMode::Pooled,
            max_features: None,
        }
    }
}

/// Everything a run depends on. Defaults: 7 metrics × 5 regions + 6
/// covariates for region means, 5 metrics × 2 regions × 20 words + 6
/// covariates for visual words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Manifest CSV; relative paths resolve against the config file.
    pub dataset: Option<PathBuf>,
    pub approach: Approach,
    pub roi: RoiConfig,
    pub bow: BowConfig,
    pub dictionary_mode: DictionaryMode,
    pub svm: SvmSettings,
    pub cv: CvConfig,
    pub seed: u64,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            approach: Approach::Both,
            roi: RoiConfig::default(),
            bow: BowConfig::default(),
            dictionary_mode: DictionaryMode::LeakageSafe,
            svm: SvmSettings::default(),
            cv: CvConfig::default(),
            seed: 0,
            output: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(d) = &cfg.dataset {
            cfg.dataset = Some(base.join(d));
        }
        cfg.output = base.join(&cfg.output);
        Ok(cfg)
    }

    pub fn cv_settings(&self) -> CvSettings {
        CvSettings {
            svm: self.svm,
            accuracy: self.cv.accuracy,
        }
    }

    pub fn dataset(&self) -> Result<&Path, CliError> {
        self.dataset
            .as_deref()
            .ok_or_else(|| CliError::usage("no dataset given (set `dataset` or pass --dataset)"))
    }

    /// Hex SHA-256 of the canonical JSON form of the effective config.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(json))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
