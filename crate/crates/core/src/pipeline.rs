//! Glue between feature extraction and cross-validation.

use serde::{Deserialize, Serialize};

use crate::bow::{encode_bank, fit_dictionaries, with_clinical, BowConfig, DictionarySet, PatchBank};
use crate::error::Result;
use crate::ingest::Dataset;
use crate::roi::{build_mean_feature_table, RoiConfig};
use crate::seed::RngSeed;
use crate::selection::{FeatureSource, FoldPlan};

/// How visual-word dictionaries relate to the cross-validation folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DictionaryMode {
    /// Refit dictionaries on each fold's training subjects.
    #[default]
    LeakageSafe,
    /// Fit once on every subject of the run.
    PaperFast,
}

pub fn roi_feature_source(dataset: &Dataset, config: &RoiConfig) -> Result<FeatureSource> {
    Ok(FeatureSource::Shared(build_mean_feature_table(dataset, config)?))
}

pub struct BowFeatures {
    pub source: FeatureSource,
    /// One set per fold (leakage-safe) or a single shared set.
    pub dictionaries: Vec<DictionarySet>,
}

pub fn bow_feature_source(
    dataset: &Dataset,
    plan: &FoldPlan,
    config: &BowConfig,
    mode: DictionaryMode,
    seed: RngSeed,
) -> Result<BowFeatures> {
    let bank = PatchBank::extract(dataset, config)?;
    bow_features_from_bank(dataset, &bank, plan, config, mode, seed)
}

pub fn bow_features_from_bank(
    dataset: &Dataset,
    bank: &PatchBank,
    plan: &FoldPlan,
    config: &BowConfig,
    mode: DictionaryMode,
    seed: RngSeed,
) -> Result<BowFeatures> {
    match mode {
        DictionaryMode::PaperFast => {
            let all: Vec<usize> = (0..bank.subject_ids.len()).collect();
            let dicts = fit_dictionaries(bank, &all, config, seed)?;
            let m = with_clinical(dataset, encode_bank(bank, &dicts)?, config)?;
            Ok(BowFeatures {
                source: FeatureSource::Shared(m),
                dictionaries: vec![dicts],
            })
        }
        DictionaryMode::LeakageSafe => {
            let per_fold = crate::par::try_map_range(plan.k, |f| {
                let dicts = fit_dictionaries(bank, &plan.train_rows(f), config, seed)?;
                let m = with_clinical(dataset, encode_bank(bank, &dicts)?, config)?;
                Ok::<_, crate::error::Error>((m, dicts))
            })?;
            let (mats, dictionaries) = per_fold.into_iter().unzip();
            Ok(BowFeatures {
                source: FeatureSource::PerFold(mats),
                dictionaries,
            })
        }
    }
}
