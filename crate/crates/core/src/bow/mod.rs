//! Bag-of-visual-words features: in-plane patches from region slices,
//! per-class k-means dictionaries and per-subject word histograms.

mod dictionary;
mod histogram;
mod kmeans;
mod patch;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use dictionary::{
    build_dictionary, decode_dictionary, dictionary_seed, encode_dictionary, read_dictionary, write_dictionary,
    ClusterRun, Dictionary, KMeansSettings,
};
pub use histogram::{encode_histogram, write_histogram_rows, WordHistogram, HISTOGRAM_HEADER};
pub use kmeans::{kmeans, KMeansResult};
pub use patch::{extract_patches, Patch, PatchParams};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureName};
use crate::ingest::Dataset;
use crate::roi::clinical_table;
use crate::seed::RngSeed;
use crate::types::{ClinicalField, Label, MetricId, Region};

/// A (metric, region) pair with its own dictionary.
pub type Channel = (MetricId, Region);

pub type DictionarySet = BTreeMap<Channel, Dictionary>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BowConfig {
    pub metrics: Vec<MetricId>,
    pub regions: Vec<Region>,
    pub words_per_class: usize,
    pub patch: PatchParams,
    pub kmeans: KMeansSettings,
    pub clinical: Vec<ClinicalField>,
}

impl Default for BowConfig {
    /// 5 metrics × 2 regions × 20 words + 6 clinical = 206 columns.
    fn default() -> Self {
        BowConfig {
            metrics: MetricId::BOW.to_vec(),
            regions: Region::BOW.to_vec(),
            words_per_class: 10,
            patch: PatchParams::default(),
            kmeans: KMeansSettings::default(),
            clinical: ClinicalField::ALL.to_vec(),
        }
    }
}

impl BowConfig {
    pub fn channels(&self) -> Vec<Channel> {
        self.metrics
            .iter()
            .flat_map(|&m| self.regions.iter().map(move |&r| (m, r)))
            .collect()
    }

    pub fn words_per_dictionary(&self) -> usize {
        2 * self.words_per_class
    }

    pub fn n_features(&self) -> usize {
        self.channels().len() * self.words_per_dictionary() + self.clinical.len()
    }
}

/// Extracted patches, indexed `[subject][channel]` in config order.
#[derive(Debug, Clone)]
pub struct PatchBank {
    pub channels: Vec<Channel>,
    pub subject_ids: Vec<String>,
    pub labels: Vec<Label>,
    pub patches: Vec<Vec<Vec<Patch>>>,
}

impl PatchBank {
    pub fn extract(dataset: &Dataset, config: &BowConfig) -> Result<PatchBank> {
        let channels = config.channels();
        let patches = crate::par::try_map(&dataset.subjects, |s| {
            channels
                .iter()
                .map(|&(m, r)| extract_patches(s.volume(m)?, &s.mask, r, &config.patch))
                .collect::<Result<Vec<_>>>()
        })?;
        Ok(PatchBank {
            channels,
            subject_ids: dataset.subject_ids(),
            labels: dataset.labels(),
            patches,
        })
    }

    fn channel_index(&self, channel: Channel) -> Option<usize> {
        self.channels.iter().position(|&c| c == channel)
    }
}

/// Learns one dictionary per channel from the patches of `train_rows` only.
pub fn fit_dictionaries(
    bank: &PatchBank,
    train_rows: &[usize],
    config: &BowConfig,
    seed: RngSeed,
) -> Result<DictionarySet> {
    let fitted = crate::par::try_map_range(bank.channels.len(), |c| {
        let (metric, region) = bank.channels[c];
        let gather = |class: Label| -> Vec<&[f64]> {
            train_rows
                .iter()
                .filter(|&&r| bank.labels[r] == class)
                .flat_map(|&r| bank.patches[r][c].iter().map(|p| p.values.as_slice()))
                .collect()
        };
        let d = build_dictionary(
            &gather(Label::Mtbi),
            &gather(Label::Control),
            metric,
            region,
            config.words_per_class,
            seed.derive("dictionaries"),
            config.kmeans,
        )?;
        Ok::<_, Error>(((metric, region), d))
    })?;
    Ok(fitted.into_iter().collect())
}

/// Histogram of one subject's patches for one channel.
pub fn subject_histogram(
    bank: &PatchBank,
    row: usize,
    dictionaries: &DictionarySet,
    channel: Channel,
) -> Result<WordHistogram> {
    let d = dictionaries.get(&channel).ok_or(Error::MissingDictionary {
        metric: channel.0,
        region: channel.1,
    })?;
    let c = bank
        .channel_index(channel)
        .ok_or_else(|| Error::InvalidConfig(format!("channel {channel:?} was not extracted")))?;
    let values: Vec<&[f64]> = bank.patches[row][c].iter().map(|p| p.values.as_slice()).collect();
    Ok(encode_histogram(&values, d))
}

/// Normalized histograms concatenated in channel order.
pub fn encode_bank(bank: &PatchBank, dictionaries: &DictionarySet) -> Result<FeatureMatrix> {
    let mut names = Vec::new();
    for &(metric, region) in &bank.channels {
        let d = dictionaries
            .get(&(metric, region))
            .ok_or(Error::MissingDictionary { metric, region })?;
        names.extend((0..d.len()).map(|word| FeatureName::BowWord { metric, region, word }));
    }
    let rows = crate::par::try_map_range(bank.subject_ids.len(), |r| {
        let mut row = Vec::new();
        for &ch in &bank.channels {
            row.extend(
                subject_histogram(bank, r, dictionaries, ch)?
                    .normalized
                    .into_iter()
                    .map(Some),
            );
        }
        Ok::<_, Error>(row)
    })?;
    FeatureMatrix::new(
        bank.subject_ids.clone(),
        bank.labels.clone(),
        names,
        rows.into_iter().flatten().collect(),
    )
}

/// Word-histogram features for every subject with the given dictionaries,
/// followed by the clinical block.
pub fn build_bow_feature_table(
    dataset: &Dataset,
    dictionaries: &DictionarySet,
    config: &BowConfig,
) -> Result<FeatureMatrix> {
    for (metric, region) in config.channels() {
        if !dictionaries.contains_key(&(metric, region)) {
            return Err(Error::MissingDictionary { metric, region });
        }
    }
    let bank = PatchBank::extract(dataset, config)?;
    with_clinical(dataset, encode_bank(&bank, dictionaries)?, config)
}

pub(crate) fn with_clinical(dataset: &Dataset, words: FeatureMatrix, config: &BowConfig) -> Result<FeatureMatrix> {
    if config.clinical.is_empty() {
        Ok(words)
    } else {
        words.hcat(&clinical_table(dataset, &config.clinical)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_configuration_is_206_wide() {
        let c = BowConfig::default();
        assert_eq!(c.words_per_dictionary(), 20);
        assert_eq!(c.channels().len(), 10);
        assert_eq!(c.n_features(), 206);
    }
}
