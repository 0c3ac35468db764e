//! Region-mean features: the mean of each metric inside each region,
//! plus clinical covariates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureName};
use crate::ingest::Dataset;
use crate::types::{ClinicalField, MetricId, Region};
use crate::volume::{MetricVolume, RoiMask};

/// Arithmetic mean of `volume` over the voxels of `region`, skipping
/// excluded voxels.
pub fn mean_in_roi(volume: &MetricVolume, mask: &RoiMask, region: Region) -> Result<f64> {
    if volume.dims() != mask.dims() {
        return Err(Error::DimMismatch(format!(
            "volume {:?} vs mask {:?}",
            volume.dims(),
            mask.dims()
        )));
    }
    let labels = mask.labels_for(region);
    let mut sum = 0.0f64;
    let mut n = 0usize;
    for (i, (&l, &v)) in mask.data().iter().zip(volume.data()).enumerate() {
        if labels.contains(&l) && !volume.is_excluded(i) {
            sum += f64::from(v);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptyRegion {
            region,
            subject: None,
            metric: Some(volume.metric()),
        });
    }
    Ok(sum / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoiConfig {
    pub metrics: Vec<MetricId>,
    pub regions: Vec<Region>,
    pub clinical: Vec<ClinicalField>,
}

impl Default for RoiConfig {
    /// 7 metrics × 5 regions + 6 clinical = 41 columns.
    fn default() -> Self {
        RoiConfig {
            metrics: MetricId::ALL.to_vec(),
            regions: Region::ATOMIC.to_vec(),
            clinical: ClinicalField::ALL.to_vec(),
        }
    }
}

impl RoiConfig {
    pub fn n_features(&self) -> usize {
        self.metrics.len() * self.regions.len() + self.clinical.len()
    }
}

/// Clinical covariates as a table; missing scores stay missing.
pub fn clinical_table(dataset: &Dataset, fields: &[ClinicalField]) -> Result<FeatureMatrix> {
    let values = dataset
        .subjects
        .iter()
        .flat_map(|s| fields.iter().map(|&f| s.record.clinical(f)))
        .collect();
    FeatureMatrix::new(
        dataset.subject_ids(),
        dataset.labels(),
        fields.iter().map(|&f| FeatureName::Clinical(f)).collect(),
        values,
    )
}

/// Rows in dataset order; columns metric-major (`for metric { for region }`)
/// followed by the clinical block.
pub fn build_mean_feature_table(dataset: &Dataset, config: &RoiConfig) -> Result<FeatureMatrix> {
    let rows = crate::par::try_map(&dataset.subjects, |s| {
        let mut row = Vec::with_capacity(config.metrics.len() * config.regions.len());
        for &m in &config.metrics {
            let vol = s.volume(m)?;
            for &r in &config.regions {
                let v = mean_in_roi(vol, &s.mask, r).map_err(|e| match e {
                    Error::EmptyRegion { region, metric, .. } => Error::EmptyRegion {
                        region,
                        metric,
                        subject: Some(s.record.subject_id.clone()),
                    },
                    other => other,
                })?;
                row.push(Some(v));
            }
        }
        Ok::<_, Error>(row)
    })?;
    let names = config
        .metrics
        .iter()
        .flat_map(|&metric| {
            config
                .regions
                .iter()
                .map(move |&region| FeatureName::RoiMean { metric, region })
        })
        .collect();
    let imaging = FeatureMatrix::new(
        dataset.subject_ids(),
        dataset.labels(),
        names,
        rows.into_iter().flatten().collect(),
    )?;
    if config.clinical.is_empty() {
        Ok(imaging)
    } else {
        imaging.hcat(&clinical_table(dataset, &config.clinical)?)
    }
}
