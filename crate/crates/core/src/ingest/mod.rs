//! Reading datasets from disk.

mod manifest;
mod validate;
mod volume_io;

use std::collections::BTreeMap;

pub use manifest::{read_manifest, write_manifest, DatasetManifest, SubjectRecord, SCHEMA_VERSION};
pub use validate::{validate_dataset, Issue, IssueKind, ValidationReport};
pub use volume_io::{encode_mask, encode_volume, read_dims, read_mask, read_volume, write_mask, write_volume};

use crate::error::{Error, Result};
use crate::types::{Label, MetricId};
use crate::volume::{MetricVolume, RoiMask};

/// One subject with its mask and the loaded metric volumes.
#[derive(Debug, Clone)]
pub struct SubjectData {
    pub record: SubjectRecord,
    pub mask: RoiMask,
    pub volumes: BTreeMap<MetricId, MetricVolume>,
}

impl SubjectData {
    pub fn volume(&self, metric: MetricId) -> Result<&MetricVolume> {
        self.volumes.get(&metric).ok_or_else(|| Error::MissingMetric {
            subject: self.record.subject_id.clone(),
            metric,
        })
    }
}

/// Loaded dataset, rows in manifest order.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub subjects: Vec<SubjectData>,
}

impl Dataset {
    /// Loads the mask and the requested metrics for every subject, in
    /// parallel. Volume/mask geometry must agree.
    pub fn load(manifest: &DatasetManifest, metrics: &[MetricId]) -> Result<Dataset> {
        let subjects = crate::par::try_map(&manifest.subjects, |rec| {
            let mask = read_mask(manifest.resolve(&rec.mask_path))?;
            let mut volumes = BTreeMap::new();
            for &m in metrics {
                let p = rec.volume_paths.get(&m).ok_or_else(|| Error::MissingMetric {
                    subject: rec.subject_id.clone(),
                    metric: m,
                })?;
                let v = read_volume(manifest.resolve(p), m)?;
                if v.dims() != mask.dims() {
                    return Err(Error::DimMismatch(format!(
                        "subject {:?}: {m} dims {:?} vs mask {:?}",
                        rec.subject_id,
                        v.dims(),
                        mask.dims()
                    )));
                }
                volumes.insert(m, v);
            }
            Ok(SubjectData {
                record: rec.clone(),
                mask,
                volumes,
            })
        })?;
        Ok(Dataset { subjects })
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.subjects.iter().map(|s| s.record.label).collect()
    }

    pub fn subject_ids(&self) -> Vec<String> {
        self.subjects.iter().map(|s| s.record.subject_id.clone()).collect()
    }
}
