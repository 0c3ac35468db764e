//! In-memory 3-D volumes: scalar parametric maps and region label masks.
//! Voxels are stored x-fastest: `index = x + nx * (y + ny * z)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::types::{MetricId, Region};

pub type Dims = [usize; 3];

pub fn voxel_count(dims: Dims) -> usize {
    dims[0] * dims[1] * dims[2]
}

#[inline]
pub fn linear_index(dims: Dims, x: usize, y: usize, z: usize) -> usize {
    x + dims[0] * (y + dims[1] * z)
}

/// One scalar map for one subject. Non-finite input voxels are stored as
/// zero and flagged in the exclusion mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricVolume {
    dims: Dims,
    voxel_size_mm: [f64; 3],
    data: Vec<f32>,
    excluded: Vec<bool>,
    n_excluded: usize,
    metric: MetricId,
    subject_id: String,
}

impl MetricVolume {
    pub fn new(
        dims: Dims,
        voxel_size_mm: [f64; 3],
        mut data: Vec<f32>,
        metric: MetricId,
        subject_id: impl Into<String>,
    ) -> Result<Self> {
        check_geometry(dims, voxel_size_mm)?;
        if data.len() != voxel_count(dims) {
            return Err(Error::DimMismatch(format!("{} values for dims {:?}", data.len(), dims)));
        }
        let mut excluded = vec![false; data.len()];
        let mut n_excluded = 0;
        for (v, ex) in data.iter_mut().zip(excluded.iter_mut()) {
            if !v.is_finite() {
                *v = 0.0;
                *ex = true;
                n_excluded += 1;
            }
        }
        Ok(MetricVolume {
            dims,
            voxel_size_mm,
            data,
            excluded,
            n_excluded,
            metric,
            subject_id: subject_id.into(),
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn voxel_size_mm(&self) -> [f64; 3] {
        self.voxel_size_mm
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Payload with excluded voxels restored to NaN, as written to disk.
    pub fn raw_payload(&self) -> Vec<f32> {
        self.data
            .iter()
            .zip(&self.excluded)
            .map(|(&v, &ex)| if ex { f32::NAN } else { v })
            .collect()
    }

    pub fn excluded(&self) -> &[bool] {
        &self.excluded
    }

    pub fn excluded_count(&self) -> usize {
        self.n_excluded
    }

    pub fn is_excluded(&self, idx: usize) -> bool {
        self.excluded[idx]
    }

    pub fn metric(&self) -> MetricId {
        self.metric
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f32 {
        self.data[linear_index(self.dims, x, y, z)]
    }

    /// Applies `f` to every voxel, keeping the exclusion mask.
    pub fn map_values(&self, f: impl Fn(f32) -> f32) -> Result<MetricVolume> {
        let data = self.data.iter().map(|&v| f(v)).collect();
        let mut out = MetricVolume::new(
            self.dims,
            self.voxel_size_mm,
            data,
            self.metric,
            self.subject_id.clone(),
        )?;
        for (i, &ex) in self.excluded.iter().enumerate() {
            if ex && !out.excluded[i] {
                out.excluded[i] = true;
                out.n_excluded += 1;
            }
        }
        Ok(out)
    }
}

/// Integer-labelled region mask. Label 0 is background.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiMask {
    dims: Dims,
    voxel_size_mm: [f64; 3],
    data: Vec<u32>,
    label_map: BTreeMap<Region, u32>,
}

impl RoiMask {
    pub fn new(dims: Dims, voxel_size_mm: [f64; 3], data: Vec<u32>, label_map: BTreeMap<Region, u32>) -> Result<Self> {
        check_geometry(dims, voxel_size_mm)?;
        if data.len() != voxel_count(dims) {
            return Err(Error::DimMismatch(format!(
                "{} mask values for dims {:?}",
                data.len(),
                dims
            )));
        }
        for (region, &label) in &label_map {
            if region.is_composite() {
                return Err(Error::InvalidConfig(format!(
                    "composite region {region} cannot carry a mask label"
                )));
            }
            if label == 0 {
                return Err(Error::InvalidConfig(format!(
                    "region {region} mapped to background label 0"
                )));
            }
        }
        if let Some(&bad) = data.iter().find(|&&l| l != 0 && !label_map.values().any(|&m| m == l)) {
            return Err(Error::InvalidConfig(format!(
                "mask label {bad} is not named in the label map"
            )));
        }
        Ok(RoiMask {
            dims,
            voxel_size_mm,
            data,
            label_map,
        })
    }

    pub fn default_label_map() -> BTreeMap<Region, u32> {
        Region::ATOMIC
            .into_iter()
            .filter_map(|r| r.default_label().map(|l| (r, l)))
            .collect()
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn voxel_size_mm(&self) -> [f64; 3] {
        self.voxel_size_mm
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn label_map(&self) -> &BTreeMap<Region, u32> {
        &self.label_map
    }

    /// Labels that make up `region`; empty when none of its atoms is mapped.
    pub fn labels_for(&self, region: Region) -> Vec<u32> {
        region
            .atoms()
            .iter()
            .filter_map(|a| self.label_map.get(a).copied())
            .collect()
    }

    /// Per-voxel membership in `region`.
    pub fn region_mask(&self, region: Region) -> Vec<bool> {
        let labels = self.labels_for(region);
        self.data.iter().map(|l| labels.contains(l)).collect()
    }

    pub fn voxels_in(&self, region: Region) -> usize {
        let labels = self.labels_for(region);
        self.data.iter().filter(|l| labels.contains(l)).count()
    }
}

fn check_geometry(dims: Dims, voxel_size_mm: [f64; 3]) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::DimMismatch(format!("non-positive dims {dims:?}")));
    }
    if voxel_size_mm.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::DimMismatch(format!(
            "voxel size must be positive, got {voxel_size_mm:?}"
        )));
    }
    Ok(())
}
