use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{MetricId, Region};
use crate::volume::{linear_index, MetricVolume, RoiMask};

/// A square in-plane patch from one axial slice, row-major
/// (`values[dy * size + dx]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub values: Vec<f64>,
    /// Voxel index of the top-left corner.
    pub origin: [usize; 3],
    pub metric: MetricId,
    pub region: Region,
    pub subject_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PatchParams {
    pub size: usize,
    pub stride: usize,
    /// Z-score each patch before clustering/encoding.
    pub normalize: bool,
}

impl Default for PatchParams {
    fn default() -> Self {
        PatchParams {
            size: 16,
            stride: 8,
            normalize: false,
        }
    }
}

/// Patches whose centre voxel (offset `size/2` in x and y) lies in `region`,
/// that fit inside the volume and contain no excluded voxel. Corners lie on
/// a `stride` grid from (0, 0); output is ordered by z, then y, then x.
pub fn extract_patches(
    volume: &MetricVolume,
    mask: &RoiMask,
    region: Region,
    params: &PatchParams,
) -> Result<Vec<Patch>> {
    if volume.dims() != mask.dims() {
        return Err(Error::DimMismatch(format!(
            "volume {:?} vs mask {:?}",
            volume.dims(),
            mask.dims()
        )));
    }
    if params.size == 0 || params.stride == 0 {
        return Err(Error::InvalidConfig("patch size and stride must be positive".into()));
    }
    let dims = volume.dims();
    let [nx, ny, nz] = dims;
    let size = params.size;
    let mut out = Vec::new();
    if size > nx || size > ny {
        return Ok(out);
    }
    let labels = mask.labels_for(region);
    if labels.is_empty() {
        return Ok(out);
    }
    let half = size / 2;
    for z in 0..nz {
        for y0 in (0..=ny - size).step_by(params.stride) {
            'corner: for x0 in (0..=nx - size).step_by(params.stride) {
                let centre = linear_index(dims, x0 + half, y0 + half, z);
                if !labels.contains(&mask.data()[centre]) {
                    continue;
                }
                let mut values = Vec::with_capacity(size * size);
                for dy in 0..size {
                    let row = linear_index(dims, x0, y0 + dy, z);
                    for i in row..row + size {
                        if volume.is_excluded(i) {
                            continue 'corner;
                        }
                        values.push(f64::from(volume.data()[i]));
                    }
                }
                if params.normalize {
                    zscore(&mut values);
                }
                out.push(Patch {
                    values,
                    origin: [x0, y0, z],
                    metric: volume.metric(),
                    region,
                    subject_id: volume.subject_id().to_string(),
                });
            }
        }
    }
    Ok(out)
}

fn zscore(values: &mut [f64]) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    let scale = if sd > 0.0 { 1.0 / sd } else { 1.0 };
    for v in values {
        *v = (*v - mean) * scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::voxel_count;
    use proptest::prelude::*;

    fn setup(dims: [usize; 3], label: u32) -> (MetricVolume, RoiMask) {
        let n = voxel_count(dims);
        let v = MetricVolume::new(dims, [1.0; 3], (0..n).map(|i| i as f32).collect(), MetricId::FA, "s").unwrap();
        let m = RoiMask::new(dims, [1.0; 3], vec![label; n], RoiMask::default_label_map()).unwrap();
        (v, m)
    }

    #[test]
    fn empty_region_gives_no_patches() {
        let (v, m) = setup([32, 32, 1], 0);
        assert!(extract_patches(&v, &m, Region::Thalamus, &PatchParams::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn single_patch_fits_exactly() {
        let (v, m) = setup([16, 16, 1], 1);
        let p = extract_patches(&v, &m, Region::Thalamus, &PatchParams::default()).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].origin, [0, 0, 0]);
        assert_eq!(p[0].values.len(), 256);
        // Row-major: second row starts at voxel (0, 1, 0).
        assert_eq!(p[0].values[16], 16.0);
    }

    #[test]
    fn stride_grid_count() {
        // Corners at x, y in {0, 8, 16}: 3 x 3 per slice, 2 slices.
        let (v, m) = setup([32, 32, 2], 1);
        let p = extract_patches(&v, &m, Region::Thalamus, &PatchParams::default()).unwrap();
        let mut oracle = Vec::new();
        for z in 0..2 {
            for y in (0..32).step_by(8).filter(|y| y + 16 <= 32) {
                for x in (0..32).step_by(8).filter(|x| x + 16 <= 32) {
                    oracle.push([x, y, z]);
                }
            }
        }
        assert_eq!(oracle.len(), 18);
        assert_eq!(p.iter().map(|p| p.origin).collect::<Vec<_>>(), oracle);
    }

    #[test]
    fn excluded_voxel_drops_overlapping_patches() {
        let (v, m) = setup([32, 32, 1], 1);
        let idx = linear_index([32, 32, 1], 20, 20, 0);
        let mut data = v.raw_payload();
        data[idx] = f32::NAN;
        let v = MetricVolume::new([32, 32, 1], [1.0; 3], data, MetricId::FA, "s").unwrap();
        let p = extract_patches(&v, &m, Region::Thalamus, &PatchParams::default()).unwrap();
        // Corners whose 16x16 window covers (20, 20): x0, y0 in {8, 16}.
        assert_eq!(p.len(), 9 - 4);
    }

    #[test]
    fn zscore_option() {
        let (v, m) = setup([16, 16, 1], 1);
        let params = PatchParams {
            normalize: true,
            ..Default::default()
        };
        let p = extract_patches(&v, &m, Region::Thalamus, &params).unwrap();
        let mean: f64 = p[0].values.iter().sum::<f64>() / 256.0;
        assert!(mean.abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn invariant_to_other_labels(other in prop::collection::vec(0u32..6, 32 * 32)) {
            let dims = [32, 32, 1];
            let v = MetricVolume::new(dims, [1.0; 3], (0..1024).map(|i| (i % 7) as f32).collect(), MetricId::MD, "s").unwrap();
            // Thalamus block in the middle; everything else gets arbitrary non-thalamus labels.
            let base: Vec<u32> = (0..1024).map(|i| {
                let (x, y) = (i % 32, i / 32);
                if (6..26).contains(&x) && (6..26).contains(&y) { 1 } else { 0 }
            }).collect();
            let noisy: Vec<u32> = base.iter().zip(&other)
                .map(|(&b, &o)| if b == 1 { 1 } else if o == 1 { 0 } else { o })
                .collect();
            let lm = RoiMask::default_label_map();
            let a = extract_patches(&v, &RoiMask::new(dims, [1.0; 3], base, lm.clone()).unwrap(), Region::Thalamus, &PatchParams::default()).unwrap();
            let b = extract_patches(&v, &RoiMask::new(dims, [1.0; 3], noisy, lm).unwrap(), Region::Thalamus, &PatchParams::default()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
