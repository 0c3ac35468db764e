//! Volume and mask file format.
//!
//! A file is one UTF-8 JSON header line terminated by `\n`, followed
//! immediately by the raw payload:
//!
//! * metric volumes: `"format":"f32le"`, `nx*ny*nz` little-endian IEEE-754
//!   binary32 values, x fastest;
//! * masks: `"format":"u32le"`, `nx*ny*nz` little-endian u32 labels plus a
//!   `"labels"` object naming each region's label.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{MetricId, Region};
use crate::volume::{voxel_count, Dims, MetricVolume, RoiMask};

pub const VOLUME_FORMAT: &str = "f32le";
pub const MASK_FORMAT: &str = "u32le";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    dims: Dims,
    voxel_size_mm: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subject_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<BTreeMap<Region, u32>>,
}

fn split_header<'a>(path: &Path, bytes: &'a [u8]) -> Result<(Header, &'a [u8])> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| malformed(path, "no header line"))?;
    let text = std::str::from_utf8(&bytes[..nl]).map_err(|_| malformed(path, "header is not UTF-8"))?;
    let header: Header = serde_json::from_str(text).map_err(|e| malformed(path, &e.to_string()))?;
    if header.dims.contains(&0) {
        return Err(malformed(path, "dims must be positive"));
    }
    Ok((header, &bytes[nl + 1..]))
}

fn malformed(path: &Path, reason: &str) -> Error {
    Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

fn check_payload(path: &Path, dims: Dims, payload: &[u8]) -> Result<usize> {
    let declared = voxel_count(dims);
    if !payload.len().is_multiple_of(4) || payload.len() / 4 != declared {
        return Err(Error::DimMismatchWithDeclared {
            path: path.to_path_buf(),
            declared,
            found: payload.len() / 4,
        });
    }
    Ok(declared)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn read_volume(path: impl AsRef<Path>, expected: MetricId) -> Result<MetricVolume> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let (header, payload) = split_header(path, &bytes)?;
    if header.format != VOLUME_FORMAT {
        return Err(malformed(
            path,
            &format!("format {:?} is not {VOLUME_FORMAT}", header.format),
        ));
    }
    if let Some(name) = &header.metric {
        match name.parse::<MetricId>() {
            Ok(m) if m == expected => {}
            _ => {
                return Err(Error::WrongMetric {
                    path: path.to_path_buf(),
                    expected,
                    found: name.clone(),
                })
            }
        }
    }
    check_payload(path, header.dims, payload)?;
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    MetricVolume::new(
        header.dims,
        header.voxel_size_mm,
        data,
        expected,
        header.subject_id.unwrap_or_default(),
    )
    .map_err(|e| malformed(path, &e.to_string()))
}

pub fn encode_volume(volume: &MetricVolume) -> Vec<u8> {
    let header = Header {
        format: VOLUME_FORMAT.to_string(),
        dims: volume.dims(),
        voxel_size_mm: volume.voxel_size_mm(),
        metric: Some(volume.metric().to_string()),
        subject_id: Some(volume.subject_id().to_string()),
        labels: None,
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    out.reserve(volume.data().len() * 4);
    for v in volume.raw_payload() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_volume(path: impl AsRef<Path>, volume: &MetricVolume) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_volume(volume)).map_err(|e| Error::io(path, e))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<RoiMask> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let (header, payload) = split_header(path, &bytes)?;
    if header.format != MASK_FORMAT {
        return Err(malformed(
            path,
            &format!("format {:?} is not {MASK_FORMAT}", header.format),
        ));
    }
    let labels = header.labels.unwrap_or_else(RoiMask::default_label_map);
    check_payload(path, header.dims, payload)?;
    let data = payload
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    RoiMask::new(header.dims, header.voxel_size_mm, data, labels).map_err(|e| malformed(path, &e.to_string()))
}

pub fn encode_mask(mask: &RoiMask) -> Vec<u8> {
    let header = Header {
        format: MASK_FORMAT.to_string(),
        dims: mask.dims(),
        voxel_size_mm: mask.voxel_size_mm(),
        metric: None,
        subject_id: None,
        labels: Some(mask.label_map().clone()),
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    for v in mask.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_mask(path: impl AsRef<Path>, mask: &RoiMask) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_mask(mask)).map_err(|e| Error::io(path, e))
}

/// Reads only the geometry from a volume or mask header.
pub fn read_dims(path: impl AsRef<Path>) -> Result<Dims> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let (header, _) = split_header(path, &bytes)?;
    Ok(header.dims)
}
