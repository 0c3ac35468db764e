use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::kmeans::kmeans;
use crate::error::{Error, Result};
use crate::seed::RngSeed;
use crate::types::{Label, MetricId, Region};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansSettings {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KMeansSettings {
    fn default() -> Self {
        KMeansSettings {
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRun {
    pub class: Label,
    pub n_points: usize,
    pub iterations: usize,
    pub objective: f64,
}

/// Visual words for one (metric, region): MTBI-derived words first, then
/// control-derived words.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    pub metric: MetricId,
    pub region: Region,
    pub seed: RngSeed,
    pub words: Vec<Vec<f64>>,
    pub provenance: Vec<Label>,
    pub runs: Vec<ClusterRun>,
}

impl Dictionary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word_dim(&self) -> usize {
        self.words.first().map_or(0, Vec::len)
    }
}

/// Seed used for one class's clustering.
pub fn dictionary_seed(seed: RngSeed, metric: MetricId, region: Region, class: Label) -> RngSeed {
    seed.derive(&format!("dictionary/{metric}/{region}/{class}"))
}

/// Clusters each class's training patches separately into
/// `words_per_class` words and concatenates the centroids.
pub fn build_dictionary<P: AsRef<[f64]> + Sync>(
    mtbi: &[P],
    control: &[P],
    metric: MetricId,
    region: Region,
    words_per_class: usize,
    seed: RngSeed,
    settings: KMeansSettings,
) -> Result<Dictionary> {
    let mut words = Vec::with_capacity(2 * words_per_class);
    let mut provenance = Vec::with_capacity(2 * words_per_class);
    let mut runs = Vec::new();
    for (class, points) in [(Label::Mtbi, mtbi), (Label::Control, control)] {
        let r = kmeans(
            points,
            words_per_class,
            dictionary_seed(seed, metric, region, class),
            settings.max_iter,
            settings.tol,
        )
        .map_err(|e| match e {
            Error::TooFewPoints { needed, got, .. } => Error::TooFewPoints {
                needed,
                got,
                class: Some(class),
            },
            other => other,
        })?;
        runs.push(ClusterRun {
            class,
            n_points: points.len(),
            iterations: r.iterations,
            objective: r.objective(),
        });
        provenance.extend(std::iter::repeat_n(class, r.centroids.len()));
        words.extend(r.centroids);
    }
    Ok(Dictionary {
        metric,
        region,
        seed,
        words,
        provenance,
        runs,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct DictionaryHeader {
    format: String,
    metric: MetricId,
    region: Region,
    k: usize,
    dim: usize,
    seed: u64,
    provenance: Vec<Label>,
    runs: Vec<ClusterRun>,
}

/// Serialized as one JSON header line then `k * dim` little-endian f32
/// centroid values, word-major.
pub fn encode_dictionary(d: &Dictionary) -> Vec<u8> {
    let header = DictionaryHeader {
        format: "dictionary-f32le".into(),
        metric: d.metric,
        region: d.region,
        k: d.len(),
        dim: d.word_dim(),
        seed: d.seed.0,
        provenance: d.provenance.clone(),
        runs: d.runs.clone(),
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    for v in d.words.iter().flatten() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn decode_dictionary(path: &Path, bytes: &[u8]) -> Result<Dictionary> {
    let bad = |reason: String| Error::MalformedModel {
        path: path.to_path_buf(),
        reason,
    };
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("no header line".into()))?;
    let header: DictionaryHeader = serde_json::from_slice(&bytes[..nl]).map_err(|e| bad(e.to_string()))?;
    let payload = &bytes[nl + 1..];
    if payload.len() != header.k * header.dim * 4 || header.provenance.len() != header.k {
        return Err(bad(format!(
            "payload of {} bytes does not match k={} dim={}",
            payload.len(),
            header.k,
            header.dim
        )));
    }
    let flat: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    let words = if header.dim == 0 {
        vec![Vec::new(); header.k]
    } else {
        flat.chunks(header.dim).map(<[f64]>::to_vec).collect()
    };
    Ok(Dictionary {
        metric: header.metric,
        region: header.region,
        seed: RngSeed(header.seed),
        words,
        provenance: header.provenance,
        runs: header.runs,
    })
}

pub fn write_dictionary(path: impl AsRef<Path>, d: &Dictionary) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_dictionary(d)).map_err(|e| Error::io(path, e))
}

pub fn read_dictionary(path: impl AsRef<Path>) -> Result<Dictionary> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dictionary(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_word_per_class_from_constant_patches() {
        let m = vec![vec![1.0; 256]; 5];
        let c = vec![vec![-2.0; 256]; 4];
        let d = build_dictionary(
            &m,
            &c,
            MetricId::FA,
            Region::Thalamus,
            1,
            RngSeed(3),
            Default::default(),
        )
        .unwrap();
        assert_eq!(d.words, vec![vec![1.0; 256], vec![-2.0; 256]]);
        assert_eq!(d.provenance, vec![Label::Mtbi, Label::Control]);
    }

    #[test]
    fn twenty_words_in_default_configuration() {
        let pts: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i * i % 7) as f64]).collect();
        let d = build_dictionary(
            &pts,
            &pts,
            MetricId::MD,
            Region::CorpusCallosum,
            10,
            RngSeed(1),
            Default::default(),
        )
        .unwrap();
        assert_eq!(d.len(), 20);
        assert_eq!(d.provenance.iter().filter(|&&l| l == Label::Mtbi).count(), 10);
    }

    #[test]
    fn class_context_on_too_few_points() {
        let m = vec![vec![0.0]; 3];
        let c = vec![vec![0.0]; 1];
        let e = build_dictionary(
            &m,
            &c,
            MetricId::MD,
            Region::Thalamus,
            2,
            RngSeed(1),
            Default::default(),
        );
        assert!(matches!(
            e,
            Err(Error::TooFewPoints {
                class: Some(Label::Control),
                ..
            })
        ));
    }

    #[test]
    fn serialization_round_trip_is_f32_exact() {
        let m: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 * 0.25, 1.0]).collect();
        let d = build_dictionary(&m, &m, MetricId::AWF, Region::CCBody, 2, RngSeed(9), Default::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.dict");
        write_dictionary(&p, &d).unwrap();
        let r = read_dictionary(&p).unwrap();
        assert_eq!(r.metric, d.metric);
        assert_eq!(r.provenance, d.provenance);
        for (a, b) in r.words.iter().flatten().zip(d.words.iter().flatten()) {
            assert_eq!(*a, f64::from(*b as f32));
        }
        assert_eq!(encode_dictionary(&r), encode_dictionary(&d));
    }
}
