use std::io::Write;

use super::dictionary::Dictionary;
use super::kmeans::nearest;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WordHistogram {
    pub counts: Vec<u64>,
    /// L1-normalized counts; all zeros when no patch was encoded.
    pub normalized: Vec<f64>,
}

impl WordHistogram {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total: u64 = counts.iter().sum();
        let normalized = if total == 0 {
            vec![0.0; counts.len()]
        } else {
            counts.iter().map(|&c| c as f64 / total as f64).collect()
        };
        WordHistogram { counts, normalized }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Counts nearest-word assignments (Euclidean, lowest index on ties).
pub fn encode_histogram<P: AsRef<[f64]>>(patches: &[P], dictionary: &Dictionary) -> WordHistogram {
    assert!(!dictionary.is_empty(), "dictionary must hold at least one word");
    let mut counts = vec![0u64; dictionary.len()];
    for p in patches {
        counts[nearest(p.as_ref(), &dictionary.words).0] += 1;
    }
    WordHistogram::from_counts(counts)
}

/// One row per word: `subject_id,label,metric,region,word,provenance,count,frequency`.
pub fn write_histogram_rows<W: Write>(
    w: &mut csv::Writer<W>,
    subject_id: &str,
    label: &str,
    dictionary: &Dictionary,
    hist: &WordHistogram,
) -> Result<()> {
    if hist.counts.len() != dictionary.len() {
        return Err(Error::DimMismatch("histogram and dictionary sizes differ".into()));
    }
    for (i, (&c, &f)) in hist.counts.iter().zip(&hist.normalized).enumerate() {
        w.write_record([
            subject_id.to_string(),
            label.to_string(),
            dictionary.metric.to_string(),
            dictionary.region.to_string(),
            i.to_string(),
            dictionary.provenance[i].to_string(),
            c.to_string(),
            f.to_string(),
        ])?;
    }
    Ok(())
}

pub const HISTOGRAM_HEADER: [&str; 8] = [
    "subject_id",
    "label",
    "metric",
    "region",
    "word",
    "provenance",
    "count",
    "frequency",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::RngSeed;
    use crate::types::{Label, MetricId, Region};
    use proptest::prelude::*;

    fn dict(words: Vec<Vec<f64>>) -> Dictionary {
        let k = words.len();
        Dictionary {
            metric: MetricId::FA,
            region: Region::Thalamus,
            seed: RngSeed(0),
            words,
            provenance: vec![Label::Mtbi; k],
            runs: vec![],
        }
    }

    #[test]
    fn one_hot() {
        let words: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64; 4]).collect();
        let d = dict(words.clone());
        let h = encode_histogram(&vec![words[3].clone(); 7], &d);
        assert_eq!(h.counts, vec![0, 0, 0, 7, 0, 0]);
        assert_eq!(h.normalized, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let mut words = vec![vec![100.0]; 6];
        words[2] = vec![-1.0];
        words[5] = vec![1.0];
        let h = encode_histogram(&[vec![0.0]], &dict(words));
        assert_eq!(h.counts[2], 1);
        assert_eq!(h.counts[5], 0);
    }

    #[test]
    fn empty_input() {
        let h = encode_histogram::<Vec<f64>>(&[], &dict(vec![vec![0.0], vec![1.0]]));
        assert_eq!(h.counts, vec![0, 0]);
        assert_eq!(h.normalized, vec![0.0, 0.0]);
    }

    #[test]
    fn eighteen_patches_match_exhaustive_oracle() {
        let words: Vec<Vec<f64>> = (0..5)
            .map(|j| (0..16).map(|d| ((j * 16 + d) as f64 * 0.37).sin()).collect())
            .collect();
        let patches: Vec<Vec<f64>> = (0..18)
            .map(|i| (0..16).map(|d| ((i * 31 + d * 7) as f64 * 0.11).cos()).collect())
            .collect();
        // Full distance matrix, first minimum per row.
        let mut oracle = vec![0u64; 5];
        for p in &patches {
            let dists: Vec<f64> = words
                .iter()
                .map(|w| w.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum())
                .collect();
            let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
            oracle[dists.iter().position(|&d| d == min).unwrap()] += 1;
        }
        let h = encode_histogram(&patches, &dict(words));
        assert_eq!(h.counts, oracle);
        assert_eq!(h.total(), 18);
    }

    proptest! {
        #[test]
        fn counts_sum_and_permutation_covariance(
            pts in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 0..40),
            words in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 1..8),
            rot in 0usize..8,
        ) {
            let h = encode_histogram(&pts, &dict(words.clone()));
            prop_assert_eq!(h.total() as usize, pts.len());
            let s: f64 = h.normalized.iter().sum();
            if pts.is_empty() { prop_assert_eq!(s, 0.0); } else { prop_assert!((s - 1.0).abs() < 1e-12); }

            // Reverse-then-rotate permutation; skip inputs with exact distance ties.
            let k = words.len();
            let perm: Vec<usize> = (0..k).map(|i| (k - 1 - i + rot) % k).collect();
            let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| words[i].clone()).collect();
            let tie = pts.iter().any(|p| {
                let mut d: Vec<f64> = words.iter().map(|w| crate::bow::kmeans::sq_dist(p, w)).collect();
                d.sort_by(f64::total_cmp);
                d.len() > 1 && d[0] == d[1]
            });
            prop_assume!(!tie);
            let hp = encode_histogram(&pts, &dict(permuted));
            for (new_i, &old_i) in perm.iter().enumerate() {
                prop_assert_eq!(hp.counts[new_i], h.counts[old_i]);
            }
        }
    }
}
