//! Per-column z-scoring with mean imputation, fit on training rows only.

use serde::{Deserialize, Serialize};

/// Columns whose sample sd is at or below this fraction of |mean| are
/// treated as constant.
const CONSTANT_REL_SD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

/// Fits column means (over present values) and sample standard deviations
/// of the mean-imputed columns. Constant columns get sd = 1.
pub fn standardize_fit<R: AsRef<[Option<f64>]>>(rows: &[R]) -> Standardizer {
    let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
    let mut mean = vec![0.0; n_cols];
    let mut sd = vec![1.0; n_cols];
    for c in 0..n_cols {
        let present: Vec<f64> = rows.iter().filter_map(|r| r.as_ref()[c]).collect();
        if present.is_empty() {
            continue;
        }
        let m = present.iter().sum::<f64>() / present.len() as f64;
        mean[c] = m;
        // Imputed cells sit at the mean and contribute zero deviation.
        let ss: f64 = present.iter().map(|v| (v - m) * (v - m)).sum();
        let n = rows.len();
        let s = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
        if s.is_finite() && s > CONSTANT_REL_SD * m.abs() && s > 0.0 {
            sd[c] = s;
        }
    }
    Standardizer { mean, sd }
}

impl Standardizer {
    pub fn apply_row(&self, row: &[Option<f64>]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(v, (&m, &s))| (v.unwrap_or(m) - m) / s)
            .collect()
    }

    pub fn apply_dense(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(v, (&m, &s))| (v - m) / s)
            .collect()
    }
}

pub fn standardize_apply<R: AsRef<[Option<f64>]>>(params: &Standardizer, rows: &[R]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| params.apply_row(r.as_ref())).collect()
}
