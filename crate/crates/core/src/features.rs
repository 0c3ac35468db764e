//! Named feature tables.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::types::{ClinicalField, Label, MetricId, Region};

/// Where a feature column comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureName {
    RoiMean {
        metric: MetricId,
        region: Region,
    },
    BowWord {
        metric: MetricId,
        region: Region,
        word: usize,
    },
    Clinical(ClinicalField),
}

impl FeatureName {
    pub fn source(&self) -> &'static str {
        match self {
            FeatureName::RoiMean { .. } => "roi-mean",
            FeatureName::BowWord { .. } => "bow-word",
            FeatureName::Clinical(_) => "clinical",
        }
    }

    pub fn metric(&self) -> Option<MetricId> {
        match *self {
            FeatureName::RoiMean { metric, .. } | FeatureName::BowWord { metric, .. } => Some(metric),
            FeatureName::Clinical(_) => None,
        }
    }

    pub fn region(&self) -> Option<Region> {
        match *self {
            FeatureName::RoiMean { region, .. } | FeatureName::BowWord { region, .. } => Some(region),
            FeatureName::Clinical(_) => None,
        }
    }
}

impl fmt::Display for FeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureName::RoiMean { metric, region } => write!(f, "roi-mean/{metric}/{region}"),
            FeatureName::BowWord { metric, region, word } => write!(f, "bow-word/{metric}/{region}/{word:02}"),
            FeatureName::Clinical(c) => write!(f, "clinical/{c}"),
        }
    }
}

impl FromStr for FeatureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('/').collect();
        let bad = || Error::InvalidConfig(format!("bad feature name {s:?}"));
        match parts.as_slice() {
            ["roi-mean", m, r] => Ok(FeatureName::RoiMean {
                metric: m.parse()?,
                region: r.parse()?,
            }),
            ["bow-word", m, r, w] => Ok(FeatureName::BowWord {
                metric: m.parse()?,
                region: r.parse()?,
                word: w.parse().map_err(|_| bad())?,
            }),
            ["clinical", c] => Ok(FeatureName::Clinical(c.parse()?)),
            _ => Err(bad()),
        }
    }
}

/// Subjects × features. Cells may be missing (clinical scores); present
/// cells are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    subject_ids: Vec<String>,
    labels: Vec<Label>,
    names: Vec<FeatureName>,
    values: Vec<Option<f64>>,
}

impl FeatureMatrix {
    pub fn new(
        subject_ids: Vec<String>,
        labels: Vec<Label>,
        names: Vec<FeatureName>,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(*n) {
                return Err(Error::DuplicateFeature(n.to_string()));
            }
        }
        if labels.len() != subject_ids.len() || values.len() != subject_ids.len() * names.len() {
            return Err(Error::DimMismatch(format!(
                "{} subjects, {} labels, {} features, {} cells",
                subject_ids.len(),
                labels.len(),
                names.len(),
                values.len()
            )));
        }
        let n_cols = names.len();
        if let Some(i) = values.iter().position(|v| v.is_some_and(|x| !x.is_finite())) {
            return Err(Error::NonFiniteFeature {
                row: i / n_cols,
                col: i % n_cols,
            });
        }
        Ok(FeatureMatrix {
            subject_ids,
            labels,
            names,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.subject_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn names(&self) -> &[FeatureName] {
        &self.names
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.names.len() + col]
    }

    pub fn row(&self, row: usize) -> &[Option<f64>] {
        let c = self.names.len();
        &self.values[row * c..(row + 1) * c]
    }

    pub fn column_index(&self, name: &FeatureName) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Columns side by side; both tables must list the same subjects.
    pub fn hcat(&self, other: &FeatureMatrix) -> Result<FeatureMatrix> {
        if self.subject_ids != other.subject_ids || self.labels != other.labels {
            return Err(Error::DimMismatch("tables list different subjects".into()));
        }
        let mut names = self.names.clone();
        names.extend_from_slice(&other.names);
        let mut values = Vec::with_capacity(self.values.len() + other.values.len());
        for r in 0..self.n_rows() {
            values.extend_from_slice(self.row(r));
            values.extend_from_slice(other.row(r));
        }
        FeatureMatrix::new(self.subject_ids.clone(), self.labels.clone(), names, values)
    }

    /// Subset of rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            subject_ids: rows.iter().map(|&r| self.subject_ids[r].clone()).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            names: self.names.clone(),
            values: rows.iter().flat_map(|&r| self.row(r).iter().copied()).collect(),
        }
    }

    /// Delimited text: `subject_id,label,<feature names...>`; missing cells
    /// are empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        let mut header = vec!["subject_id".to_string(), "label".to_string()];
        header.extend(self.names.iter().map(ToString::to_string));
        w.write_record(&header)?;
        for r in 0..self.n_rows() {
            let mut rec = vec![self.subject_ids[r].clone(), self.labels[r].to_string()];
            rec.extend(self.row(r).iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<feature table>", e))?;
        Ok(())
    }
}
