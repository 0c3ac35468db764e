use std::path::PathBuf;

use thiserror::Error;

use crate::types::{Label, MetricId, Region};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("{path}: header declares {declared} voxels but payload holds {found}")]
    DimMismatchWithDeclared {
        path: PathBuf,
        declared: usize,
        found: usize,
    },

    #[error("{path}: expected metric {expected}, file holds {found}")]
    WrongMetric {
        path: PathBuf,
        expected: MetricId,
        found: String,
    },

    #[error("manifest {path}: {reason}")]
    MalformedManifest { path: PathBuf, reason: String },

    #[error("duplicate subject id {0:?}")]
    DuplicateSubject(String),

    #[error("unknown metric key {0:?}")]
    UnknownMetricKey(String),

    #[error("bad class label {0:?} (expected mtbi or control)")]
    BadLabel(String),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("region {region} has no eligible voxels{}", context_suffix(.subject, .metric))]
    EmptyRegion {
        region: Region,
        subject: Option<String>,
        metric: Option<MetricId>,
    },

    #[error("subject {subject:?} has no {metric} volume")]
    MissingMetric { subject: String, metric: MetricId },

    #[error("duplicate feature name {0}")]
    DuplicateFeature(String),

    #[error("need at least {needed} points, got {got}{}", class_suffix(.class))]
    TooFewPoints {
        needed: usize,
        got: usize,
        class: Option<Label>,
    },

    #[error("no dictionary for ({metric}, {region})")]
    MissingDictionary { metric: MetricId, region: Region },

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("too few subjects for cross-validation: {0}")]
    TooFewSubjects(String),

    #[error("empty feature subset")]
    EmptySubset,

    #[error("phantom region {region} extent {extent:?} exceeds dims {dims:?}")]
    SpecRegionOutOfBounds {
        region: Region,
        extent: [usize; 6],
        dims: [usize; 3],
    },

    #[error("malformed model file {path}: {reason}")]
    MalformedModel { path: PathBuf, reason: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn context_suffix(subject: &Option<String>, metric: &Option<MetricId>) -> String {
    match (subject, metric) {
        (Some(s), Some(m)) => format!(" (subject {s:?}, metric {m})"),
        (Some(s), None) => format!(" (subject {s:?})"),
        (None, Some(m)) => format!(" (metric {m})"),
        (None, None) => String::new(),
    }
}

fn class_suffix(class: &Option<Label>) -> String {
    class.map(|c| format!(" in class {c}")).unwrap_or_default()
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "IoFailure",
            Error::MalformedHeader { .. } => "MalformedHeader",
            Error::DimMismatchWithDeclared { .. } => "DimMismatchWithDeclared",
            Error::WrongMetric { .. } => "WrongMetric",
            Error::MalformedManifest { .. } => "MalformedManifest",
            Error::DuplicateSubject(_) => "DuplicateSubject",
            Error::UnknownMetricKey(_) => "UnknownMetricKey",
            Error::BadLabel(_) => "BadLabel",
            Error::DimMismatch(_) => "DimMismatch",
            Error::EmptyRegion { .. } => "EmptyRegion",
            Error::MissingMetric { .. } => "MissingMetric",
            Error::DuplicateFeature(_) => "DuplicateFeature",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::MissingDictionary { .. } => "MissingDictionary",
            Error::SingleClass => "SingleClass",
            Error::NonFiniteFeature { .. } => "NonFiniteFeature",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::TooFewSubjects(_) => "TooFewSubjects",
            Error::EmptySubset => "EmptySubset",
            Error::SpecRegionOutOfBounds { .. } => "SpecRegionOutOfBounds",
            Error::MalformedModel { .. } => "MalformedModel",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}
