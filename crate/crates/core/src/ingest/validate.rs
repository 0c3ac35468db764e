use std::fmt;

use serde::Serialize;

use super::manifest::DatasetManifest;
use super::volume_io::{read_mask, read_volume};
use crate::types::{Label, MetricId};
use crate::volume::Dims;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IssueKind {
    MissingMetric,
    DimMismatch { volume: Dims, mask: Dims },
    Unreadable { reason: String },
    TooFewSubjects { count: usize },
    MissingClass { class: Label },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub subject_id: Option<String>,
    pub metric: Option<MetricId>,
    #[serde(flatten)]
    pub kind: IssueKind,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = &self.subject_id {
            write!(f, "subject {s}: ")?;
        }
        if let Some(m) = self.metric {
            write!(f, "{m}: ")?;
        }
        match &self.kind {
            IssueKind::MissingMetric => write!(f, "missing metric"),
            IssueKind::DimMismatch { volume, mask } => {
                write!(f, "volume dims {volume:?} differ from mask dims {mask:?}")
            }
            IssueKind::Unreadable { reason } => write!(f, "unreadable: {reason}"),
            IssueKind::TooFewSubjects { count } => write!(f, "only {count} subject(s)"),
            IssueKind::MissingClass { class } => write!(f, "no {class} subjects"),
        }
    }
}

/// Per-subject problems; empty means the dataset is usable.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks that every requested metric exists for every subject and that
/// each volume shares the geometry of that subject's mask.
pub fn validate_dataset(manifest: &DatasetManifest, required: &[MetricId]) -> ValidationReport {
    let mut issues = Vec::new();

    let n = manifest.subjects.len();
    if n < 2 {
        issues.push(Issue {
            subject_id: None,
            metric: None,
            kind: IssueKind::TooFewSubjects { count: n },
        });
    }
    for class in Label::BOTH {
        if n > 0 && !manifest.subjects.iter().any(|s| s.label == class) {
            issues.push(Issue {
                subject_id: None,
                metric: None,
                kind: IssueKind::MissingClass { class },
            });
        }
    }

    let per_subject = crate::par::map(&manifest.subjects, |s| {
        let mut out = Vec::new();
        let issue = |metric, kind| Issue {
            subject_id: Some(s.subject_id.clone()),
            metric,
            kind,
        };
        let mask_dims = match read_mask(manifest.resolve(&s.mask_path)) {
            Ok(m) => Some(m.dims()),
            Err(e) => {
                out.push(issue(None, IssueKind::Unreadable { reason: e.to_string() }));
                None
            }
        };
        let mut metrics: Vec<MetricId> = s.volume_paths.keys().copied().collect();
        metrics.extend(required.iter().filter(|m| !s.volume_paths.contains_key(m)));
        metrics.sort();
        metrics.dedup();
        for m in metrics {
            let Some(p) = s.volume_paths.get(&m) else {
                out.push(issue(Some(m), IssueKind::MissingMetric));
                continue;
            };
            match read_volume(manifest.resolve(p), m) {
                Ok(v) => {
                    if let Some(md) = mask_dims {
                        if v.dims() != md {
                            out.push(issue(
                                Some(m),
                                IssueKind::DimMismatch {
                                    volume: v.dims(),
                                    mask: md,
                                },
                            ));
                        }
                    }
                }
                Err(e) => out.push(issue(Some(m), IssueKind::Unreadable { reason: e.to_string() })),
            }
        }
        out
    });
    issues.extend(per_subject.into_iter().flatten());
    ValidationReport { issues }
}
