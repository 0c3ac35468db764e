//! Dataset manifest: one subject per row of a comma-separated table.
//!
//! ```text
//! #schema_version=1
//! subject_id,label,age,sex,stroop,sdmt,cvlt,fss,mask,MD,FA,MK,AWF,DA,DePar,DePer
//! s001,mtbi,34,F,52,,41,3.2,s001/mask.roi,s001/MD.vol,...
//! ```
//!
//! The version line is optional (defaults to 1). `subject_id`, `label`,
//! `age`, `sex` and `mask` are required columns; clinical scores may be
//! left empty. Any other column must name a metric. Paths are relative to
//! the manifest's directory unless absolute.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::types::{ClinicalField, Label, MetricId, Sex};

pub const SCHEMA_VERSION: u32 = 1;
const VERSION_PREFIX: &str = "#schema_version=";

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub label: Label,
    pub age: f64,
    pub sex: Sex,
    pub stroop: Option<f64>,
    pub sdmt: Option<f64>,
    pub cvlt: Option<f64>,
    pub fss: Option<f64>,
    pub volume_paths: BTreeMap<MetricId, PathBuf>,
    pub mask_path: PathBuf,
}

impl SubjectRecord {
    /// Clinical covariate as a feature value; sex is encoded M→0, F→1.
    pub fn clinical(&self, field: ClinicalField) -> Option<f64> {
        match field {
            ClinicalField::Age => Some(self.age),
            ClinicalField::Sex => Some(self.sex.encode()),
            ClinicalField::Stroop => self.stroop,
            ClinicalField::Sdmt => self.sdmt,
            ClinicalField::Cvlt => self.cvlt,
            ClinicalField::Fss => self.fss,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub schema_version: u32,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
    pub subjects: Vec<SubjectRecord>,
}

impl DatasetManifest {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn labels(&self) -> Vec<Label> {
        self.subjects.iter().map(|s| s.label).collect()
    }
}

fn bad(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedManifest {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn parse_opt(path: &Path, field: &str, s: &str) -> Result<Option<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| bad(path, format!("{field}: cannot parse {s:?} as a finite number")))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut schema_version = SCHEMA_VERSION;
    let mut body = text.as_str();
    if let Some(rest) = body.strip_prefix(VERSION_PREFIX) {
        let (line, tail) = rest.split_once('\n').unwrap_or((rest, ""));
        schema_version = line
            .trim()
            .parse()
            .map_err(|_| bad(path, format!("bad schema version {line:?}")))?;
        body = tail;
    }
    if schema_version != SCHEMA_VERSION {
        return Err(bad(path, format!("unsupported schema version {schema_version}")));
    }

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers = reader.headers()?.clone();

    let mut col: BTreeMap<&str, usize> = BTreeMap::new();
    let mut metric_cols = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        match h {
            "subject_id" | "label" | "age" | "sex" | "stroop" | "sdmt" | "cvlt" | "fss" | "mask" => {
                col.insert(h, i);
            }
            other => metric_cols.push((other.parse::<MetricId>()?, i)),
        }
    }
    for required in ["subject_id", "label", "age", "sex", "mask"] {
        if !col.contains_key(required) {
            return Err(bad(path, format!("missing required column {required:?}")));
        }
    }

    let mut seen = HashSet::new();
    let mut subjects = Vec::new();
    for row in reader.records() {
        let row = row?;
        let get = |name: &str| col.get(name).and_then(|&i| row.get(i)).unwrap_or("");
        let subject_id = get("subject_id").to_string();
        if subject_id.is_empty() {
            return Err(bad(path, "empty subject_id"));
        }
        if !seen.insert(subject_id.clone()) {
            return Err(Error::DuplicateSubject(subject_id));
        }
        let label: Label = get("label").parse()?;
        let age = parse_opt(path, "age", get("age"))?
            .ok_or_else(|| bad(path, format!("subject {subject_id:?}: age is required")))?;
        let sex: Sex = get("sex")
            .parse()
            .map_err(|_| bad(path, format!("subject {subject_id:?}: bad sex {:?}", get("sex"))))?;
        let mask = get("mask");
        if mask.is_empty() {
            return Err(bad(path, format!("subject {subject_id:?}: mask path is required")));
        }
        let volume_paths = metric_cols
            .iter()
            .filter_map(|&(m, i)| {
                let p = row.get(i).unwrap_or("");
                (!p.is_empty()).then(|| (m, PathBuf::from(p)))
            })
            .collect();
        subjects.push(SubjectRecord {
            stroop: parse_opt(path, "stroop", get("stroop"))?,
            sdmt: parse_opt(path, "sdmt", get("sdmt"))?,
            cvlt: parse_opt(path, "cvlt", get("cvlt"))?,
            fss: parse_opt(path, "fss", get("fss"))?,
            subject_id,
            label,
            age,
            sex,
            volume_paths,
            mask_path: PathBuf::from(mask),
        });
    }

    Ok(DatasetManifest {
        schema_version,
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        subjects,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes subjects in order; paths are written exactly as stored.
pub fn write_manifest(path: impl AsRef<Path>, subjects: &[SubjectRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("{VERSION_PREFIX}{SCHEMA_VERSION}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header = vec![
            "subject_id",
            "label",
            "age",
            "sex",
            "stroop",
            "sdmt",
            "cvlt",
            "fss",
            "mask",
        ];
        header.extend(MetricId::ALL.iter().map(|m| m.as_str()));
        w.write_record(&header)?;
        for s in subjects {
            let mut rec = vec![
                s.subject_id.clone(),
                s.label.to_string(),
                s.age.to_string(),
                format!("{:?}", s.sex),
                fmt_opt(s.stroop),
                fmt_opt(s.sdmt),
                fmt_opt(s.cvlt),
                fmt_opt(s.fss),
                s.mask_path.display().to_string(),
            ];
            rec.extend(MetricId::ALL.iter().map(|m| {
                s.volume_paths
                    .get(m)
                    .map(|p| p.display().to_string())
                    .unwrap_or_default()
            }));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
