use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use mtbi_core::bow::{
    encode_dictionary, subject_histogram, write_histogram_rows, DictionarySet, PatchBank, HISTOGRAM_HEADER,
};
use mtbi_core::features::FeatureMatrix;
use mtbi_core::ingest::{read_manifest, validate_dataset, Dataset, DatasetManifest};
use mtbi_core::pipeline::{bow_features_from_bank, roi_feature_source, DictionaryMode};
use mtbi_core::selection::{greedy_forward_select, stratified_kfold, FeatureSource, FoldPlan, SelectionTrace};
use mtbi_core::svm::{encode_model, train_pipeline};
use mtbi_core::synthetic::{write_phantom, PhantomSpec};
use mtbi_core::{MetricId, RngSeed};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{hex, RunConfig};
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

/// Files written under one output directory, recorded for the run manifest.
pub struct Outputs {
    root: PathBuf,
    written: Vec<(String, String)>,
}

impl Outputs {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| mtbi_core::Error::io(&root, e))?;
        Ok(Outputs {
            root,
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| mtbi_core::Error::io(dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| mtbi_core::Error::io(&path, e))?;
        self.written.push((rel.to_string(), hex(&Sha256::digest(bytes))));
        Ok(path)
    }

    fn write_json(&mut self, rel: &str, value: &impl Serialize) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(mtbi_core::Error::from)?;
        bytes.push(b'\n');
        self.write(rel, &bytes)
    }

    fn write_matrix(&mut self, rel: &str, m: &FeatureMatrix) -> Result<PathBuf> {
        let mut buf = Vec::new();
        m.write_csv(&mut buf)?;
        self.write(rel, &buf)
    }

    fn write_dictionaries(&mut self, dir: &str, dicts: &DictionarySet) -> Result<()> {
        for ((metric, region), d) in dicts {
            self.write(&format!("{dir}/{metric}_{region}.dict"), &encode_dictionary(d))?;
        }
        Ok(())
    }

    /// `run_manifest.json`: the only output that carries wall-clock time.
    pub fn finish(mut self, command: &str, config_sha256: Option<String>, seed: u64, started: u64) -> Result<PathBuf> {
        let outputs: Vec<_> = self
            .written
            .iter()
            .map(|(path, sha256)| json!({ "path": path, "sha256": sha256 }))
            .collect();
        let manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config_sha256": config_sha256,
            "seed": seed,
            "threads": rayon::current_num_threads(),
            "started_unix": started,
            "finished_unix": unix_now(),
            "outputs": outputs,
        });
        self.write_json("run_manifest.json", &manifest)
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn required_metrics(cfg: &RunConfig) -> Vec<MetricId> {
    let mut set = BTreeSet::new();
    if cfg.approach.runs_roi() {
        set.extend(cfg.roi.metrics.iter().copied());
    }
    if cfg.approach.runs_bow() {
        set.extend(cfg.bow.metrics.iter().copied());
    }
    set.into_iter().collect()
}

pub fn validate(manifest_path: &Path, required: &[MetricId]) -> Result<DatasetManifest> {
    let manifest = read_manifest(manifest_path)?;
    let report = validate_dataset(&manifest, required);
    for issue in &report.issues {
        log::error!("{issue}");
        println!("{}", serde_json::to_string(issue).map_err(mtbi_core::Error::from)?);
    }
    if report.is_clean() {
        Ok(manifest)
    } else {
        Err(CliError::Invalid(report.issues.len()))
    }
}

pub fn phantom(spec: &PhantomSpec, out: &Path) -> Result<PathBuf> {
    let started = unix_now();
    let manifest = write_phantom(spec, out)?;
    let mut outputs = Outputs::new(out)?;
    outputs.write_json("phantom_spec.json", spec)?;
    outputs.finish("phantom", None, spec.seed, started)?;
    Ok(manifest)
}

/// Feature tables (and, for visual words, dictionaries) for one run.
pub struct Prepared {
    pub dataset: Dataset,
    pub plan: FoldPlan,
    pub roi: Option<FeatureSource>,
    pub bow: Option<(FeatureSource, PatchBank)>,
}

pub fn features(cfg: &RunConfig, out: &mut Outputs) -> Result<Prepared> {
    let metrics = required_metrics(cfg);
    let manifest = validate(cfg.dataset()?, &metrics)?;
    let dataset = Dataset::load(&manifest, &metrics)?;
    let seed = RngSeed(cfg.seed);
    let plan = stratified_kfold(&dataset.labels(), cfg.cv.folds, seed)?;

    let mut folds = String::from("subject_id,label,fold\n");
    for (s, f) in dataset.subjects.iter().zip(&plan.assignments) {
        folds.push_str(&format!("{},{},{f}\n", s.record.subject_id, s.record.label));
    }
    out.write("folds.csv", folds.as_bytes())?;

    let roi = if cfg.approach.runs_roi() {
        let source = roi_feature_source(&dataset, &cfg.roi)?;
        out.write_matrix("features/roi-means.csv", source.matrix(0))?;
        Some(source)
    } else {
        None
    };

    let bow = if cfg.approach.runs_bow() {
        let bank = PatchBank::extract(&dataset, &cfg.bow)?;
        let fitted = bow_features_from_bank(&dataset, &bank, &plan, &cfg.bow, cfg.dictionary_mode, seed)?;
        match &fitted.source {
            FeatureSource::Shared(m) => {
                out.write_matrix("features/bow.csv", m)?;
                out.write_dictionaries("dictionaries/shared", &fitted.dictionaries[0])?;
            }
            FeatureSource::PerFold(ms) => {
                for (f, (m, d)) in ms.iter().zip(&fitted.dictionaries).enumerate() {
                    out.write_matrix(&format!("features/bow/fold-{f:02}.csv"), m)?;
                    out.write_dictionaries(&format!("dictionaries/fold-{f:02}"), d)?;
                }
            }
        }
        Some((fitted.source, bank))
    } else {
        None
    };

    Ok(Prepared {
        dataset,
        plan,
        roi,
        bow,
    })
}

#[derive(Debug, Serialize)]
pub struct SelectionSummary {
    pub approach: &'static str,
    pub folds: usize,
    pub accuracy: f64,
    pub selected: Vec<String>,
}

fn record_selection(
    out: &mut Outputs,
    name: &'static str,
    cfg: &RunConfig,
    plan: &FoldPlan,
    trace: &SelectionTrace,
    final_matrix: &FeatureMatrix,
) -> Result<SelectionSummary> {
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    out.write(&format!("selection/{name}.csv"), &csv)?;

    let rows: Vec<Vec<Option<f64>>> = (0..final_matrix.n_rows())
        .map(|r| trace.subset.iter().map(|&c| final_matrix.get(r, c)).collect())
        .collect();
    let model = train_pipeline(&rows, final_matrix.labels(), &cfg.svm.resolve(trace.subset.len()))?;
    out.write(&format!("models/{name}.svm"), &encode_model(&model))?;

    let summary = SelectionSummary {
        approach: name,
        folds: plan.k,
        accuracy: trace.accuracy,
        selected: trace.steps.iter().map(|s| s.name.clone()).collect(),
    };
    out.write_json(
        &format!("selection/{name}.json"),
        &json!({
            "summary": summary,
            "steps": trace.steps.iter().map(|s| json!({
                "feature_index": s.feature,
                "feature_name": s.name,
                "cv_accuracy": s.accuracy,
            })).collect::<Vec<_>>(),
            "svm": cfg.svm,
            "accuracy_mode": cfg.cv.accuracy,
            "dictionary_mode": cfg.dictionary_mode,
            "model_converged": model.converged,
        }),
    )?;
    Ok(summary)
}

pub fn select(cfg: &RunConfig, out: &mut Outputs) -> Result<Vec<SelectionSummary>> {
    let prepared = features(cfg, out)?;
    let settings = cfg.cv_settings();
    let mut summaries = Vec::new();

    if let Some(source) = &prepared.roi {
        let all: Vec<usize> = (0..source.n_cols()).collect();
        let trace = greedy_forward_select(source, &all, &prepared.plan, &settings, cfg.cv.max_features)?;
        summaries.push(record_selection(
            out,
            "roi-means",
            cfg,
            &prepared.plan,
            &trace,
            source.matrix(0),
        )?);
    }
    if let Some((source, bank)) = &prepared.bow {
        let all: Vec<usize> = (0..source.n_cols()).collect();
        let trace = greedy_forward_select(source, &all, &prepared.plan, &settings, cfg.cv.max_features)?;
        // The deployable model uses dictionaries learned from every subject.
        let fitted = bow_features_from_bank(
            &prepared.dataset,
            bank,
            &prepared.plan,
            &cfg.bow,
            DictionaryMode::PaperFast,
            RngSeed(cfg.seed),
        )?;
        out.write_dictionaries("dictionaries/final", &fitted.dictionaries[0])?;
        summaries.push(record_selection(
            out,
            "bow",
            cfg,
            &prepared.plan,
            &trace,
            fitted.source.matrix(0),
        )?);
    }
    Ok(summaries)
}

/// Word histograms per subject and channel, using dictionaries learned from
/// every subject in the dataset.
pub fn histograms(cfg: &RunConfig, subjects: &[String], out: &mut Outputs) -> Result<usize> {
    let manifest = validate(cfg.dataset()?, &cfg.bow.metrics)?;
    let dataset = Dataset::load(&manifest, &cfg.bow.metrics)?;
    let ids = dataset.subject_ids();
    let rows: Vec<usize> = if subjects.is_empty() {
        (0..ids.len()).collect()
    } else {
        subjects
            .iter()
            .map(|s| {
                ids.iter()
                    .position(|i| i == s)
                    .ok_or_else(|| CliError::usage(format!("unknown subject {s}")))
            })
            .collect::<Result<_>>()?
    };
    let bank = PatchBank::extract(&dataset, &cfg.bow)?;
    let all: Vec<usize> = (0..ids.len()).collect();
    let dicts = mtbi_core::bow::fit_dictionaries(&bank, &all, &cfg.bow, RngSeed(cfg.seed))?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HISTOGRAM_HEADER).map_err(mtbi_core::Error::from)?;
    for &r in &rows {
        for ch in cfg.bow.channels() {
            let h = subject_histogram(&bank, r, &dicts, ch)?;
            write_histogram_rows(&mut w, &ids[r], &bank.labels[r].to_string(), &dicts[&ch], &h)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    out.write("histograms.csv", &bytes)?;
    out.write_dictionaries("dictionaries/shared", &dicts)?;
    Ok(rows.len())
}
