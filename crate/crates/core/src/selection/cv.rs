use serde::{Deserialize, Serialize};

use super::folds::FoldPlan;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureName};
use crate::svm::{standardize_fit, train_pipeline, Kernel, Standardizer, SvmConfig};
use crate::types::Label;

/// Kernel choice with an automatic RBF width of 1 / (number of features).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelChoice {
    Linear,
    Rbf {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmSettings {
    pub c: f64,
    pub kernel: KernelChoice,
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SvmSettings {
    fn default() -> Self {
        SvmSettings {
            c: 1.0,
            kernel: KernelChoice::Rbf { gamma: None },
            tol: 1e-4,
            max_passes: 10_000,
        }
    }
}

impl SvmSettings {
    pub fn resolve(&self, n_features: usize) -> SvmConfig {
        let kernel = match self.kernel {
            KernelChoice::Linear => Kernel::Linear,
            KernelChoice::Rbf { gamma } => Kernel::Rbf {
                gamma: gamma.unwrap_or(1.0 / n_features.max(1) as f64),
            },
        };
        SvmConfig {
            c: self.c,
            kernel,
            tol: self.tol,
            max_passes: self.max_passes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccuracyMode {
    /// Total correct over total subjects.
    #[default]
    Pooled,
    /// Unweighted mean of per-fold accuracies.
    FoldMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvSettings {
    pub svm: SvmSettings,
    pub accuracy: AccuracyMode,
}

impl Default for CvSettings {
    fn default() -> Self {
        CvSettings {
            svm: SvmSettings::default(),
            accuracy: AccuracyMode::Pooled,
        }
    }
}

/// Feature values seen by each fold. Learned representations (visual-word
/// dictionaries) differ per fold in leakage-safe mode.
#[derive(Debug, Clone)]
pub enum FeatureSource {
    Shared(FeatureMatrix),
    PerFold(Vec<FeatureMatrix>),
}

impl FeatureSource {
    pub fn matrix(&self, fold: usize) -> &FeatureMatrix {
        match self {
            FeatureSource::Shared(m) => m,
            FeatureSource::PerFold(ms) => &ms[fold],
        }
    }

    fn first(&self) -> &FeatureMatrix {
        self.matrix(0)
    }

    pub fn names(&self) -> &[FeatureName] {
        self.first().names()
    }

    pub fn labels(&self) -> &[Label] {
        self.first().labels()
    }

    pub fn n_cols(&self) -> usize {
        self.first().n_cols()
    }

    pub fn n_rows(&self) -> usize {
        self.first().n_rows()
    }
}

pub(crate) fn subset_rows(m: &FeatureMatrix, rows: &[usize], subset: &[usize]) -> Vec<Vec<Option<f64>>> {
    rows.iter()
        .map(|&r| subset.iter().map(|&c| m.get(r, c)).collect())
        .collect()
}

/// Imputation/standardization parameters fit on a fold's training rows.
pub fn fold_preprocessing(source: &FeatureSource, subset: &[usize], plan: &FoldPlan, fold: usize) -> Standardizer {
    let m = source.matrix(fold);
    standardize_fit(&subset_rows(m, &plan.train_rows(fold), subset))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldScore {
    pub correct: usize,
    pub total: usize,
}

/// Held-out predictions for one fold.
pub fn fold_score(
    source: &FeatureSource,
    subset: &[usize],
    plan: &FoldPlan,
    settings: &CvSettings,
    fold: usize,
) -> Result<FoldScore> {
    let m = source.matrix(fold);
    let train = plan.train_rows(fold);
    let test = plan.test_rows(fold);
    let labels = m.labels();
    let x_train = subset_rows(m, &train, subset);
    let y_train: Vec<Label> = train.iter().map(|&r| labels[r]).collect();
    let model = train_pipeline(&x_train, &y_train, &settings.svm.resolve(subset.len()))?;
    let mut correct = 0;
    for (row, &r) in subset_rows(m, &test, subset).iter().zip(&test) {
        if model.predict_partial(row)? == labels[r] {
            correct += 1;
        }
    }
    Ok(FoldScore {
        correct,
        total: test.len(),
    })
}

/// Cross-validated accuracy of an SVM restricted to `subset` columns.
pub fn cv_accuracy(source: &FeatureSource, subset: &[usize], plan: &FoldPlan, settings: &CvSettings) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(&bad) = subset.iter().find(|&&c| c >= source.n_cols()) {
        return Err(Error::DimMismatch(format!("feature index {bad} out of range")));
    }
    if plan.assignments.len() != source.n_rows() {
        return Err(Error::DimMismatch("fold plan and feature table sizes differ".into()));
    }
    let scores = crate::par::try_map_range(plan.k, |f| fold_score(source, subset, plan, settings, f))?;
    Ok(match settings.accuracy {
        AccuracyMode::Pooled => {
            let correct: usize = scores.iter().map(|s| s.correct).sum();
            let total: usize = scores.iter().map(|s| s.total).sum();
            correct as f64 / total as f64
        }
        AccuracyMode::FoldMean => {
            scores.iter().map(|s| s.correct as f64 / s.total as f64).sum::<f64>() / scores.len() as f64
        }
    })
}
