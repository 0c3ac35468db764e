use std::io::Write;

use serde::Serialize;

use super::cv::{cv_accuracy, CvSettings, FeatureSource};
use super::folds::FoldPlan;
use crate::error::{Error, Result};
use crate::features::FeatureName;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionStep {
    pub feature: usize,
    pub name: String,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionTrace {
    pub steps: Vec<SelectionStep>,
    pub subset: Vec<usize>,
    pub accuracy: f64,
}

impl SelectionTrace {
    pub fn selected_names<'a>(&self, names: &'a [FeatureName]) -> Vec<&'a FeatureName> {
        self.subset.iter().map(|&i| &names[i]).collect()
    }

    /// `step,feature_index,feature_name,cv_accuracy`, one row per added feature.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["step", "feature_index", "feature_name", "cv_accuracy"])?;
        for (i, s) in self.steps.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                s.feature.to_string(),
                s.name.clone(),
                s.accuracy.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<selection trace>", e))?;
        Ok(())
    }
}

/// Greedy forward selection. Each round tries every remaining candidate
/// appended to the current subset and keeps the most accurate one (lowest
/// index on ties). Stops when no candidate strictly beats the current
/// accuracy or `max_size` features are chosen. The first round always adds
/// a feature.
pub fn greedy_forward_select(
    source: &FeatureSource,
    candidates: &[usize],
    plan: &FoldPlan,
    settings: &CvSettings,
    max_size: Option<usize>,
) -> Result<SelectionTrace> {
    if candidates.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut remaining: Vec<usize> = candidates.to_vec();
    remaining.sort_unstable();
    remaining.dedup();
    let limit = max_size.unwrap_or(usize::MAX).min(remaining.len());

    let mut subset: Vec<usize> = Vec::new();
    let mut steps = Vec::new();
    let mut current = f64::NEG_INFINITY;

    while subset.len() < limit {
        let scores = crate::par::try_map(&remaining, |&c| {
            let mut trial = subset.clone();
            trial.push(c);
            cv_accuracy(source, &trial, plan, settings)
        })?;
        // Ascending index order with strict comparison keeps the lowest index on ties.
        let (best_pos, best_acc) =
            scores.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |best, (i, &a)| if a > best.1 { (i, a) } else { best },
            );
        if best_acc <= current {
            break;
        }
        let feature = remaining.remove(best_pos);
        subset.push(feature);
        current = best_acc;
        log::debug!("selected {} (cv accuracy {best_acc})", source.names()[feature]);
        steps.push(SelectionStep {
            feature,
            name: source.names()[feature].to_string(),
            accuracy: best_acc,
        });
    }

    Ok(SelectionTrace {
        steps,
        subset,
        accuracy: current,
    })
}
