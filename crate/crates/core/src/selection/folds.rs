use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::RngSeed;
use crate::types::Label;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index per subject row.
    pub assignments: Vec<usize>,
    pub seed: RngSeed,
}

impl FoldPlan {
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Shuffles each class with a seed-derived stream and deals its members
/// round-robin over the folds; the dealing position carries over from one
/// class to the next. If a class has fewer than `k` members the fold count
/// drops to that class size.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: RngSeed) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {k}")));
    }
    let by_class: Vec<Vec<usize>> = Label::BOTH
        .iter()
        .map(|&c| (0..labels.len()).filter(|&i| labels[i] == c).collect())
        .collect();
    let smallest = by_class.iter().map(Vec::len).min().unwrap_or(0);
    if smallest < 2 {
        return Err(Error::TooFewSubjects(format!(
            "each class needs at least 2 subjects, smallest has {smallest}"
        )));
    }
    let k_eff = k.min(smallest);
    if k_eff < k {
        log::warn!("reducing fold count from {k} to {k_eff}: smallest class has {smallest} subjects");
    }

    let mut rng = seed.derive("folds").rng();
    let mut assignments = vec![0; labels.len()];
    let mut next = 0;
    for mut members in by_class {
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = next % k_eff;
            next += 1;
        }
    }
    Ok(FoldPlan {
        k: k_eff,
        assignments,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cohort(n_mtbi: usize, n_control: usize) -> Vec<Label> {
        let mut v = vec![Label::Mtbi; n_mtbi];
        v.extend(vec![Label::Control; n_control]);
        v
    }

    fn class_counts(plan: &FoldPlan, labels: &[Label], class: Label) -> Vec<usize> {
        (0..plan.k)
            .map(|f| plan.test_rows(f).iter().filter(|&&i| labels[i] == class).count())
            .collect()
    }

    #[test]
    fn two_per_class_two_folds() {
        let labels = cohort(2, 2);
        let plan = stratified_kfold(&labels, 2, RngSeed(5)).unwrap();
        assert_eq!(class_counts(&plan, &labels, Label::Mtbi), vec![1, 1]);
        assert_eq!(class_counts(&plan, &labels, Label::Control), vec![1, 1]);
    }

    #[test]
    fn deterministic() {
        let labels = cohort(13, 9);
        assert_eq!(
            stratified_kfold(&labels, 5, RngSeed(1)).unwrap(),
            stratified_kfold(&labels, 5, RngSeed(1)).unwrap()
        );
    }

    #[test]
    fn cohort_of_109() {
        // 69 MTBI dealt over 10 folds: nine folds of 7 and one of 6.
        // 40 controls: 4 per fold.
        let labels = cohort(69, 40);
        let plan = stratified_kfold(&labels, 10, RngSeed(2024)).unwrap();
        let m = class_counts(&plan, &labels, Label::Mtbi);
        let c = class_counts(&plan, &labels, Label::Control);
        assert!(m.iter().all(|&x| x == 6 || x == 7), "{m:?}");
        assert_eq!(m.iter().filter(|&&x| x == 6).count(), 1);
        assert!(c.iter().all(|&x| x == 4), "{c:?}");
    }

    #[test]
    fn small_class_reduces_k() {
        let labels = cohort(10, 3);
        assert_eq!(stratified_kfold(&labels, 10, RngSeed(0)).unwrap().k, 3);
        assert!(matches!(
            stratified_kfold(&cohort(5, 1), 2, RngSeed(0)),
            Err(Error::TooFewSubjects(_))
        ));
    }

    proptest! {
        #[test]
        fn stratified_partition(n_m in 2usize..40, n_c in 2usize..40, k in 2usize..12, seed in any::<u64>()) {
            let labels = cohort(n_m, n_c);
            let plan = stratified_kfold(&labels, k, RngSeed(seed)).unwrap();
            prop_assert_eq!(plan.assignments.len(), labels.len());
            prop_assert!(plan.assignments.iter().all(|&f| f < plan.k));
            for (class, n) in [(Label::Mtbi, n_m), (Label::Control, n_c)] {
                let ideal = n as f64 / plan.k as f64;
                for cnt in class_counts(&plan, &labels, class) {
                    prop_assert!((cnt as f64 - ideal).abs() < 1.0 + 1e-9);
                }
            }
        }
    }
}
