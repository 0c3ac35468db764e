//! Stratified cross-validation and greedy forward feature selection.

mod cv;
mod folds;
mod greedy;

pub use cv::{
    cv_accuracy, fold_preprocessing, fold_score, AccuracyMode, CvSettings, FeatureSource, FoldScore, KernelChoice,
    SvmSettings,
};
pub use folds::{stratified_kfold, FoldPlan};
pub use greedy::{greedy_forward_select, SelectionStep, SelectionTrace};
