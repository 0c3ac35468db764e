//! Classification of mild traumatic brain injury from diffusion MRI
//! parametric maps.
//!
//! Two feature pipelines share one model-selection back end:
//!
//! * [`roi`]: mean of each metric inside each anatomical region, plus
//!   demographic and neurocognitive covariates (41 columns by default);
//! * [`bow`]: 16 × 16 axial patches clustered per class into visual words,
//!   each subject encoded as word histograms (206 columns by default).
//!
//! Both feed [`selection::greedy_forward_select`], which wraps a
//! soft-margin [`svm`] in stratified cross-validation.
//!
//! Data-parallel loops (per subject, per fold, per candidate feature) run
//! on rayon when the `parallel` feature is enabled; reductions are done in
//! a fixed order so outputs do not depend on the thread count.

pub mod bow;
pub mod error;
pub mod features;
pub mod ingest;
pub mod par;
pub mod pipeline;
pub mod roi;
pub mod seed;
pub mod selection;
pub mod svm;
pub mod synthetic;
pub mod types;
pub mod volume;

pub use error::{Error, Result};
pub use features::{FeatureMatrix, FeatureName};
pub use seed::{derive_seed, RngSeed};
pub use types::{ClinicalField, Label, MetricId, Region, Sex};
pub use volume::{MetricVolume, RoiMask};
