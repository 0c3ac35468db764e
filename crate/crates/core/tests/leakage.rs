//! Leakage-safe mode: nothing fitted for a fold may depend on that fold's
//! held-out subjects.

use mtbi_core::bow::{encode_dictionary, BowConfig, DictionarySet};
use mtbi_core::ingest::Dataset;
use mtbi_core::pipeline::{bow_feature_source, DictionaryMode};
use mtbi_core::selection::{fold_preprocessing, stratified_kfold, FeatureSource, FoldPlan};
use mtbi_core::synthetic::{generate_dataset, PhantomSpec};
use mtbi_core::{MetricId, MetricVolume, RngSeed};
use sha2::{Digest, Sha256};

fn digest_dicts(d: &DictionarySet) -> Vec<u8> {
    let mut h = Sha256::new();
    for dict in d.values() {
        h.update(encode_dictionary(dict));
    }
    h.finalize().to_vec()
}

fn digest_scaler(source: &FeatureSource, plan: &FoldPlan, fold: usize) -> Vec<u8> {
    let all: Vec<usize> = (0..source.n_cols()).collect();
    let s = fold_preprocessing(source, &all, plan, fold);
    let mut h = Sha256::new();
    for v in s.mean.iter().chain(&s.sd) {
        h.update(v.to_le_bytes());
    }
    h.finalize().to_vec()
}

fn scramble(ds: &mut Dataset, row: usize) {
    let s = &mut ds.subjects[row];
    for v in s.volumes.values_mut() {
        let data: Vec<f32> = v
            .data()
            .iter()
            .enumerate()
            .map(|(i, x)| x * 3.0 + (i % 7) as f32)
            .collect();
        *v = MetricVolume::new(v.dims(), v.voxel_size_mm(), data, v.metric(), v.subject_id()).unwrap();
    }
}

#[test]
fn held_out_voxels_do_not_reach_fitted_state() {
    let spec = PhantomSpec {
        dims: [32, 32, 2],
        regions: mtbi_core::synthetic::default_layout(2),
        metrics: vec![MetricId::FA, MetricId::MD],
        ..PhantomSpec::texture(6, 21)
    };
    let config = BowConfig {
        metrics: vec![MetricId::FA, MetricId::MD],
        ..Default::default()
    };
    let ds = generate_dataset(&spec).unwrap();
    let plan = stratified_kfold(&ds.labels(), 3, RngSeed(4)).unwrap();
    let seed = RngSeed(8);
    let base = bow_feature_source(&ds, &plan, &config, DictionaryMode::LeakageSafe, seed).unwrap();

    for fold in 0..plan.k {
        let mut mutated = ds.clone();
        for r in plan.test_rows(fold) {
            scramble(&mut mutated, r);
        }
        let after = bow_feature_source(&mutated, &plan, &config, DictionaryMode::LeakageSafe, seed).unwrap();
        assert_eq!(
            digest_dicts(&base.dictionaries[fold]),
            digest_dicts(&after.dictionaries[fold])
        );
        assert_eq!(
            digest_scaler(&base.source, &plan, fold),
            digest_scaler(&after.source, &plan, fold)
        );
        // The mutation is visible to every other fold, which trains on it.
        for other in (0..plan.k).filter(|&f| f != fold) {
            assert_ne!(
                digest_dicts(&base.dictionaries[other]),
                digest_dicts(&after.dictionaries[other])
            );
        }
    }
}

#[test]
fn paper_fast_mode_does_see_every_subject() {
    let spec = PhantomSpec {
        dims: [32, 32, 2],
        regions: mtbi_core::synthetic::default_layout(2),
        metrics: vec![MetricId::FA],
        ..PhantomSpec::texture(4, 2)
    };
    let config = BowConfig {
        metrics: vec![MetricId::FA],
        ..Default::default()
    };
    let ds = generate_dataset(&spec).unwrap();
    let plan = stratified_kfold(&ds.labels(), 2, RngSeed(0)).unwrap();
    let base = bow_feature_source(&ds, &plan, &config, DictionaryMode::PaperFast, RngSeed(1)).unwrap();
    let mut mutated = ds.clone();
    scramble(&mut mutated, plan.test_rows(0)[0]);
    let after = bow_feature_source(&mutated, &plan, &config, DictionaryMode::PaperFast, RngSeed(1)).unwrap();
    assert_ne!(
        digest_dicts(&base.dictionaries[0]),
        digest_dicts(&after.dictionaries[0])
    );
}
