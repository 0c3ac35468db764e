//! Phantom datasets with known class effects.
//!
//! Each subject gets a label mask built from axis-aligned region boxes and
//! one volume per metric. A voxel in region `r` of a subject in class `c`
//! takes the value
//!
//! ```text
//! mean(metric, r, c) + subject_offset(metric, r) + N(0, noise_sd)
//!     + amplitude(c) * sin(2π x / period(c) + φx) * sin(2π y / period(c) + φy)
//! ```
//!
//! where the sinusoid is present only for classes with a texture and only
//! inside labelled regions. Background voxels hold the metric's base value
//! plus noise. The phases φ are drawn per (subject, metric). When every
//! region's x-extent is a whole number of texture periods the texture adds
//! nothing to region means.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{write_manifest, write_mask, write_volume, Dataset, SubjectData, SubjectRecord};
use crate::seed::RngSeed;
use crate::types::{Label, MetricId, Region, Sex};
use crate::volume::{linear_index, voxel_count, Dims, MetricVolume, RoiMask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBox {
    pub region: Region,
    /// Inclusive lower corner.
    pub min: [usize; 3],
    /// Exclusive upper corner.
    pub max: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub metric: MetricId,
    pub region: Region,
    pub mtbi_mean: f64,
    pub control_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Texture {
    pub class: Label,
    pub amplitude: f64,
    /// Sinusoid period along x and y, in voxels.
    pub period: f64,
    /// Metrics carrying the texture; all generated metrics when empty.
    #[serde(default)]
    pub metrics: Vec<MetricId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub sd: f64,
}

impl Gaussian {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.sd == 0.0 {
            return self.mean;
        }
        Normal::new(self.mean, self.sd).expect("sd validated").sample(rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClinicalDistribution {
    pub age: Gaussian,
    pub p_female: f64,
    pub stroop: Gaussian,
    pub sdmt: Gaussian,
    pub cvlt: Gaussian,
    pub fss: Gaussian,
}

impl Default for ClinicalDistribution {
    fn default() -> Self {
        let g = |mean, sd| Gaussian { mean, sd };
        ClinicalDistribution {
            age: g(35.0, 10.0),
            p_female: 0.5,
            stroop: g(50.0, 10.0),
            sdmt: g(55.0, 10.0),
            cvlt: g(50.0, 10.0),
            fss: g(3.5, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhantomSpec {
    pub n_per_class: usize,
    pub dims: Dims,
    pub voxel_size_mm: [f64; 3],
    pub regions: Vec<RegionBox>,
    pub metrics: Vec<MetricId>,
    /// Value of every voxel without a configured effect.
    pub base: BTreeMap<MetricId, f64>,
    /// Per-voxel Gaussian noise.
    pub noise_sd: f64,
    /// Per-(subject, metric, region) Gaussian offset.
    pub subject_sd: f64,
    pub effects: Vec<Effect>,
    pub textures: Vec<Texture>,
    /// Draw per-(subject, metric) texture phases uniformly from [0, 2π).
    pub random_phase: bool,
    /// Make every region's voxel mean exactly equal to its configured
    /// class mean (plus subject offset) in every subject, by snapping
    /// values to a 2^-16 grid and re-centring the noise and texture within
    /// each region. Without this, region means only match in expectation.
    pub exact_region_means: bool,
    pub clinical_mtbi: ClinicalDistribution,
    pub clinical_control: ClinicalDistribution,
    /// Probability that each neurocognitive score is left missing.
    pub missing_rate: f64,
    pub seed: u64,
}

pub fn default_base_values() -> BTreeMap<MetricId, f64> {
    [
        (MetricId::MD, 0.8),
        (MetricId::FA, 0.45),
        (MetricId::MK, 1.0),
        (MetricId::AWF, 0.35),
        (MetricId::DA, 1.2),
        (MetricId::DePar, 2.0),
        (MetricId::DePer, 0.8),
    ]
    .into_iter()
    .collect()
}

/// Region boxes for a 32 × 32 × `nz` grid. Every x-extent is a multiple
/// of 8 voxels, and each box contains at least one centre of a 16 × 16
/// stride-8 patch.
pub fn default_layout(nz: usize) -> Vec<RegionBox> {
    let b = |region, x: [usize; 2], y: [usize; 2]| RegionBox {
        region,
        min: [x[0], y[0], 0],
        max: [x[1], y[1], nz],
    };
    vec![
        b(Region::Thalamus, [4, 28], [4, 12]),
        b(Region::PrefrontalWM, [4, 28], [13, 19]),
        b(Region::CCGenu, [4, 12], [20, 28]),
        b(Region::CCBody, [12, 20], [20, 28]),
        b(Region::CCSplenium, [20, 28], [20, 28]),
    ]
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            n_per_class: 10,
            dims: [32, 32, 8],
            voxel_size_mm: [2.5; 3],
            regions: default_layout(8),
            metrics: MetricId::ALL.to_vec(),
            base: default_base_values(),
            noise_sd: 0.02,
            subject_sd: 0.0,
            effects: Vec::new(),
            textures: Vec::new(),
            random_phase: true,
            exact_region_means: false,
            clinical_mtbi: ClinicalDistribution::default(),
            clinical_control: ClinicalDistribution::default(),
            missing_rate: 0.0,
            seed: 0,
        }
    }
}

impl PhantomSpec {
    /// Two imaging features, (AWF, CCBody) and (DePar, Thalamus), whose class
    /// means differ by `effect` voxel-noise standard deviations.
    pub fn mean_difference(n_per_class: usize, effect: f64, seed: u64) -> Self {
        let base = PhantomSpec {
            n_per_class,
            seed,
            ..Default::default()
        };
        let sigma = base.noise_sd;
        let effects = [(MetricId::AWF, Region::CCBody), (MetricId::DePar, Region::Thalamus)]
            .into_iter()
            .map(|(metric, region)| {
                let b = base.base[&metric];
                Effect {
                    metric,
                    region,
                    mtbi_mean: b - 0.5 * effect * sigma,
                    control_mean: b + 0.5 * effect * sigma,
                }
            })
            .collect();
        PhantomSpec {
            subject_sd: 0.5 * sigma,
            effects,
            ..base
        }
    }

    /// Region means identical in every subject; MTBI regions carry a
    /// period-4 texture, control regions a period-8 one. Covariates are
    /// constant, so the only class information is the texture.
    pub fn texture(n_per_class: usize, seed: u64) -> Self {
        let tex = |class, period| Texture {
            class,
            amplitude: 0.1,
            period,
            metrics: Vec::new(),
        };
        let flat = |mean| Gaussian { mean, sd: 0.0 };
        let clinical = ClinicalDistribution {
            age: flat(35.0),
            p_female: 0.0,
            stroop: flat(50.0),
            sdmt: flat(55.0),
            cvlt: flat(50.0),
            fss: flat(3.5),
        };
        PhantomSpec {
            n_per_class,
            seed,
            textures: vec![tex(Label::Mtbi, 4.0), tex(Label::Control, 8.0)],
            exact_region_means: true,
            clinical_mtbi: clinical.clone(),
            clinical_control: clinical,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_per_class == 0 {
            return bad("n_per_class must be positive".into());
        }
        if self.dims.contains(&0) {
            return bad("dims must be positive".into());
        }
        if !(self.noise_sd >= 0.0 && self.subject_sd >= 0.0) {
            return bad("noise standard deviations must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.missing_rate) {
            return bad("missing_rate must lie in [0, 1]".into());
        }
        for d in [&self.clinical_mtbi, &self.clinical_control] {
            let gs = [d.age, d.stroop, d.sdmt, d.cvlt, d.fss];
            if gs.iter().any(|g| !(g.sd >= 0.0 && g.mean.is_finite())) || !(0.0..=1.0).contains(&d.p_female) {
                return bad("invalid clinical distribution".into());
            }
        }
        for m in &self.metrics {
            if !self.base.contains_key(m) {
                return bad(format!("no base value for {m}"));
            }
        }
        for t in &self.textures {
            if !(t.period > 0.0 && t.amplitude.is_finite()) {
                return bad("texture period must be positive".into());
            }
        }
        for b in &self.regions {
            if b.region.is_composite() {
                return bad(format!("{} cannot be drawn as a box", b.region));
            }
            if (0..3).any(|a| b.min[a] >= b.max[a] || b.max[a] > self.dims[a]) {
                return Err(Error::SpecRegionOutOfBounds {
                    region: b.region,
                    extent: [b.min[0], b.min[1], b.min[2], b.max[0], b.max[1], b.max[2]],
                    dims: self.dims,
                });
            }
        }
        Ok(())
    }

    fn class_mean(&self, metric: MetricId, region: Region, class: Label) -> f64 {
        self.effects
            .iter()
            .rev()
            .find(|e| e.metric == metric && e.region == region)
            .map(|e| match class {
                Label::Mtbi => e.mtbi_mean,
                Label::Control => e.control_mean,
            })
            .unwrap_or(self.base[&metric])
    }

    pub fn subject_ids(&self) -> Vec<(String, Label)> {
        (0..2 * self.n_per_class)
            .map(|i| {
                let class = if i < self.n_per_class {
                    Label::Mtbi
                } else {
                    Label::Control
                };
                (format!("s{i:03}"), class)
            })
            .collect()
    }

    fn label_of(&self, region: Region) -> u32 {
        region.default_label().expect("atomic region")
    }

    pub fn build_mask(&self) -> Result<RoiMask> {
        let mut data = vec![0u32; voxel_count(self.dims)];
        for b in &self.regions {
            for z in b.min[2]..b.max[2] {
                for y in b.min[1]..b.max[1] {
                    for x in b.min[0]..b.max[0] {
                        data[linear_index(self.dims, x, y, z)] = self.label_of(b.region);
                    }
                }
            }
        }
        RoiMask::new(self.dims, self.voxel_size_mm, data, RoiMask::default_label_map())
    }
}

/// Grid for exact-mean mode. Values of magnitude below 2^7 on this grid are
/// exact in f32, and their sums over any volume are exact in f64.
const QUANTUM: f64 = 1.0 / 65536.0;

/// Snaps centres and deviations to [`QUANTUM`] and shifts deviations so
/// they sum to exactly zero within each label. Every label's voxel mean
/// then equals its (snapped) centre with no rounding error.
fn exact_mean_values(labels: &[u32], centre: &[f64], deviation: &[f64]) -> Vec<f32> {
    let mut units: Vec<i64> = deviation.iter().map(|d| (d / QUANTUM).round() as i64).collect();
    let mut members: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        members.entry(l).or_default().push(i);
    }
    for idx in members.values() {
        let n = idx.len() as i64;
        let total: i64 = idx.iter().map(|&i| units[i]).sum();
        let (q, r) = (total.div_euclid(n), total.rem_euclid(n));
        for (j, &i) in idx.iter().enumerate() {
            units[i] -= q + i64::from((j as i64) < r);
        }
    }
    centre
        .iter()
        .zip(&units)
        .map(|(&m, &u)| ((m / QUANTUM).round() as i64 + u) as f64 * QUANTUM)
        .map(|v| v as f32)
        .collect()
}

/// One generated subject, before it is written to disk.
#[derive(Debug, Clone)]
pub struct PhantomSubject {
    pub record: SubjectRecord,
    pub mask: RoiMask,
    pub volumes: Vec<MetricVolume>,
}

fn generate_subject(spec: &PhantomSpec, mask: &RoiMask, sid: &str, class: Label) -> Result<PhantomSubject> {
    let mut rng = RngSeed(spec.seed).derive(&format!("phantom/{sid}")).rng();
    let region_of: BTreeMap<u32, Region> = mask.label_map().iter().map(|(&r, &l)| (l, r)).collect();
    let textures: Vec<&Texture> = spec.textures.iter().filter(|t| t.class == class).collect();
    let noise = Gaussian {
        mean: 0.0,
        sd: spec.noise_sd,
    };
    let offset = Gaussian {
        mean: 0.0,
        sd: spec.subject_sd,
    };

    let mut volumes = Vec::with_capacity(spec.metrics.len());
    for &metric in &spec.metrics {
        let means: BTreeMap<Region, f64> = Region::ATOMIC
            .iter()
            .map(|&r| (r, spec.class_mean(metric, r, class) + offset.sample(&mut rng)))
            .collect();
        let active: Vec<(&Texture, [f64; 2])> = textures
            .iter()
            .filter(|t| t.metrics.is_empty() || t.metrics.contains(&metric))
            .map(|&t| {
                let mut phase = || {
                    if spec.random_phase {
                        rng.random::<f64>() * TAU
                    } else {
                        0.0
                    }
                };
                (t, [phase(), phase()])
            })
            .collect();
        let [nx, ny, nz] = spec.dims;
        let n_vox = voxel_count(spec.dims);
        let mut labels = Vec::with_capacity(n_vox);
        let mut centre = Vec::with_capacity(n_vox);
        let mut deviation = Vec::with_capacity(n_vox);
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    let label = mask.data()[linear_index(spec.dims, x, y, z)];
                    let (mu, tex) = match region_of.get(&label) {
                        Some(r) => {
                            let tex: f64 = active
                                .iter()
                                .map(|(t, [px, py])| {
                                    let w = TAU / t.period;
                                    t.amplitude * (w * x as f64 + px).sin() * (w * y as f64 + py).sin()
                                })
                                .sum();
                            (means[r], tex)
                        }
                        None => (spec.base[&metric], 0.0),
                    };
                    labels.push(label);
                    centre.push(mu);
                    deviation.push(tex + noise.sample(&mut rng));
                }
            }
        }
        let data = if spec.exact_region_means {
            exact_mean_values(&labels, &centre, &deviation)
        } else {
            centre.iter().zip(&deviation).map(|(m, d)| (m + d) as f32).collect()
        };
        volumes.push(MetricVolume::new(spec.dims, spec.voxel_size_mm, data, metric, sid)?);
    }

    let dist = match class {
        Label::Mtbi => &spec.clinical_mtbi,
        Label::Control => &spec.clinical_control,
    };
    let age = dist.age.sample(&mut rng);
    let sex = if rng.random::<f64>() < dist.p_female {
        Sex::F
    } else {
        Sex::M
    };
    let mut score = |g: &Gaussian| {
        let v = g.sample(&mut rng);
        let missing = spec.missing_rate > 0.0 && rng.random::<f64>() < spec.missing_rate;
        (!missing).then_some(v)
    };
    let (stroop, sdmt, cvlt, fss) = (
        score(&dist.stroop),
        score(&dist.sdmt),
        score(&dist.cvlt),
        score(&dist.fss),
    );

    let record = SubjectRecord {
        subject_id: sid.to_string(),
        label: class,
        age,
        sex,
        stroop,
        sdmt,
        cvlt,
        fss,
        volume_paths: spec
            .metrics
            .iter()
            .map(|&m| (m, PathBuf::from(format!("{sid}/{m}.vol"))))
            .collect(),
        mask_path: PathBuf::from(format!("{sid}/mask.roi")),
    };
    Ok(PhantomSubject {
        record,
        mask: mask.clone(),
        volumes,
    })
}

/// Generates every subject in memory, in parallel, in manifest order.
pub fn generate_subjects(spec: &PhantomSpec) -> Result<Vec<PhantomSubject>> {
    spec.validate()?;
    let mask = spec.build_mask()?;
    let ids = spec.subject_ids();
    crate::par::try_map(&ids, |(sid, class)| generate_subject(spec, &mask, sid, *class))
}

/// In-memory dataset, without touching the filesystem.
pub fn generate_dataset(spec: &PhantomSpec) -> Result<Dataset> {
    let subjects = generate_subjects(spec)?
        .into_iter()
        .map(|s| SubjectData {
            record: s.record,
            mask: s.mask,
            volumes: s.volumes.into_iter().map(|v| (v.metric(), v)).collect(),
        })
        .collect();
    Ok(Dataset { subjects })
}

#[derive(Debug, Serialize)]
struct GroundTruth<'a> {
    spec: &'a PhantomSpec,
    informative_region_means: Vec<String>,
    textured_classes: Vec<Label>,
    subjects: Vec<(String, Label)>,
}

/// Writes volumes, masks, `manifest.csv` and `ground_truth.json` under
/// `out_dir`. Returns the manifest path.
pub fn write_phantom(spec: &PhantomSpec, out_dir: impl AsRef<Path>) -> Result<PathBuf> {
    let out_dir = out_dir.as_ref();
    let subjects = generate_subjects(spec)?;
    for s in &subjects {
        let dir = out_dir.join(&s.record.subject_id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write_mask(out_dir.join(&s.record.mask_path), &s.mask)?;
        for v in &s.volumes {
            write_volume(out_dir.join(&s.record.volume_paths[&v.metric()]), v)?;
        }
    }
    let records: Vec<SubjectRecord> = subjects.iter().map(|s| s.record.clone()).collect();
    let manifest = out_dir.join("manifest.csv");
    write_manifest(&manifest, &records)?;

    let truth = GroundTruth {
        spec,
        informative_region_means: spec
            .effects
            .iter()
            .filter(|e| e.mtbi_mean != e.control_mean)
            .map(|e| format!("roi-mean/{}/{}", e.metric, e.region))
            .collect(),
        textured_classes: spec.textures.iter().map(|t| t.class).collect(),
        subjects: spec.subject_ids(),
    };
    let path = out_dir.join("ground_truth.json");
    let mut json = serde_json::to_vec_pretty(&truth)?;
    json.push(b'\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
