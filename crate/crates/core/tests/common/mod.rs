//! Reference implementations used as test oracles. Deliberately naive:
//! projected gradient for the SVM dual, brute-force enumeration for
//! clustering and subset selection.

#![allow(dead_code)]

use mtbi_core::features::{FeatureMatrix, FeatureName};
use mtbi_core::selection::{cv_accuracy, CvSettings, FeatureSource, FoldPlan};
use mtbi_core::types::{Label, MetricId, Region};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Standard normal via Box–Muller; independent of the crate's generators.
pub fn normal(rng: &mut SplitMix64) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn gram(rows: &[Vec<f64>], k: impl Fn(&[f64], &[f64]) -> f64) -> Vec<f64> {
    let n = rows.len();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = k(&rows[i], &rows[j]);
        }
    }
    g
}

pub fn rbf(gamma: f64) -> impl Fn(&[f64], &[f64]) -> f64 {
    move |a, b| {
        let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        (-gamma * d).exp()
    }
}

pub fn linear(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dual(g: &[f64], y: &[f64], a: &[f64]) -> f64 {
    let n = y.len();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            q += a[i] * a[j] * y[i] * y[j] * g[i * n + j];
        }
    }
    a.iter().sum::<f64>() - 0.5 * q
}

/// Euclidean projection onto {0 ≤ α ≤ C, yᵀα = 0} by bisection on the
/// hyperplane multiplier.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lam: f64| -> Vec<f64> {
        v.iter()
            .zip(y)
            .map(|(&vi, &yi)| (vi - lam * yi).clamp(0.0, c))
            .collect()
    };
    let h = |lam: f64| -> f64 { at(lam).iter().zip(y).map(|(a, yi)| a * yi).sum() };
    let span = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Maximizes the soft-margin dual by accelerated projected gradient ascent.
pub fn qp_oracle(g: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * g[i * n + j];
    // Lipschitz bound: Gershgorin on Q.
    let l = (0..n)
        .map(|i| (0..n).map(|j| q(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12);
    let grad = |a: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| 1.0 - (0..n).map(|j| q(i, j) * a[j]).sum::<f64>())
            .collect()
    };
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    let mut best = a.clone();
    let mut best_obj = dual(g, y, &a);
    for _ in 0..200_000 {
        let gz = grad(&z);
        let step: Vec<f64> = z.iter().zip(&gz).map(|(zi, gi)| zi + gi / l).collect();
        let next = project(&step, y, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_next;
        z = next.iter().zip(&a).map(|(n, o)| n + mom * (n - o)).collect();
        let moved: f64 = next.iter().zip(&a).map(|(n, o)| (n - o).abs()).sum();
        a = next;
        t = t_next;
        let obj = dual(g, y, &a);
        if obj > best_obj {
            best_obj = obj;
            best = a.clone();
        } else {
            // Restart momentum when the objective stalls.
            z = a.clone();
            t = 1.0;
        }
        if moved < 1e-15 {
            break;
        }
    }
    best
}

/// Offset from the free support vectors, falling back to the midpoint of
/// the feasible interval.
pub fn oracle_bias(g: &[f64], y: &[f64], a: &[f64], c: f64) -> f64 {
    let n = y.len();
    let f = |i: usize| (0..n).map(|j| a[j] * y[j] * g[j * n + i]).sum::<f64>();
    let tol = 1e-8 * c;
    let free: Vec<f64> = (0..n)
        .filter(|&i| a[i] > tol && a[i] < c - tol)
        .map(|i| y[i] - f(i))
        .collect();
    if !free.is_empty() {
        return free.iter().sum::<f64>() / free.len() as f64;
    }
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let r = y[i] - f(i);
        let at_upper = a[i] >= c - tol;
        // y_i f(x_i) ≥ 1 for α = 0, ≤ 1 for α = C.
        if (y[i] > 0.0) != at_upper {
            lo = lo.max(r);
        } else {
            hi = hi.min(r);
        }
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        (false, true) => hi,
        _ => 0.0,
    }
}

/// Minimum within-cluster sum of squares over every partition of `points`
/// into exactly `k` non-empty clusters.
pub fn exhaustive_kmeans_optimum(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    let mut assign = vec![0usize; n];
    loop {
        let mut used = vec![false; k];
        assign.iter().for_each(|&a| used[a] = true);
        if used.iter().all(|&u| u) {
            let mut sse = 0.0;
            for c in 0..k {
                let members: Vec<&Vec<f64>> = (0..n).filter(|&i| assign[i] == c).map(|i| &points[i]).collect();
                let d = members[0].len();
                let centre: Vec<f64> = (0..d)
                    .map(|j| members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64)
                    .collect();
                sse += members
                    .iter()
                    .map(|p| p.iter().zip(&centre).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
                    .sum::<f64>();
            }
            best = best.min(sse);
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            assign[i] += 1;
            if assign[i] < k {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
    }
}

/// Best cross-validated accuracy over every non-empty subset of `candidates`.
pub fn exhaustive_subset_accuracy(
    source: &FeatureSource,
    candidates: &[usize],
    plan: &FoldPlan,
    settings: &CvSettings,
) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for mask in 1u32..(1 << candidates.len()) {
        let subset: Vec<usize> = (0..candidates.len())
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| candidates[b])
            .collect();
        best = best.max(cv_accuracy(source, &subset, plan, settings).unwrap());
    }
    best
}

/// `n_per_class` subjects per class; column `informative` equals ±1 by class
/// (plus small jitter), every other column is standard normal noise.
pub fn separable_table(n_per_class: usize, n_cols: usize, informative: usize, seed: u64) -> FeatureMatrix {
    let mut r = rng(seed);
    let n = 2 * n_per_class;
    let labels: Vec<Label> = (0..n)
        .map(|i| if i < n_per_class { Label::Mtbi } else { Label::Control })
        .collect();
    let mut values = Vec::with_capacity(n * n_cols);
    for l in &labels {
        for c in 0..n_cols {
            let v = if c == informative {
                l.sign() + 0.1 * normal(&mut r)
            } else {
                normal(&mut r)
            };
            values.push(Some(v));
        }
    }
    let names = (0..n_cols)
        .map(|c| FeatureName::BowWord {
            metric: MetricId::FA,
            region: Region::Thalamus,
            word: c,
        })
        .collect();
    FeatureMatrix::new((0..n).map(|i| format!("s{i:03}")).collect(), labels, names, values).unwrap()
}
