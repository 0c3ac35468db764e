//! Lloyd's k-means with k-means++ seeding.

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::RngSeed;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    /// Objective (sum of squared distances to the assigned centroid) after
    /// the initial assignment and after every accepted Lloyd step.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

impl KMeansResult {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace is never empty")
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid (lowest index on ties) and its squared
/// distance.
pub(crate) fn nearest<C: AsRef<[f64]>>(point: &[f64], centroids: &[C]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c.as_ref());
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign<P: AsRef<[f64]> + Sync>(points: &[P], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let pairs = crate::par::map(points, |p| nearest(p.as_ref(), centroids));
    // Sequential reduction keeps the objective independent of thread count.
    let objective = pairs.iter().map(|&(_, d)| d).sum();
    (pairs.into_iter().map(|(j, _)| j).collect(), objective)
}

fn plus_plus_init<P: AsRef<[f64]> + Sync>(points: &[P], k: usize, seed: RngSeed) -> Vec<Vec<f64>> {
    let mut rng = seed.rng();
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first].as_ref().to_vec()];
    let mut d2: Vec<f64> = crate::par::map(points, |p| sq_dist(p.as_ref(), &centroids[0]));

    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` past the last partial sum.
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            // Fewer distinct points than k: take unused points in order.
            (0..n).find(|&i| !chosen[i]).unwrap()
        };
        chosen[pick] = true;
        let c = points[pick].as_ref().to_vec();
        let upd = crate::par::map(points, |p| sq_dist(p.as_ref(), &c));
        for (d, u) in d2.iter_mut().zip(upd) {
            if u < *d {
                *d = u;
            }
        }
        centroids.push(c);
    }
    centroids
}

fn update<P: AsRef<[f64]>>(points: &[P], assignment: &[usize], old: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = old.len();
    let dim = old[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &j) in points.iter().zip(assignment) {
        counts[j] += 1;
        for (s, v) in sums[j].iter_mut().zip(p.as_ref()) {
            *s += v;
        }
    }
    let mut centroids: Vec<Vec<f64>> = sums
        .into_iter()
        .zip(&counts)
        .zip(old)
        .map(|((s, &c), o)| {
            if c == 0 {
                o.clone()
            } else {
                s.into_iter().map(|v| v / c as f64).collect()
            }
        })
        .collect();

    // Empty clusters move to the point farthest from its own centroid.
    let mut taken = vec![false; points.len()];
    for j in (0..k).filter(|&j| counts[j] == 0) {
        let far = points
            .iter()
            .enumerate()
            .filter(|(i, _)| !taken[*i])
            .map(|(i, p)| (i, sq_dist(p.as_ref(), &centroids[assignment[i]])))
            .fold(None::<(usize, f64)>, |best, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        if let Some((i, _)) = far {
            taken[i] = true;
            centroids[j] = points[i].as_ref().to_vec();
        }
    }
    centroids
}

/// Clusters `points` into `k` groups. Stops when the relative objective
/// improvement drops to `tol` or after `max_iter` Lloyd steps. The final
/// assignment maps every point to its nearest final centroid.
pub fn kmeans<P: AsRef<[f64]> + Sync>(
    points: &[P],
    k: usize,
    seed: RngSeed,
    max_iter: usize,
    tol: f64,
) -> Result<KMeansResult> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be positive".into()));
    }
    if points.len() < k {
        return Err(Error::TooFewPoints {
            needed: k,
            got: points.len(),
            class: None,
        });
    }
    let dim = points[0].as_ref().len();
    if points.iter().any(|p| p.as_ref().len() != dim) {
        return Err(Error::DimMismatch("points differ in dimension".into()));
    }

    let mut centroids = plus_plus_init(points, k, seed);
    let (mut assignment, mut objective) = assign(points, &centroids);
    let mut trace = vec![objective];
    let mut iterations = 0;

    while iterations < max_iter && objective > 0.0 {
        let next = update(points, &assignment, &centroids);
        let (next_assignment, next_objective) = assign(points, &next);
        iterations += 1;
        if next_objective > objective {
            // Only reachable through rounding; keep the previous fixed point.
            break;
        }
        let improvement = objective - next_objective;
        centroids = next;
        assignment = next_assignment;
        objective = next_objective;
        trace.push(objective);
        if improvement <= tol * trace[trace.len() - 2] {
            break;
        }
    }

    Ok(KMeansResult {
        centroids,
        assignment,
        objective_trace: trace,
        iterations,
    })
}
