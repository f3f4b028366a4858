//! Lloyd's k-means with k-means++ seeding and deterministic restarts,
//! finished with Hartigan single-point transfers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_points, sq_dist, ClusterError};
use crate::scalar::{cmp_scalar, Scalar};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            seed: DEFAULT_SEED,
            restarts: DEFAULT_RESTARTS,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit<T> {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<T>>,
    /// Within-cluster sum of squared Euclidean distances.
    pub wcss: T,
    pub iterations: usize,
    /// Index of the restart that produced this fit.
    pub restart: usize,
    /// WCSS after every assignment/update round of the winning restart.
    pub wcss_trace: Vec<T>,
}

/// Best of `restarts` Lloyd runs by WCSS, ties to the earlier restart.
pub fn kmeans<T: Scalar, P: AsRef<[T]> + Sync>(
    points: &[P],
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<KMeansFit<T>, ClusterError> {
    kmeans_with(points, &KMeansConfig::new(k).seed(seed).restarts(restarts))
}

pub fn kmeans_with<T: Scalar, P: AsRef<[T]> + Sync>(
    points: &[P],
    config: &KMeansConfig,
) -> Result<KMeansFit<T>, ClusterError> {
    let n = points.len();
    check_points(points)?;
    if config.k == 0 || config.k > n {
        return Err(ClusterError::InvalidK { k: config.k, n });
    }
    let restarts = config.restarts.max(1);
    let fits: Vec<KMeansFit<T>> = (0..restarts)
        .into_par_iter()
        .map(|r| single_run(points, config, r))
        .collect();
    Ok(fits
        .into_iter()
        .min_by(|a, b| cmp_scalar(&a.wcss, &b.wcss).then(a.restart.cmp(&b.restart)))
        .expect("at least one restart"))
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// k-means++ seeding: each new centre drawn with probability proportional to
/// its squared distance from the nearest chosen centre.
fn plus_plus_init<T: Scalar, P: AsRef<[T]>>(
    points: &[P],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<T>> {
    let n = points.len();
    let mut centroids = vec![points[rng.random_range(0..n)].as_ref().to_vec()];
    let mut nearest: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p.as_ref(), &centroids[0]).as_f64())
        .collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick].as_ref().to_vec();
        for (slot, p) in nearest.iter_mut().zip(points) {
            *slot = slot.min(sq_dist(p.as_ref(), &c).as_f64());
        }
        centroids.push(c);
    }
    centroids
}

/// Nearest centroid per point, ties to the lower index.
fn assign<T: Scalar, P: AsRef<[T]>>(points: &[P], centroids: &[Vec<T>]) -> Vec<usize> {
    points
        .iter()
        .map(|p| {
            let mut best = 0;
            let mut best_d = sq_dist(p.as_ref(), &centroids[0]);
            for (j, c) in centroids.iter().enumerate().skip(1) {
                let d = sq_dist(p.as_ref(), c);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

fn means<T: Scalar, P: AsRef<[T]>>(points: &[P], labels: &[usize], k: usize) -> Vec<Vec<T>> {
    let dim = points[0].as_ref().len();
    let mut sums = vec![vec![T::zero(); dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, &v) in sums[l].iter_mut().zip(p.as_ref()) {
            *s = *s + v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            let c = T::of_usize(c);
            s.iter_mut().for_each(|v| *v = *v / c);
        }
    }
    sums
}

/// Moves the point farthest from its centroid into each empty cluster.
fn reseed_empty<T: Scalar, P: AsRef<[T]>>(
    points: &[P],
    labels: &mut [usize],
    centroids: &[Vec<T>],
    k: usize,
) {
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far: Option<(usize, T)> = None;
        for (i, p) in points.iter().enumerate() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let d = sq_dist(p.as_ref(), &centroids[labels[i]]);
            if far.is_none_or(|(_, fd)| d > fd) {
                far = Some((i, d));
            }
        }
        let (i, _) = far.expect("k <= n guarantees a donor cluster");
        labels[i] = empty;
    }
}

pub(crate) fn wcss<T: Scalar, P: AsRef<[T]>>(
    points: &[P],
    labels: &[usize],
    centroids: &[Vec<T>],
) -> T {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| sq_dist(p.as_ref(), &centroids[l]))
        .sum()
}

/// Single-point transfers after Lloyd has settled. A point leaves cluster `i`
/// for `j` when `n_j/(n_j+1)·d(x,c_j) < n_i/(n_i-1)·d(x,c_i)`, which lowers
/// the WCSS strictly; the end state is still a nearest-centroid fixpoint.
/// Returns whether any point moved.
fn hartigan_pass<T: Scalar, P: AsRef<[T]>>(
    points: &[P],
    labels: &mut [usize],
    centroids: &mut Vec<Vec<T>>,
    max_sweeps: usize,
) -> bool {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    labels.iter().for_each(|&l| counts[l] += 1);
    let mut moved_any = false;
    for _ in 0..max_sweeps {
        let mut moved = false;
        for (x, p) in points.iter().enumerate() {
            let i = labels[x];
            if counts[i] < 2 {
                continue;
            }
            let p = p.as_ref();
            let ni = T::of_usize(counts[i]);
            let leave = ni / (ni - T::one()) * sq_dist(p, &centroids[i]);
            let mut best: Option<(usize, T)> = None;
            for j in (0..k).filter(|&j| j != i) {
                let nj = T::of_usize(counts[j]);
                let join = nj / (nj + T::one()) * sq_dist(p, &centroids[j]);
                if best.is_none_or(|(_, b)| join < b) {
                    best = Some((j, join));
                }
            }
            let Some((j, join)) = best else { continue };
            if join < leave * (T::one() - T::lit(1e-12)) {
                labels[x] = j;
                counts[i] -= 1;
                counts[j] += 1;
                *centroids = means(points, labels, k);
                moved = true;
            }
        }
        moved_any |= moved;
        if !moved {
            break;
        }
    }
    moved_any
}

fn single_run<T: Scalar, P: AsRef<[T]>>(
    points: &[P],
    config: &KMeansConfig,
    restart: usize,
) -> KMeansFit<T> {
    let k = config.k;
    let mut rng = restart_rng(config.seed, restart);
    let init = plus_plus_init(points, k, &mut rng);
    let mut labels = assign(points, &init);
    reseed_empty(points, &mut labels, &init, k);
    let mut centroids = means(points, &labels, k);
    let mut trace = vec![wcss(points, &labels, &centroids)];
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        let mut next = assign(points, &centroids);
        reseed_empty(points, &mut next, &centroids, k);
        let converged = next == labels;
        labels = next;
        centroids = means(points, &labels, k);
        trace.push(wcss(points, &labels, &centroids));
        if converged {
            break;
        }
    }
    if hartigan_pass(points, &mut labels, &mut centroids, config.max_iter) {
        trace.push(wcss(points, &labels, &centroids));
    }
    KMeansFit {
        wcss: *trace.last().expect("non-empty trace"),
        labels,
        centroids,
        iterations,
        restart,
        wcss_trace: trace,
    }
}
