//! Silhouette coefficient and silhouette-driven choice of k.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans_with, KMeansConfig, KMeansFit};
use super::{check_points, euclidean, ClusterError};
use crate::scalar::Scalar;

fn cluster_count(labels: &[usize]) -> Result<usize, ClusterError> {
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    if k < 2 {
        return Err(ClusterError::TooFewClusters(k));
    }
    let mut seen = vec![false; k];
    labels.iter().for_each(|&l| seen[l] = true);
    if let Some(empty) = seen.iter().position(|&s| !s) {
        return Err(ClusterError::EmptyCluster(empty));
    }
    Ok(k)
}

/// Per-row silhouette values.
///
/// Rows in singleton clusters score 0, as do rows with `a = b = 0`.
pub fn silhouette_samples<T: Scalar, P: AsRef<[T]>>(
    points: &[P],
    labels: &[usize],
) -> Result<Vec<T>, ClusterError> {
    check_points(points)?;
    if labels.len() != points.len() {
        return Err(ClusterError::LabelMismatch {
            labels: labels.len(),
            rows: points.len(),
        });
    }
    let k = cluster_count(labels)?;
    let mut sizes = vec![0usize; k];
    labels.iter().for_each(|&l| sizes[l] += 1);

    let mut out = Vec::with_capacity(points.len());
    let mut sums = vec![T::zero(); k];
    for (i, p) in points.iter().enumerate() {
        sums.iter_mut().for_each(|s| *s = T::zero());
        for (j, q) in points.iter().enumerate() {
            if i != j {
                sums[labels[j]] = sums[labels[j]] + euclidean(p.as_ref(), q.as_ref());
            }
        }
        let own = labels[i];
        if sizes[own] == 1 {
            out.push(T::zero());
            continue;
        }
        let a = sums[own] / T::of_usize(sizes[own] - 1);
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / T::of_usize(sizes[c]))
            .fold(T::infinity(), T::min);
        let denom = a.max(b);
        out.push(if denom > T::zero() {
            (b - a) / denom
        } else {
            T::zero()
        });
    }
    Ok(out)
}

/// Mean silhouette over all rows, in `[-1, 1]`.
pub fn silhouette<T: Scalar, P: AsRef<[T]>>(
    points: &[P],
    labels: &[usize],
) -> Result<T, ClusterError> {
    let samples = silhouette_samples(points, labels)?;
    let sum: T = samples.iter().copied().sum();
    Ok(sum / T::of_usize(samples.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KScore<T> {
    pub k: usize,
    pub silhouette: T,
    pub wcss: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSelection<T> {
    pub best_k: usize,
    pub table: Vec<KScore<T>>,
    pub best_fit: KMeansFit<T>,
}

/// Runs k-means for every k in range and keeps the silhouette maximum,
/// ties to the smaller k.
pub fn select_k<T: Scalar, P: AsRef<[T]> + Sync>(
    points: &[P],
    k_range: RangeInclusive<usize>,
    seed: u64,
    restarts: usize,
) -> Result<KSelection<T>, ClusterError> {
    let n = points.len();
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo < 2 {
        return Err(ClusterError::TooFewClusters(lo));
    }
    if lo > hi || hi > n {
        return Err(ClusterError::InvalidK { k: hi, n });
    }
    let mut table = Vec::new();
    let mut best: Option<(T, KMeansFit<T>)> = None;
    for k in k_range {
        let fit = kmeans_with(points, &KMeansConfig::new(k).seed(seed).restarts(restarts))?;
        let s = silhouette(points, &fit.labels)?;
        table.push(KScore {
            k,
            silhouette: s,
            wcss: fit.wcss,
        });
        if best.as_ref().is_none_or(|(bs, _)| s > *bs) {
            best = Some((s, fit));
        }
    }
    let (_, best_fit) = best.expect("non-empty range");
    Ok(KSelection {
        best_k: best_fit.centroids.len(),
        table,
        best_fit,
    })
}
