//! Clustering of 24-hour profiles: k-means with silhouette-driven k, and
//! Ward linkage over Spearman dissimilarities.

mod agreement;
mod kmeans;
mod profiles;
mod report;
mod silhouette;
mod spearman;
mod ward;

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::DayType;
use crate::profile::{normalize_values, Period, ProfileKey, ProfileSet, HOURS};
use crate::scalar::Scalar;

pub use agreement::{adjusted_rand_index, purity};
pub use kmeans::{
    kmeans, kmeans_with, KMeansConfig, KMeansFit, DEFAULT_MAX_ITER, DEFAULT_RESTARTS, DEFAULT_SEED,
};
pub use profiles::{cluster_profiles, ClusterProfile, Composition};
pub use report::{write_cluster_json, write_dendrogram_csv, write_silhouette_csv, ClusterReport};
pub use silhouette::{select_k, silhouette, silhouette_samples, KScore, KSelection};
pub use spearman::{average_ranks, spearman_distance_matrix, spearman_rho, DistanceMatrix};
pub use ward::{cut_dendrogram, ward_hclust, Dendrogram, Merge};

pub const DEFAULT_MONTH: u8 = 5;
pub const DEFAULT_K_RANGE: RangeInclusive<usize> = 2..=10;
pub const DEFAULT_WARD_K: usize = 6;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("no rows to cluster")]
    EmptyInput,
    #[error("row {row} has {found} values, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("row {0} contains a non-finite value")]
    NonFinite(usize),
    #[error("vectors differ in length: {expected} vs {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("k = {k} is out of range for {n} rows")]
    InvalidK { k: usize, n: usize },
    #[error("k must be ≥ 2 for silhouette")]
    TooFewClusters(usize),
    #[error("cluster {0} has no members")]
    EmptyCluster(usize),
    #[error("{labels} labels for {rows} rows")]
    LabelMismatch { labels: usize, rows: usize },
    #[error("row {0} is constant; rank correlation is undefined")]
    ConstantRow(usize),
    #[error("distance matrix needs {n}x{n} entries, got {len}")]
    NotSquare { n: usize, len: usize },
    #[error("distance matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("distance matrix has a non-zero diagonal at row {0}")]
    NonZeroDiagonal(usize),
    #[error("distance ({i}, {j}) is negative or non-finite")]
    InvalidDistance { i: usize, j: usize },
    #[error("period {0} is not present in the profile set")]
    MissingPeriod(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Rows must be non-empty, equally long and finite.
pub(crate) fn check_points<T: Scalar, P: AsRef<[T]>>(points: &[P]) -> Result<(), ClusterError> {
    let Some(first) = points.first() else {
        return Err(ClusterError::EmptyInput);
    };
    let dim = first.as_ref().len();
    for (row, p) in points.iter().enumerate() {
        let p = p.as_ref();
        if p.len() != dim {
            return Err(ClusterError::RaggedRow {
                row,
                found: p.len(),
                expected: dim,
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(ClusterError::NonFinite(row));
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    sq_dist(a, b).sqrt()
}

/// Raw vehicles per hour, or percent of the daily total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FeatureScale {
    Raw,
    #[default]
    Percent,
}

impl fmt::Display for FeatureScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureScale::Raw => "raw",
            FeatureScale::Percent => "percent",
        })
    }
}

impl FromStr for FeatureScale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(FeatureScale::Raw),
            "percent" | "pct" => Ok(FeatureScale::Percent),
            other => Err(format!("unknown feature scale {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow<T> {
    pub key: ProfileKey,
    pub values: [T; HOURS],
}

impl<T> AsRef<[T]> for FeatureRow<T> {
    fn as_ref(&self) -> &[T] {
        &self.values
    }
}

/// One row per (counter, direction, day type) profile of a single period.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    pub scale: FeatureScale,
    pub rows: Vec<FeatureRow<T>>,
    /// All-zero profiles left out because they cannot be normalized.
    pub skipped: Vec<ProfileKey>,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn from_profiles(
        set: &ProfileSet<T>,
        period: Period,
        scale: FeatureScale,
    ) -> Result<Self, ClusterError> {
        if period.mode() != set.mode {
            return Err(ClusterError::MissingPeriod(period.to_string()));
        }
        let mut rows = Vec::new();
        let mut skipped = Vec::new();
        for p in set.period(period) {
            match scale {
                FeatureScale::Raw if p.values.iter().all(|&v| v == T::zero()) => {
                    skipped.push(p.key.clone())
                }
                FeatureScale::Raw => rows.push(FeatureRow {
                    key: p.key.clone(),
                    values: p.values,
                }),
                FeatureScale::Percent => match normalize_values(&p.values) {
                    Ok(values) => rows.push(FeatureRow {
                        key: p.key.clone(),
                        values,
                    }),
                    Err(_) => skipped.push(p.key.clone()),
                },
            }
        }
        if !skipped.is_empty() {
            log::warn!(
                "{} all-zero profiles left out of the feature matrix",
                skipped.len()
            );
        }
        if rows.is_empty() {
            return Err(ClusterError::MissingPeriod(period.to_string()));
        }
        Ok(Self {
            scale,
            rows,
            skipped,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn day_types(&self) -> Vec<DayType> {
        self.rows.iter().map(|r| r.key.series.day_type).collect()
    }

    pub fn keys(&self) -> Vec<ProfileKey> {
        self.rows.iter().map(|r| r.key.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterMethod {
    KMeans,
    WardSpearman,
}

impl fmt::Display for ClusterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClusterMethod::KMeans => "kmeans",
            ClusterMethod::WardSpearman => "ward",
        })
    }
}

impl FromStr for ClusterMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kmeans" | "k-means" => Ok(ClusterMethod::KMeans),
            "ward" | "ward_spearman" | "hclust" => Ok(ClusterMethod::WardSpearman),
            other => Err(format!("unknown cluster method {other:?}")),
        }
    }
}

/// Labels, summaries and method-specific artefacts for one clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel<T> {
    pub method: ClusterMethod,
    pub k: usize,
    pub keys: Vec<ProfileKey>,
    /// Dense cluster ids in `0..k`, aligned with `keys`.
    pub labels: Vec<usize>,
    pub centroids: Option<Vec<Vec<T>>>,
    pub wcss: Option<T>,
    pub dendrogram: Option<Dendrogram<T>>,
    pub silhouette: Option<T>,
    pub k_table: Vec<KScore<T>>,
    pub profiles: Vec<ClusterProfile<T>>,
}

impl<T: Scalar> ClusterModel<T> {
    pub fn label_of(&self, key: &ProfileKey) -> Option<usize> {
        self.keys
            .iter()
            .position(|k| k == key)
            .map(|i| self.labels[i])
    }
}

/// Fixed k, or the silhouette maximum over a range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KChoice {
    Fixed(usize),
    Range(RangeInclusive<usize>),
}

/// k-means model; silhouette is always reported, so k must be at least 2.
pub fn kmeans_model<T: Scalar>(
    x: &FeatureMatrix<T>,
    k: KChoice,
    seed: u64,
    restarts: usize,
) -> Result<ClusterModel<T>, ClusterError> {
    let (fit, score, table) = match k {
        KChoice::Fixed(k) => {
            if k < 2 {
                return Err(ClusterError::TooFewClusters(k));
            }
            let fit = kmeans(&x.rows, k, seed, restarts)?;
            let s = silhouette(&x.rows, &fit.labels)?;
            let table = vec![KScore {
                k,
                silhouette: s,
                wcss: fit.wcss,
            }];
            (fit, s, table)
        }
        KChoice::Range(range) => {
            let sel = select_k(&x.rows, range, seed, restarts)?;
            let s = sel
                .table
                .iter()
                .find(|r| r.k == sel.best_k)
                .map(|r| r.silhouette)
                .expect("best k is in the table");
            (sel.best_fit, s, sel.table)
        }
    };
    let k = fit.centroids.len();
    let profiles = cluster_profiles(&x.rows, &fit.labels, &x.day_types())?;
    Ok(ClusterModel {
        method: ClusterMethod::KMeans,
        k,
        keys: x.keys(),
        labels: fit.labels,
        centroids: Some(fit.centroids),
        wcss: Some(fit.wcss),
        dendrogram: None,
        silhouette: Some(score),
        k_table: table,
        profiles,
    })
}

/// Ward linkage on `1 - rho`, cut at `k` clusters.
pub fn ward_model<T: Scalar>(
    x: &FeatureMatrix<T>,
    k: usize,
) -> Result<ClusterModel<T>, ClusterError> {
    let dist = spearman_distance_matrix(&x.rows)?;
    let tree = ward_hclust(&dist)?;
    let labels = cut_dendrogram(&tree, k)?;
    let profiles = cluster_profiles(&x.rows, &labels, &x.day_types())?;
    Ok(ClusterModel {
        method: ClusterMethod::WardSpearman,
        k,
        keys: x.keys(),
        labels,
        centroids: None,
        wcss: None,
        dendrogram: Some(tree),
        silhouette: None,
        k_table: Vec::new(),
        profiles,
    })
}
