//! Agglomerative clustering with Ward linkage.
//!
//! Works on any dissimilarity matrix: squared dissimilarities are updated with
//! the Lance-Williams recurrence
//!
//! ```text
//! d²(k, i∪j) = ((n_i + n_k) d²(k,i) + (n_j + n_k) d²(k,j) - n_k d²(i,j)) / (n_i + n_j + n_k)
//! ```
//!
//! and merge heights are reported on the original (unsquared) scale. Each
//! step merges the globally closest pair; ties go to the pair with the
//! smallest row indices, where a cluster is indexed by its smallest leaf.

use serde::{Deserialize, Serialize};

use super::spearman::DistanceMatrix;
use super::ClusterError;
use crate::scalar::Scalar;

/// One agglomeration step. Leaves are `0..n`; step `s` creates node `n + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge<T> {
    pub left: usize,
    pub right: usize,
    pub height: T,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram<T> {
    pub leaves: usize,
    pub merges: Vec<Merge<T>>,
}

/// Ward agglomeration over a symmetric dissimilarity matrix.
pub fn ward_hclust<T: Scalar>(dist: &DistanceMatrix<T>) -> Result<Dendrogram<T>, ClusterError> {
    dist.validate()?;
    let n = dist.len();
    let mut sq = DistanceMatrix::from_fn(n, |i, j| dist.get(i, j) * dist.get(i, j));
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut node = (0..n).collect::<Vec<_>>();
    // nearest active neighbour with a larger slot index
    let mut nn: Vec<Option<(usize, T)>> = vec![None; n];

    let nearest_above = |sq: &DistanceMatrix<T>, active: &[bool], i: usize| {
        let mut best: Option<(usize, T)> = None;
        for j in (i + 1)..n {
            if active[j] {
                let d = sq.get(i, j);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        best
    };
    for i in 0..n {
        nn[i] = nearest_above(&sq, &active, i);
    }

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let mut pick: Option<(usize, usize, T)> = None;
        for i in 0..n {
            if let (true, Some((j, d))) = (active[i], nn[i]) {
                if pick.is_none_or(|(_, _, pd)| d < pd) {
                    pick = Some((i, j, d));
                }
            }
        }
        let (i, j, dij) = pick.expect("two or more active clusters");
        let (ni, nj) = (size[i], size[j]);
        merges.push(Merge {
            left: node[i].min(node[j]),
            right: node[i].max(node[j]),
            height: dij.max(T::zero()).sqrt(),
            size: ni + nj,
        });

        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let nk = size[k];
            let total = T::of_usize(ni + nj + nk);
            let updated = (T::of_usize(ni + nk) * sq.get(k, i)
                + T::of_usize(nj + nk) * sq.get(k, j)
                - T::of_usize(nk) * dij)
                / total;
            let updated = updated.max(T::zero());
            sq.set(k, i, updated);
            sq.set(i, k, updated);
        }
        active[j] = false;
        nn[j] = None;
        size[i] = ni + nj;
        node[i] = n + step;

        for k in 0..n {
            if !active[k] {
                continue;
            }
            let stale = k == i || matches!(nn[k], Some((t, _)) if t == i || t == j);
            if stale {
                nn[k] = nearest_above(&sq, &active, k);
            } else if k < i {
                let d = sq.get(k, i);
                if let Some((t, td)) = nn[k] {
                    if d < td || (d == td && i < t) {
                        nn[k] = Some((i, d));
                    }
                }
            }
        }
    }
    Ok(Dendrogram { leaves: n, merges })
}

/// Flat clustering with exactly `k` clusters, undoing the last `k - 1` merges.
///
/// Labels are dense and numbered by first appearance in leaf order.
pub fn cut_dendrogram<T: Scalar>(
    tree: &Dendrogram<T>,
    k: usize,
) -> Result<Vec<usize>, ClusterError> {
    let n = tree.leaves;
    if k == 0 || k > n {
        return Err(ClusterError::InvalidK { k, n });
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut leaf_of: Vec<usize> = (0..n).collect();
    for m in tree.merges.iter().take(n - k) {
        let (a, b) = (leaf_of[m.left], leaf_of[m.right]);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
        leaf_of.push(a);
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut next = 0;
    let mut labels = Vec::with_capacity(n);
    for leaf in 0..n {
        let r = find(&mut parent, leaf);
        if label_of_root[r] == usize::MAX {
            label_of_root[r] = next;
            next += 1;
        }
        labels.push(label_of_root[r]);
    }
    Ok(labels)
}
