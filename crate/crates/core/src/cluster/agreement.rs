//! External agreement between a clustering and reference labels.

use std::collections::BTreeMap;

/// Adjusted Rand index; 1.0 for identical partitions up to relabelling.
pub fn adjusted_rand_index<A: Ord, B: Ord>(a: &[A], b: &[B]) -> f64 {
    assert_eq!(a.len(), b.len(), "label vectors must have equal length");
    let n = a.len();
    let pairs = |c: usize| (c * c.saturating_sub(1) / 2) as f64;
    let mut joint: BTreeMap<(&A, &B), usize> = BTreeMap::new();
    let mut rows: BTreeMap<&A, usize> = BTreeMap::new();
    let mut cols: BTreeMap<&B, usize> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = joint.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(n);
    if total == 0.0 {
        return 1.0;
    }
    let expected = sum_a * sum_b / total;
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Fraction of rows whose reference class is the majority class of their cluster.
pub fn purity<A: Ord, B: Ord>(labels: &[A], truth: &[B]) -> f64 {
    assert_eq!(
        labels.len(),
        truth.len(),
        "label vectors must have equal length"
    );
    if labels.is_empty() {
        return 1.0;
    }
    let mut counts: BTreeMap<&A, BTreeMap<&B, usize>> = BTreeMap::new();
    for (l, t) in labels.iter().zip(truth) {
        *counts.entry(l).or_default().entry(t).or_default() += 1;
    }
    let hits: usize = counts
        .values()
        .map(|m| m.values().copied().max().unwrap_or(0))
        .sum();
    hits as f64 / labels.len() as f64
}
