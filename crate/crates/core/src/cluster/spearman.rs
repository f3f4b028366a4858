//! Spearman rank correlation and the `1 - rho` dissimilarity matrix.

use rayon::prelude::*;

use super::{check_points, ClusterError};
use crate::scalar::{cmp_scalar, Scalar};

/// 1-based ranks with ties sharing the average of their positions.
pub fn average_ranks<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| cmp_scalar(&values[a], &values[b]).then(a.cmp(&b)));
    let mut ranks = vec![T::zero(); values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean rank
        let avg = T::of_usize(start + 1 + end) / T::lit(2.0);
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Ranks centred on their mean; `None` when every value ties.
fn centred_ranks<T: Scalar>(values: &[T]) -> Option<(Vec<T>, T)> {
    let ranks = average_ranks(values);
    let mid = T::of_usize(values.len() + 1) / T::lit(2.0);
    let centred: Vec<T> = ranks.into_iter().map(|r| r - mid).collect();
    let norm = centred.iter().map(|&c| c * c).sum::<T>().sqrt();
    (norm > T::zero()).then_some((centred, norm))
}

fn rho_from_centred<T: Scalar>(a: &(Vec<T>, T), b: &(Vec<T>, T)) -> T {
    let dot: T = a.0.iter().zip(&b.0).map(|(&x, &y)| x * y).sum();
    (dot / (a.1 * b.1)).max(-T::one()).min(T::one())
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman_rho<T: Scalar>(x: &[T], y: &[T]) -> Result<T, ClusterError> {
    if x.len() != y.len() {
        return Err(ClusterError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let a = centred_ranks(x).ok_or(ClusterError::ConstantRow(0))?;
    let b = centred_ranks(y).ok_or(ClusterError::ConstantRow(1))?;
    Ok(rho_from_centred(&a, &b))
}

/// Dense symmetric `n x n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    /// Builds from row-major values; errors unless `data.len() == n * n`.
    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self, ClusterError> {
        if data.len() != n * n {
            return Err(ClusterError::NotSquare { n, len: data.len() });
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Checks exact symmetry, zero diagonal and finite non-negative entries.
    pub fn validate(&self) -> Result<(), ClusterError> {
        for i in 0..self.n {
            if self.get(i, i) != T::zero() {
                return Err(ClusterError::NonZeroDiagonal(i));
            }
            for j in 0..self.n {
                let v = self.get(i, j);
                if !v.is_finite() || v < T::zero() {
                    return Err(ClusterError::InvalidDistance { i, j });
                }
                if v != self.get(j, i) {
                    return Err(ClusterError::NotSymmetric { i, j });
                }
            }
        }
        Ok(())
    }
}

/// `d(i, j) = 1 - rho(i, j)`, in `[0, 2]` with an exact zero diagonal.
pub fn spearman_distance_matrix<T: Scalar, P: AsRef<[T]> + Sync>(
    points: &[P],
) -> Result<DistanceMatrix<T>, ClusterError> {
    check_points(points)?;
    let centred: Vec<(Vec<T>, T)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| centred_ranks(p.as_ref()).ok_or(ClusterError::ConstantRow(i)))
        .collect::<Result<_, _>>()?;
    let n = points.len();
    let upper: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| T::one() - rho_from_centred(&centred[i], &centred[j]))
                .collect()
        })
        .collect();
    let mut m = DistanceMatrix::zeros(n);
    for (i, row) in upper.into_iter().enumerate() {
        for (off, d) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            m.set(i, j, d);
            m.set(j, i, d);
        }
    }
    Ok(m)
}
