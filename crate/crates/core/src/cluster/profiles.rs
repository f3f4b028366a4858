use serde::{Deserialize, Serialize};

use super::{check_points, ClusterError};
use crate::calendar::DayType;
use crate::scalar::Scalar;

/// Percent of member rows per day type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Composition<T> {
    pub weekend: T,
    pub workday: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile<T> {
    pub cluster: usize,
    pub size: usize,
    pub mean: Vec<T>,
    /// Sample standard deviation per hour; zero for singleton clusters.
    pub std: Vec<T>,
    pub composition: Composition<T>,
}

/// Per-cluster mean profile, spread and day-type mix.
pub fn cluster_profiles<T: Scalar, P: AsRef<[T]>>(
    points: &[P],
    labels: &[usize],
    day_types: &[DayType],
) -> Result<Vec<ClusterProfile<T>>, ClusterError> {
    check_points(points)?;
    if labels.len() != points.len() || day_types.len() != points.len() {
        return Err(ClusterError::LabelMismatch {
            labels: labels.len().min(day_types.len()),
            rows: points.len(),
        });
    }
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let dim = points[0].as_ref().len();
    let mut out = Vec::with_capacity(k);
    for c in 0..k {
        let members: Vec<usize> = (0..points.len()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            return Err(ClusterError::EmptyCluster(c));
        }
        let n = T::of_usize(members.len());
        let mean: Vec<T> = (0..dim)
            .map(|h| members.iter().map(|&i| points[i].as_ref()[h]).sum::<T>() / n)
            .collect();
        let std: Vec<T> = (0..dim)
            .map(|h| {
                if members.len() < 2 {
                    return T::zero();
                }
                let ss: T = members
                    .iter()
                    .map(|&i| {
                        let d = points[i].as_ref()[h] - mean[h];
                        d * d
                    })
                    .sum();
                (ss / T::of_usize(members.len() - 1)).sqrt()
            })
            .collect();
        let weekend = members
            .iter()
            .filter(|&&i| day_types[i] == DayType::Weekend)
            .count();
        let weekend_pct = T::lit(100.0) * T::of_usize(weekend) / n;
        out.push(ClusterProfile {
            cluster: c,
            size: members.len(),
            mean,
            std,
            composition: Composition {
                weekend: weekend_pct,
                workday: T::lit(100.0) - weekend_pct,
            },
        });
    }
    Ok(out)
}
