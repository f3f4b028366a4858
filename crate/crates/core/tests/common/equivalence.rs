//! Library kernels against the slow references in `oracle`, on random small instances.

use counterscope_core::cluster::{kmeans, silhouette, spearman_rho, ward_hclust, DistanceMatrix};
use counterscope_core::profile::trimmed_mean;
use rand::Rng;

use super::{oracle, rng, Check};

pub const INSTANCES: usize = 100;

fn random_values(r: &mut impl Rng, n: usize) -> Vec<f64> {
    // a third of the instances draw from a tiny integer range to force ties
    if r.random_bool(1.0 / 3.0) {
        (0..n).map(|_| f64::from(r.random_range(0..6))).collect()
    } else {
        (0..n).map(|_| r.random_range(-500.0..500.0)).collect()
    }
}

fn random_points(r: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| r.random_range(-10.0..10.0)).collect())
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn trimmed_mean_matches() -> Result<String, String> {
    let mut r = rng(101);
    for i in 0..INSTANCES {
        let n = r.random_range(1..=60);
        let v = random_values(&mut r, n);
        let (got, want) = (
            trimmed_mean(&v).map_err(|e| e.to_string())?,
            oracle::trimmed_mean(&v),
        );
        if got != want {
            return Err(format!("instance {i} (n={n}): {got} != {want}"));
        }
    }
    Ok(format!("{INSTANCES} instances, exact"))
}

pub fn spearman_matches() -> Result<String, String> {
    let mut r = rng(102);
    let mut done = 0;
    let mut worst = 0.0_f64;
    while done < INSTANCES {
        let n = r.random_range(3..=30);
        let (x, y) = (random_values(&mut r, n), random_values(&mut r, n));
        let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
        if constant(&x) || constant(&y) {
            continue;
        }
        let got = spearman_rho(&x, &y).map_err(|e| e.to_string())?;
        let want = oracle::spearman(&x, &y);
        worst = worst.max((got - want).abs());
        if (got - want).abs() > 1e-12 {
            return Err(format!("instance {done}: rho {got} vs {want}"));
        }
        done += 1;
    }
    Ok(format!("{INSTANCES} instances, max |diff| {worst:.1e}"))
}

pub fn silhouette_matches() -> Result<String, String> {
    let mut r = rng(103);
    let mut worst = 0.0_f64;
    for i in 0..INSTANCES {
        let n = r.random_range(4..=20);
        let k = r.random_range(2..=4.min(n));
        let dim = r.random_range(1..=4);
        let points = random_points(&mut r, n, dim);
        // every cluster gets at least one row
        let mut labels: Vec<usize> = (0..n)
            .map(|j| if j < k { j } else { r.random_range(0..k) })
            .collect();
        labels.rotate_left(r.random_range(0..n));
        let got: f64 = silhouette(&points, &labels).map_err(|e| e.to_string())?;
        let want = oracle::silhouette(&points, &labels);
        worst = worst.max((got - want).abs());
        if (got - want).abs() > 1e-12 {
            return Err(format!("instance {i}: silhouette {got} vs {want}"));
        }
    }
    Ok(format!("{INSTANCES} instances, max |diff| {worst:.1e}"))
}

pub fn ward_matches() -> Result<String, String> {
    let mut r = rng(104);
    for i in 0..INSTANCES {
        let n = r.random_range(2..=16);
        let d: Vec<Vec<f64>> = if r.random_bool(0.5) {
            let p = random_points(&mut r, n, 3);
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| {
                            p[a].iter()
                                .zip(&p[b])
                                .map(|(x, y)| (x - y) * (x - y))
                                .sum::<f64>()
                                .sqrt()
                        })
                        .collect()
                })
                .collect()
        } else {
            // arbitrary symmetric dissimilarities on a coarse grid, so ties occur
            let mut m = vec![vec![0.0; n]; n];
            for a in 0..n {
                for b in (a + 1)..n {
                    let v = f64::from(r.random_range(1..8)) / 4.0;
                    m[a][b] = v;
                    m[b][a] = v;
                }
            }
            m
        };
        let flat: Vec<f64> = d.iter().flatten().copied().collect();
        let tree =
            ward_hclust(&DistanceMatrix::from_row_major(n, flat).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
        let want = oracle::ward_naive(&d);
        if tree.merges.len() != want.len() {
            return Err(format!(
                "instance {i}: {} merges vs {}",
                tree.merges.len(),
                want.len()
            ));
        }
        for (s, (m, w)) in tree.merges.iter().zip(&want).enumerate() {
            if (m.left, m.right, m.size) != (w.0, w.1, w.3) || !close(m.height, w.2, 1e-12) {
                return Err(format!("instance {i} step {s}: {m:?} vs {w:?}"));
            }
        }
    }
    Ok(format!("{INSTANCES} instances, identical merge sequences"))
}

pub fn kmeans_near_optimal() -> Result<String, String> {
    let mut r = rng(105);
    let mut worst = 1.0_f64;
    for i in 0..INSTANCES {
        let n = r.random_range(4..=12);
        let k = r.random_range(1..=3);
        let dim = r.random_range(1..=3);
        let points = random_points(&mut r, n, dim);
        let fit = kmeans::<f64, _>(&points, k, 42, 10).map_err(|e| e.to_string())?;
        let best = oracle::best_wcss(&points, k);
        let ratio = if best > 0.0 { fit.wcss / best } else { 1.0 };
        worst = worst.max(ratio);
        if fit.wcss > best * 1.05 + 1e-9 {
            return Err(format!(
                "instance {i} (n={n}, k={k}): wcss {} vs optimum {best}",
                fit.wcss
            ));
        }
    }
    Ok(format!(
        "{INSTANCES} instances, worst wcss/optimum {worst:.4}"
    ))
}

pub fn all() -> Vec<(&'static str, Check)> {
    vec![
        ("trimmed mean", trimmed_mean_matches as Check),
        ("spearman rho", spearman_matches),
        ("silhouette", silhouette_matches),
        ("ward merges", ward_matches),
        ("k-means wcss", kmeans_near_optimal),
    ]
}
