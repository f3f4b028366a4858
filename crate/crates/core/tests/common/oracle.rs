//! Slow, direct reference implementations used to cross-check the library.

/// 10/90 trimmed mean by sorting and scanning.
pub fn trimmed_mean(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let k = (n + 9) / 10;
    let (lo, hi) = (v[k - 1], v[n - k]);
    let kept: Vec<f64> = v.iter().copied().filter(|&x| x >= lo && x <= hi).collect();
    let pool = if kept.is_empty() { &v } else { &kept };
    pool.iter().sum::<f64>() / pool.len() as f64
}

/// Average ranks by counting: 1 + #smaller + (#equal - 1) / 2.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&xi| {
            let smaller = x.iter().filter(|&&y| y < xi).count() as f64;
            let equal = x.iter().filter(|&&y| y == xi).count() as f64;
            1.0 + smaller + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    sxy / (sxx * syy).sqrt()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Mean silhouette straight from the definition.
pub fn silhouette(points: &[Vec<f64>], labels: &[usize]) -> f64 {
    let k = labels.iter().max().unwrap() + 1;
    let mut total = 0.0;
    for i in 0..points.len() {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for j in 0..points.len() {
            if i != j {
                sums[labels[j]] += dist(&points[i], &points[j]);
                counts[labels[j]] += 1;
            }
        }
        let own = labels[i];
        if counts[own] == 0 {
            continue;
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..k)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / points.len() as f64
}

/// (left, right, height, size) per step, recomputing every pair each step.
pub fn ward_naive(d: &[Vec<f64>]) -> Vec<(usize, usize, f64, usize)> {
    let n = d.len();
    // clusters keyed by their smallest leaf: (node id, size)
    let mut alive: Vec<Option<(usize, usize)>> = (0..n).map(|i| Some((i, 1))).collect();
    let mut sq: Vec<Vec<f64>> = d
        .iter()
        .map(|r| r.iter().map(|x| x * x).collect())
        .collect();
    let mut out = Vec::new();
    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                if alive[i].is_some() && alive[j].is_some() {
                    let cand = (sq[i][j], i, j);
                    if best.is_none_or(|b| cand.0 < b.0) {
                        best = Some(cand);
                    }
                }
            }
        }
        let (dij, i, j) = best.unwrap();
        let ((ni_id, ni), (nj_id, nj)) = (alive[i].unwrap(), alive[j].unwrap());
        out.push((
            ni_id.min(nj_id),
            ni_id.max(nj_id),
            dij.max(0.0).sqrt(),
            ni + nj,
        ));
        for k in 0..n {
            if k == i || k == j {
                continue;
            }
            if let Some((_, nk)) = alive[k] {
                let t = (ni + nj + nk) as f64;
                let v = (((ni + nk) as f64) * sq[k][i] + ((nj + nk) as f64) * sq[k][j]
                    - (nk as f64) * dij)
                    / t;
                sq[k][i] = v.max(0.0);
                sq[i][k] = v.max(0.0);
            }
        }
        alive[j] = None;
        alive[i] = Some((n + step, ni + nj));
    }
    out
}

/// Minimum WCSS over every partition into exactly `k` non-empty groups.
pub fn best_wcss(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let dim = points[0].len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    // restricted growth strings enumerate each partition once
    fn rec(
        i: usize,
        used: usize,
        k: usize,
        labels: &mut Vec<usize>,
        points: &[Vec<f64>],
        dim: usize,
        best: &mut f64,
    ) {
        let n = labels.len();
        if n - i < k - used {
            return;
        }
        if i == n {
            let mut sums = vec![vec![0.0; dim]; k];
            let mut counts = vec![0usize; k];
            for (p, &l) in points.iter().zip(labels.iter()) {
                counts[l] += 1;
                for d in 0..dim {
                    sums[l][d] += p[d];
                }
            }
            let mut w = 0.0;
            for (p, &l) in points.iter().zip(labels.iter()) {
                for d in 0..dim {
                    let c = sums[l][d] / counts[l] as f64;
                    w += (p[d] - c) * (p[d] - c);
                }
            }
            if w < *best {
                *best = w;
            }
            return;
        }
        for l in 0..=used.min(k - 1) {
            labels[i] = l;
            rec(i + 1, used.max(l + 1), k, labels, points, dim, best);
        }
    }
    rec(0, 0, k, &mut labels, points, dim, &mut best);
    best
}
