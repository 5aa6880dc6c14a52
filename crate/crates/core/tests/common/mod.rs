//! Independent oracles shared by the integration suites.
//!
//! Everything here recomputes expected values by a route different from
//! the library implementation: raw-moment Pearson sums, OLS residual
//! correlations, exhaustive spanning-tree enumeration via Prüfer
//! sequences, pooled within-cluster sums of squares from raw points,
//! closed-form 2x2 singular values for Procrustes alignment, and Simpson
//! quadrature of the Marchenko-Pastur density.

#![allow(dead_code)]
// Index loops here mirror the textbook formulations they stand in for.
#![allow(clippy::needless_range_loop)]

use mesonet_core::panel::ReturnPanel;
use mesonet_core::spectral::MpBounds;
use mesonet_core::NaiveDate;
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Panel of i.i.d. standard normal returns.
pub fn random_return_panel(rng: &mut ChaCha12Rng, n: usize, t: usize) -> ReturnPanel {
    let tickers: Vec<String> = (0..n).map(|i| format!("S{i:03}")).collect();
    let dates: Vec<NaiveDate> = (0..t)
        .map(|k| NaiveDate::from_ymd_opt(2015, 1, 2).unwrap() + chrono::Days::new(k as u64))
        .collect();
    let mut values = Array2::zeros((n, t));
    for i in 0..n {
        for j in 0..t {
            values[[i, j]] = StandardNormal.sample(rng);
        }
    }
    ReturnPanel::from_parts(tickers, dates, values).unwrap()
}

/// Pearson correlation from raw moment sums, population normalization.
pub fn pearson_raw_moments(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let cov = sxy / n - (sx / n) * (sy / n);
    let vx = sxx / n - (sx / n) * (sx / n);
    let vy = syy / n - (sy / n) * (sy / n);
    cov / (vx * vy).sqrt()
}

/// Solves the dense system by Gaussian elimination with partial
/// pivoting. Sized for the tiny normal equations used below.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p][col].abs().partial_cmp(&a[q][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

/// Residuals of `y` after OLS on an intercept plus `controls`.
pub fn ols_residuals(y: &[f64], controls: &[&[f64]]) -> Vec<f64> {
    let t = y.len();
    let p = controls.len() + 1;
    let design = |row: usize, col: usize| if col == 0 { 1.0 } else { controls[col - 1][row] };
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for row in 0..t {
        for i in 0..p {
            xty[i] += design(row, i) * y[row];
            for j in 0..p {
                xtx[i][j] += design(row, i) * design(row, j);
            }
        }
    }
    let beta = solve(xtx, xty);
    (0..t)
        .map(|row| y[row] - (0..p).map(|i| beta[i] * design(row, i)).sum::<f64>())
        .collect()
}

/// Partial correlation as the correlation of OLS residuals: the
/// regression route, independent of the recursive formula.
pub fn residual_partial(x: &[f64], y: &[f64], controls: &[&[f64]]) -> f64 {
    let rx = ols_residuals(x, controls);
    let ry = ols_residuals(y, controls);
    pearson_raw_moments(&rx, &ry)
}

/// Singular values of a 2x2 matrix in closed form.
pub fn singular_values_2x2(m: [[f64; 2]; 2]) -> (f64, f64) {
    let e = (m[0][0] + m[1][1]) / 2.0;
    let f = (m[0][0] - m[1][1]) / 2.0;
    let g = (m[1][0] + m[0][1]) / 2.0;
    let h = (m[1][0] - m[0][1]) / 2.0;
    let q = e.hypot(h);
    let r = f.hypot(g);
    (q + r, (q - r).abs())
}

/// RMS misfit of two planar configurations after optimal translation
/// and orthogonal alignment (reflections allowed).
pub fn procrustes_rms(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let n = a.nrows();
    assert_eq!(b.nrows(), n);
    assert_eq!(a.ncols(), 2);
    assert_eq!(b.ncols(), 2);
    let mean = |m: &Array2<f64>, c: usize| m.column(c).sum() / n as f64;
    let (ax, ay) = (mean(a, 0), mean(a, 1));
    let (bx, by) = (mean(b, 0), mean(b, 1));
    let mut sa = 0.0;
    let mut sb = 0.0;
    let mut h = [[0.0f64; 2]; 2];
    for i in 0..n {
        let pa = [a[[i, 0]] - ax, a[[i, 1]] - ay];
        let pb = [b[[i, 0]] - bx, b[[i, 1]] - by];
        sa += pa[0] * pa[0] + pa[1] * pa[1];
        sb += pb[0] * pb[0] + pb[1] * pb[1];
        for r in 0..2 {
            for c in 0..2 {
                h[r][c] += pb[r] * pa[c];
            }
        }
    }
    let (s1, s2) = singular_values_2x2(h);
    // min_{R ∈ O(2)} Σ‖b − Ra‖² = Sa + Sb − 2(σ1 + σ2).
    ((sa + sb - 2.0 * (s1 + s2)).max(0.0) / n as f64).sqrt()
}

fn prufer_decode(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] = 0;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

fn ascending_sum(mut weights: Vec<f64>) -> f64 {
    weights.sort_by(|a, b| a.partial_cmp(b).unwrap());
    weights.iter().sum()
}

/// Minimum spanning total by enumerating all n^(n−2) labeled trees.
/// Totals are ascending-order sums, matching the library convention, so
/// exact equality is a fair requirement.
pub fn min_total_by_tree_enumeration(w: &Array2<f64>) -> f64 {
    let n = w.nrows();
    match n {
        0 | 1 => return 0.0,
        2 => return w[[0, 1]],
        _ => {}
    }
    let len = n - 2;
    let mut seq = vec![0usize; len];
    let mut best = f64::INFINITY;
    loop {
        let weights: Vec<f64> =
            prufer_decode(&seq, n).into_iter().map(|(i, j)| w[[i, j]]).collect();
        let total = ascending_sum(weights);
        if total < best {
            best = total;
        }
        let mut k = 0;
        loop {
            if k == len {
                return best;
            }
            seq[k] += 1;
            if seq[k] < n {
                break;
            }
            seq[k] = 0;
            k += 1;
        }
    }
}

/// Ward merge cost of two clusters from raw points:
/// ΔSS = |A||B|/(|A|+|B|) ‖mean(A) − mean(B)‖², the growth of the pooled
/// within-cluster sum of squares.
pub fn ward_delta_ss(points: &[Vec<f64>], a: &[usize], b: &[usize]) -> f64 {
    let dim = points[0].len();
    let centroid = |c: &[usize]| -> Vec<f64> {
        let mut m = vec![0.0; dim];
        for &i in c {
            for (acc, v) in m.iter_mut().zip(&points[i]) {
                *acc += v;
            }
        }
        for v in &mut m {
            *v /= c.len() as f64;
        }
        m
    };
    let (ca, cb) = (centroid(a), centroid(b));
    let gap: f64 = ca.iter().zip(&cb).map(|(p, q)| (p - q) * (p - q)).sum();
    (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64 * gap
}

/// Pooled within-cluster sum of squares of a full partition.
pub fn pooled_ss(points: &[Vec<f64>], partition: &[Vec<usize>]) -> f64 {
    let dim = points[0].len();
    partition
        .iter()
        .map(|c| {
            let mut mean = vec![0.0; dim];
            for &i in c {
                for (acc, v) in mean.iter_mut().zip(&points[i]) {
                    *acc += v;
                }
            }
            for v in &mut mean {
                *v /= c.len() as f64;
            }
            c.iter()
                .map(|&i| {
                    points[i]
                        .iter()
                        .zip(&mean)
                        .map(|(p, m)| (p - m) * (p - m))
                        .sum::<f64>()
                })
                .sum::<f64>()
        })
        .sum()
}

/// Ward cost of merging A and B on an arbitrary distance matrix, from
/// the pair-sum functional E(C) = Σ_{i<j∈C} d²_ij / |C|:
/// cost = 2 (E(A∪B) − E(A) − E(B)). Valid with no Euclidean assumption.
pub fn ward_pair_sum_cost(d: &Array2<f64>, a: &[usize], b: &[usize]) -> f64 {
    let e = |c: &[usize]| -> f64 {
        let mut sum = 0.0;
        for (p, &i) in c.iter().enumerate() {
            for &j in &c[p + 1..] {
                sum += d[[i, j]] * d[[i, j]];
            }
        }
        sum / c.len() as f64
    };
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    2.0 * (e(&ab) - e(a) - e(b))
}

/// Marchenko-Pastur CDF by Simpson quadrature under the sin²
/// substitution that removes the edge singularities.
pub fn mp_cdf(bounds: &MpBounds, lambda: f64) -> f64 {
    if lambda <= bounds.lambda_min {
        return 0.0;
    }
    if lambda >= bounds.lambda_max {
        return 1.0;
    }
    let width = bounds.lambda_max - bounds.lambda_min;
    let theta_hi = ((lambda - bounds.lambda_min) / width).sqrt().asin();
    let f = |theta: f64| {
        let l = bounds.lambda_min + width * theta.sin().powi(2);
        bounds.density(l) * width * (2.0 * theta).sin()
    };
    let steps = 2000;
    let h = theta_hi / steps as f64;
    let mut acc = f(0.0) + f(theta_hi);
    for k in 1..steps {
        acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    (acc * h / 3.0).clamp(0.0, 1.0)
}

/// Kolmogorov-Smirnov distance between a sample and a reference CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}
