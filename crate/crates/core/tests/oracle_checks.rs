//! Cross-validation of every numerical kernel against an independently
//! coded route: raw-moment correlations, OLS-residual partial
//! correlations, pooled-SS Ward costs, exhaustive spanning trees,
//! Procrustes-aligned embeddings, quadrature of the spectral density and
//! a from-scratch recount of recurrence lines.

mod common;

use mesonet_core::netgeo::{self, DistanceMatrix, MstAlgorithm};
use mesonet_core::partialcorr;
use mesonet_core::recurrence::{self, EmbeddingConfig};
use mesonet_core::spectral::{self, CorrelationMatrix};
use ndarray::Array2;
use rand::Rng;
use std::collections::BTreeMap;

#[test]
fn correlations_match_raw_moment_sums() {
    let mut rng = common::rng(0xC0FFEE);
    for _ in 0..20 {
        let panel = common::random_return_panel(&mut rng, 8, 50);
        let c = CorrelationMatrix::from_panel(&panel).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let xi: Vec<f64> = panel.values().row(i).to_vec();
                let xj: Vec<f64> = panel.values().row(j).to_vec();
                let want = if i == j { 1.0 } else { common::pearson_raw_moments(&xi, &xj) };
                assert!(
                    (c.values()[[i, j]] - want).abs() < 1e-12,
                    "pair ({i},{j}): {} vs {}",
                    c.values()[[i, j]],
                    want
                );
            }
        }
    }
}

#[test]
fn partial_correlations_match_the_regression_route() {
    let mut rng = common::rng(0xBEEF);
    for _ in 0..10 {
        let panel = common::random_return_panel(&mut rng, 6, 120);
        let c = CorrelationMatrix::from_panel(&panel).unwrap();
        let market_ticker = panel.tickers()[0].clone();
        let set = partialcorr::conditioned_on_market(&c, &market_ticker).unwrap();
        let m: Vec<f64> = panel.values().row(0).to_vec();
        let series: Vec<Vec<f64>> = (1..6).map(|i| panel.values().row(i).to_vec()).collect();
        let ns = set.n();
        for x in 0..ns {
            for y in x + 1..ns {
                let want = common::residual_partial(&series[x], &series[y], &[&m]);
                let got = set.given_market()[[x, y]];
                assert!((got - want).abs() < 1e-10, "pair ({x},{y}): {got} vs {want}");
                for z in 0..ns {
                    if z == x || z == y {
                        continue;
                    }
                    let want2 =
                        common::residual_partial(&series[x], &series[y], &[&m, &series[z]]);
                    let got2 = set.partial_given_both(x, y, z).unwrap();
                    assert!(
                        (got2 - want2).abs() < 1e-10,
                        "triple ({x},{y}|{z}): {got2} vs {want2}"
                    );
                }
            }
        }
    }
}

#[test]
fn ward_merges_minimize_pooled_sum_of_squares() {
    let mut rng = common::rng(0xA11CE);
    for round in 0..12 {
        let n = 3 + (round % 4);
        let dim = 2 + (round % 2);
        let points: Vec<Vec<f64>> =
            (0..n).map(|_| (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
        let mut values = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let d2: f64 =
                    points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                values[[i, j]] = d2.sqrt();
            }
        }
        let d =
            DistanceMatrix::from_parts((0..n).map(|i| format!("P{i}")).collect(), values).unwrap();
        let tree = netgeo::ward_dendrogram(&d).unwrap();

        // Replay the merge sequence on raw member sets, checking that
        // every step pays the minimal pooled-SS cost.
        let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let mut active: Vec<usize> = (0..n).collect();
        let mut total_ss = 0.0;
        for merge in tree.merges() {
            let mut best = f64::INFINITY;
            for (p, &a) in active.iter().enumerate() {
                for &b in &active[p + 1..] {
                    best = best.min(common::ward_delta_ss(&points, &members[a], &members[b]));
                }
            }
            let chosen = common::ward_delta_ss(&points, &members[merge.left], &members[merge.right]);
            // Ward heights square to twice the pooled-SS increment.
            assert!((merge.height * merge.height - 2.0 * chosen).abs() < 1e-10);
            assert!(chosen <= best + 1e-10, "merge cost {chosen} exceeds the minimum {best}");
            total_ss += chosen;
            let mut joined = members[merge.left].clone();
            joined.extend(&members[merge.right]);
            joined.sort_unstable();
            active.retain(|&id| id != merge.left && id != merge.right);
            members.push(joined);
            active.push(members.len() - 1);
        }
        // The increments telescope to the total sum of squares.
        let all: Vec<usize> = (0..n).collect();
        assert!((total_ss - common::pooled_ss(&points, &[all])).abs() < 1e-9);
    }
}

#[test]
fn ward_on_non_euclidean_input_follows_the_pair_sum_functional() {
    let mut rng = common::rng(0xD1CE);
    for _ in 0..10 {
        let n = 6;
        // Arbitrary symmetric dissimilarities; no point set realizes them.
        let mut values = Array2::zeros((n, n));
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.random_range(0.5..4.0);
                values[[i, j]] = v;
                values[[j, i]] = v;
            }
        }
        let sq: Array2<f64> = values.mapv(|v: f64| v); // distances, squared inside the oracle
        let d =
            DistanceMatrix::from_parts((0..n).map(|i| format!("P{i}")).collect(), values).unwrap();
        let tree = netgeo::ward_dendrogram(&d).unwrap();
        let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let mut active: Vec<usize> = (0..n).collect();
        for merge in tree.merges() {
            let mut best = f64::INFINITY;
            for (p, &a) in active.iter().enumerate() {
                for &b in &active[p + 1..] {
                    best = best.min(common::ward_pair_sum_cost(&sq, &members[a], &members[b]));
                }
            }
            let chosen =
                common::ward_pair_sum_cost(&sq, &members[merge.left], &members[merge.right]);
            assert!((merge.height * merge.height - chosen).abs() < 1e-9);
            assert!(chosen <= best + 1e-9);
            let mut joined = members[merge.left].clone();
            joined.extend(&members[merge.right]);
            active.retain(|&id| id != merge.left && id != merge.right);
            members.push(joined);
            active.push(members.len() - 1);
        }
    }
}

#[test]
fn spanning_trees_match_exhaustive_enumeration() {
    let mut rng = common::rng(0xF00D);
    for round in 0..25 {
        let n = 2 + (round % 6);
        let mut values = Array2::zeros((n, n));
        for i in 0..n {
            for j in i + 1..n {
                // Every fourth instance rounds to one decimal to force ties.
                let mut v: f64 = rng.random_range(0.1..5.0);
                if round % 4 == 0 {
                    v = (v * 10.0).round() / 10.0;
                }
                values[[i, j]] = v;
                values[[j, i]] = v;
            }
        }
        let want = common::min_total_by_tree_enumeration(&values);
        let d =
            DistanceMatrix::from_parts((0..n).map(|i| format!("P{i}")).collect(), values).unwrap();
        for alg in [MstAlgorithm::Kruskal, MstAlgorithm::Prim] {
            let tree = netgeo::minimum_spanning_tree(&d, alg);
            assert_eq!(tree.total_weight(), want, "n = {n}, {alg:?}");
        }
    }
}

#[test]
fn embeddings_recover_planar_configurations() {
    let mut rng = common::rng(0x9E0);
    for round in 0..10 {
        let n = 4 + (round % 10);
        let mut truth: Array2<f64> = Array2::zeros((n, 2));
        for i in 0..n {
            truth[[i, 0]] = rng.random_range(-3.0..3.0);
            truth[[i, 1]] = rng.random_range(-3.0..3.0);
        }
        let mut values = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let (dx, dy) = (truth[[i, 0]] - truth[[j, 0]], truth[[i, 1]] - truth[[j, 1]]);
                values[[i, j]] = dx.hypot(dy);
            }
        }
        let d =
            DistanceMatrix::from_parts((0..n).map(|i| format!("P{i}")).collect(), values).unwrap();
        let e = netgeo::mds(&d, 2, false).unwrap();
        let rms = common::procrustes_rms(e.coordinates(), &truth);
        assert!(rms < 1e-6, "round {round}: Procrustes RMS {rms}");
    }
}

#[test]
fn spectral_density_integrates_to_one_and_cdf_is_monotone() {
    for (n, t) in [(100usize, 150usize), (100, 200), (100, 500), (50, 500)] {
        let b = spectral::mp_bounds(n, t).unwrap();
        assert!((common::mp_cdf(&b, b.lambda_max) - 1.0).abs() < 1e-6, "Q = {}", b.q);
        let mut prev = 0.0;
        for k in 0..=20 {
            let lambda = b.lambda_min + (b.lambda_max - b.lambda_min) * k as f64 / 20.0;
            let f = common::mp_cdf(&b, lambda);
            assert!(f >= prev - 1e-12);
            prev = f;
        }
    }
}

fn true_run_lengths(bits: &[bool]) -> Vec<usize> {
    bits.split(|&b| !b).map(<[bool]>::len).filter(|&l| l > 0).collect()
}

#[test]
fn recurrence_lines_match_a_from_scratch_recount() {
    let mut rng = common::rng(0x5EED);
    for round in 0..15 {
        let len = 60 + 10 * (round % 4);
        let series: Vec<f64> = (0..len)
            .map(|k| (k as f64 * 0.31).sin() + 0.3 * rng.random_range(-1.0..1.0f64))
            .collect();
        let theiler = round % 3;
        let points = recurrence::embed(&series, 2, 1).unwrap();
        let eps = recurrence::resolve_epsilon(&points, 0.15, recurrence::EpsMode::Relative);
        let rm = recurrence::recurrence_matrix(
            &points,
            EmbeddingConfig { dimension: 2, delay: 1, epsilon: eps, theiler },
        );
        let n = rm.n();
        let (l_min, v_min) = (2usize, 2usize);
        let report = recurrence::rqa(&rm, l_min, v_min);

        let mut diag: BTreeMap<usize, u64> = BTreeMap::new();
        for offset in theiler + 1..n {
            let bits: Vec<bool> = (0..n - offset).map(|s| rm.get(s, s + offset)).collect();
            for l in true_run_lengths(&bits) {
                *diag.entry(l).or_insert(0) += 2;
            }
        }
        let mut vert: BTreeMap<usize, u64> = BTreeMap::new();
        for j in 0..n {
            let bits: Vec<bool> = (0..n).map(|i| rm.get(i, j)).collect();
            for l in true_run_lengths(&bits) {
                *vert.entry(l).or_insert(0) += 1;
            }
        }
        assert_eq!(report.diagonal_lines, diag);
        assert_eq!(report.vertical_lines, vert);

        let total: u64 = (0..n).map(|i| (0..n).filter(|&j| rm.get(i, j)).count() as u64).sum();
        let band: u64 = n as u64
            + (1..=theiler)
                .map(|o| 2 * (0..n - o).filter(|&s| rm.get(s, s + o)).count() as u64)
                .sum::<u64>();
        assert_eq!(report.recurrence_rate, total as f64 / (n * n) as f64);

        let dp: u64 = diag.range(l_min..).map(|(&l, &c)| l as u64 * c).sum();
        let dl: u64 = diag.range(l_min..).map(|(_, &c)| c).sum();
        let counted = total - band;
        assert_eq!(report.determinism, if counted > 0 { dp as f64 / counted as f64 } else { 0.0 });
        assert_eq!(report.mean_diagonal, if dl > 0 { dp as f64 / dl as f64 } else { 0.0 });
        let lmax = diag.keys().next_back().copied().filter(|&l| l >= l_min).unwrap_or(0);
        assert_eq!(report.longest_diagonal, lmax);
        if dl > 0 {
            let entr: f64 = diag
                .range(l_min..)
                .map(|(_, &c)| {
                    let p = c as f64 / dl as f64;
                    -p * p.ln()
                })
                .sum();
            assert_eq!(report.diagonal_entropy, entr);
        }
        let vp: u64 = vert.range(v_min..).map(|(&l, &c)| l as u64 * c).sum();
        let vl: u64 = vert.range(v_min..).map(|(_, &c)| c).sum();
        assert_eq!(report.laminarity, vp as f64 / total as f64);
        assert_eq!(report.trapping_time, if vl > 0 { vp as f64 / vl as f64 } else { 0.0 });
    }
}

#[test]
fn parallel_paths_are_thread_count_invariant() {
    let series: Vec<f64> = (0..400).map(|k| (k as f64 * 0.17).sin() * (1.0 + 0.01 * k as f64)).collect();
    let points = recurrence::embed(&series, 3, 2).unwrap();
    let config = EmbeddingConfig { dimension: 3, delay: 2, epsilon: 0.4, theiler: 1 };

    let mut rng = common::rng(77);
    let panel = common::random_return_panel(&mut rng, 12, 80);
    let c = CorrelationMatrix::from_panel(&panel).unwrap();
    let market_ticker = panel.tickers()[0].clone();

    let default_rm = recurrence::recurrence_matrix(&points, config);
    let default_set = partialcorr::conditioned_on_market(&c, &market_ticker).unwrap();

    for threads in [1usize, 2, 7] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let (rm, set) = pool.install(|| {
            (
                recurrence::recurrence_matrix(&points, config),
                partialcorr::conditioned_on_market(&c, &market_ticker).unwrap(),
            )
        });
        for i in 0..rm.n() {
            for j in 0..rm.n() {
                assert_eq!(rm.get(i, j), default_rm.get(i, j));
            }
        }
        let ns = set.n();
        for x in 0..ns {
            for z in 0..ns {
                if x == z {
                    continue;
                }
                // Bit-identical, not merely close.
                assert_eq!(set.avg_influence()[[x, z]], default_set.avg_influence()[[x, z]]);
            }
        }
    }
}
