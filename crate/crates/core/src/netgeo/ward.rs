//! Agglomerative clustering with Ward's minimum-variance criterion.
//!
//! The algorithm works on squared distances. Singleton clusters start at
//! W_ij = d_ij² and the Lance-Williams recurrence
//! W(A∪B, C) = ((a+c) W(A,C) + (b+c) W(B,C) − c W(A,B)) / (a+b+c)
//! keeps W equal to the Ward merge cost as clusters grow. Reported merge
//! heights are √W, back on the distance scale. Ward costs are
//! reducible, so heights never decrease along the tree.
//!
//! Cluster ids follow the usual convention: leaves are 0..n−1 and the
//! merge at step t creates id n+t. Ties pick the smallest id pair.

use super::DistanceMatrix;
use crate::error::{Error, Result};
use crate::textio::sig15;

/// One agglomeration step. `left` < `right` are cluster ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    /// Leaves in the merged cluster.
    pub size: usize,
}

/// Full merge history over the labeled leaves.
#[derive(Debug, Clone)]
pub struct Dendrogram {
    labels: Vec<String>,
    merges: Vec<Merge>,
}

/// Builds the Ward tree. Needs at least one series.
pub fn ward_dendrogram(d: &DistanceMatrix) -> Result<Dendrogram> {
    let n = d.n();
    if n == 0 {
        return Err(Error::InsufficientData { detail: "clustering needs at least one series".into() });
    }

    // Active clusters, one slot each, with the pairwise Ward costs.
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes: Vec<usize> = vec![1; n];
    let mut w: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| d.values()[[i, j]] * d.values()[[i, j]]).collect())
        .collect();

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let m = ids.len();
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for si in 0..m {
            for sj in si + 1..m {
                let (lo, hi) = if ids[si] < ids[sj] { (ids[si], ids[sj]) } else { (ids[sj], ids[si]) };
                let key = (w[si][sj], lo, hi);
                let better = match &best {
                    None => true,
                    Some((bw, blo, bhi, _, _)) => key < (*bw, *blo, *bhi),
                };
                if better {
                    best = Some((w[si][sj], lo, hi, si, sj));
                }
            }
        }
        let (cost, left, right, si, sj) = best.expect("at least one pair while clustering");
        let merged_size = sizes[si] + sizes[sj];
        merges.push(Merge { left, right, height: cost.max(0.0).sqrt(), size: merged_size });

        // Lance-Williams row for the merged cluster against survivors.
        let a = sizes[si] as f64;
        let b = sizes[sj] as f64;
        let keep: Vec<usize> = (0..m).filter(|&k| k != si && k != sj).collect();
        let merged_row: Vec<f64> = keep
            .iter()
            .map(|&k| {
                let c = sizes[k] as f64;
                ((a + c) * w[si][k] + (b + c) * w[sj][k] - c * w[si][sj]) / (a + b + c)
            })
            .collect();

        let mut next_w: Vec<Vec<f64>> = keep
            .iter()
            .map(|&p| keep.iter().map(|&q| w[p][q]).collect())
            .collect();
        for (row, &val) in next_w.iter_mut().zip(&merged_row) {
            row.push(val);
        }
        let mut last: Vec<f64> = merged_row;
        last.push(0.0);
        next_w.push(last);

        let mut next_ids: Vec<usize> = keep.iter().map(|&k| ids[k]).collect();
        next_ids.push(n + step);
        let mut next_sizes: Vec<usize> = keep.iter().map(|&k| sizes[k]).collect();
        next_sizes.push(merged_size);
        w = next_w;
        ids = next_ids;
        sizes = next_sizes;
    }

    Ok(Dendrogram { labels: d.tickers().to_vec(), merges })
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    fn children(&self, id: usize) -> Option<(usize, usize)> {
        let n = self.n_leaves();
        (id >= n).then(|| (self.merges[id - n].left, self.merges[id - n].right))
    }

    /// Leaves in tree order, left branch first.
    pub fn leaf_order(&self) -> Vec<usize> {
        let n = self.n_leaves();
        let mut out = Vec::with_capacity(n);
        let mut stack = vec![n + self.merges.len() - 1];
        if self.merges.is_empty() {
            return vec![0];
        }
        while let Some(id) = stack.pop() {
            match self.children(id) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(id),
            }
        }
        out
    }

    /// Cluster index per leaf after undoing the last k−1 merges. Indices
    /// run 0..k in order of first appearance along the leaves.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        let n = self.n_leaves();
        if k == 0 || k > n {
            return Err(Error::InvalidParameter {
                detail: format!("cannot cut a {n}-leaf tree into {k} clusters"),
            });
        }
        // Union-find over leaves, replaying the first n−k merges.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        // A representative leaf for every cluster id seen so far.
        let mut member: Vec<usize> = (0..n).collect();
        for merge in &self.merges[..n - k] {
            let (a, b) = (member[merge.left], member[merge.right]);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[rb] = ra;
            member.push(a);
        }
        let mut label_of_root = std::collections::HashMap::new();
        let mut out = Vec::with_capacity(n);
        for leaf in 0..n {
            let root = find(&mut parent, leaf);
            let next = label_of_root.len();
            out.push(*label_of_root.entry(root).or_insert(next));
        }
        Ok(out)
    }

    /// Newick serialization with branch lengths on the merge-height
    /// scale. Label characters that clash with the grammar become `_`.
    pub fn to_newick(&self) -> String {
        let n = self.n_leaves();
        if self.merges.is_empty() {
            return format!("{};", sanitize(&self.labels[0]));
        }
        let root = n + self.merges.len() - 1;
        let root_height = self.merges[root - n].height;
        let (l, r) = self.children(root).expect("root is a merge");
        format!("({},{});", self.subtree(l, root_height), self.subtree(r, root_height))
    }

    fn subtree(&self, id: usize, parent_height: f64) -> String {
        match self.children(id) {
            None => format!("{}:{}", sanitize(&self.labels[id]), sig15(parent_height)),
            Some((l, r)) => {
                let h = self.merges[id - self.n_leaves()].height;
                let length = (parent_height - h).max(0.0);
                format!("({},{}):{}", self.subtree(l, h), self.subtree(r, h), sig15(length))
            }
        }
    }
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| match c {
            ' ' | '\t' | ',' | '(' | ')' | ':' | ';' | '\'' | '"' | '[' | ']' => '_',
            _ => c,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn dist(labels: &[&str], entries: &[(usize, usize, f64)]) -> DistanceMatrix {
        let n = labels.len();
        let mut v = Array2::zeros((n, n));
        for &(i, j, d) in entries {
            v[[i, j]] = d;
            v[[j, i]] = d;
        }
        DistanceMatrix::from_parts(labels.iter().map(|s| s.to_string()).collect(), v).unwrap()
    }

    fn three_leaf() -> DistanceMatrix {
        dist(&["A", "B", "C"], &[(0, 1, 1.0), (0, 2, 5.0), (1, 2, 5.0)])
    }

    #[test]
    fn three_leaf_heights_follow_the_recurrence() {
        let t = ward_dendrogram(&three_leaf()).unwrap();
        let m = t.merges();
        assert_eq!(m.len(), 2);
        assert_eq!((m[0].left, m[0].right, m[0].size), (0, 1, 2));
        assert_eq!(m[0].height, 1.0);
        assert_eq!((m[1].left, m[1].right, m[1].size), (2, 3, 3));
        // √((2·25 + 2·25 − 1)/3) = √33, computed independently.
        assert!((m[1].height - 5.744562646538029).abs() < 1e-14);
    }

    #[test]
    fn two_leaves_merge_at_their_distance() {
        let t = ward_dendrogram(&dist(&["A", "B"], &[(0, 1, 2.0)])).unwrap();
        assert_eq!(t.merges(), &[Merge { left: 0, right: 1, height: 2.0, size: 2 }]);
        assert_eq!(t.to_newick(), "(A:2.00000000000000e0,B:2.00000000000000e0);");
    }

    #[test]
    fn newick_is_frozen_for_the_three_leaf_tree() {
        let t = ward_dendrogram(&three_leaf()).unwrap();
        assert_eq!(
            t.to_newick(),
            "(C:5.74456264653803e0,(A:1.00000000000000e0,B:1.00000000000000e0):4.74456264653803e0);"
        );
        assert_eq!(t.leaf_order(), vec![2, 0, 1]);
    }

    #[test]
    fn cuts_split_in_merge_order() {
        let t = ward_dendrogram(&three_leaf()).unwrap();
        assert_eq!(t.cut(1).unwrap(), vec![0, 0, 0]);
        assert_eq!(t.cut(2).unwrap(), vec![0, 0, 1]);
        assert_eq!(t.cut(3).unwrap(), vec![0, 1, 2]);
        assert!(t.cut(0).is_err());
        assert!(t.cut(4).is_err());
    }

    #[test]
    fn paired_structure_is_recovered() {
        let d = dist(
            &["A", "B", "C", "D"],
            &[
                (0, 1, 0.1),
                (2, 3, 0.1),
                (0, 2, 1.0),
                (0, 3, 1.0),
                (1, 2, 1.0),
                (1, 3, 1.0),
            ],
        );
        let t = ward_dendrogram(&d).unwrap();
        let m = t.merges();
        assert_eq!((m[0].left, m[0].right), (0, 1));
        assert_eq!((m[1].left, m[1].right), (2, 3));
        assert_eq!((m[2].left, m[2].right), (4, 5));
        assert!((m[2].height - (7.96f64 / 4.0).sqrt()).abs() < 1e-12);
        assert_eq!(t.cut(2).unwrap(), vec![0, 0, 1, 1]);
        assert_eq!(t.leaf_order(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn equidistant_points_break_ties_by_id() {
        let d = dist(&["A", "B", "C"], &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]);
        let t = ward_dendrogram(&d).unwrap();
        assert_eq!((t.merges()[0].left, t.merges()[0].right), (0, 1));
        assert!(t.merges()[1].height >= t.merges()[0].height);
    }

    #[test]
    fn coincident_points_stay_at_height_zero() {
        let d = dist(&["A", "B", "C"], &[]);
        let t = ward_dendrogram(&d).unwrap();
        assert!(t.merges().iter().all(|m| m.height == 0.0));
    }

    #[test]
    fn single_leaf_is_a_valid_tree() {
        let t = ward_dendrogram(&dist(&["SOLO"], &[])).unwrap();
        assert!(t.merges().is_empty());
        assert_eq!(t.to_newick(), "SOLO;");
        assert_eq!(t.leaf_order(), vec![0]);
        assert_eq!(t.cut(1).unwrap(), vec![0]);
    }

    #[test]
    fn labels_are_sanitized_in_newick() {
        let d = dist(&["A B(x):y", "plain"], &[(0, 1, 1.0)]);
        let t = ward_dendrogram(&d).unwrap();
        let nw = t.to_newick();
        assert!(nw.starts_with("(A_B_x__y:"));
        assert_eq!(nw.matches('(').count(), 1);
    }

    proptest! {
        #[test]
        fn heights_are_monotone_and_cuts_are_complete(seed in 0u64..3000, n in 2usize..9) {
            let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(12345);
            let mut next = move || {
                state = state.wrapping_mul(2862933555777941757).wrapping_add(12345);
                (state >> 11) as f64 / (1u64 << 53) as f64
            };
            // Euclidean distances from random planar points.
            let pts: Vec<(f64, f64)> = (0..n).map(|_| (next() * 10.0, next() * 10.0)).collect();
            let mut v = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
                    v[[i, j]] = (dx * dx + dy * dy).sqrt();
                }
            }
            let d = DistanceMatrix::from_parts((0..n).map(|i| format!("P{i}")).collect(), v).unwrap();
            let t = ward_dendrogram(&d).unwrap();
            for pair in t.merges().windows(2) {
                prop_assert!(pair[1].height >= pair[0].height - 1e-12);
            }
            prop_assert_eq!(t.merges().last().unwrap().size, n);
            let mut order = t.leaf_order();
            order.sort_unstable();
            prop_assert_eq!(order, (0..n).collect::<Vec<_>>());
            for k in 1..=n {
                let cut = t.cut(k).unwrap();
                let distinct: std::collections::HashSet<_> = cut.iter().copied().collect();
                prop_assert_eq!(distinct.len(), k);
                prop_assert!(cut.iter().all(|&c| c < k));
            }
        }
    }
}
