//! Minimum spanning trees over a distance matrix.
//!
//! Two constructions are available and agree on the total weight (the
//! weight multiset of a minimum spanning tree is unique even when the
//! tree is not): Kruskal over edges sorted by (weight, i, j), and Prim
//! grown from node 0 with the same lexicographic tie rule. Edges are
//! reported as (i, j) with i < j, sorted by index pair; the total is
//! accumulated over weights in ascending order so both algorithms
//! produce bit-identical sums.

use super::DistanceMatrix;
use crate::textio::sig15;
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MstAlgorithm {
    Kruskal,
    Prim,
}

/// Tree edges with their labels and the ascending-order weight sum.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    tickers: Vec<String>,
    /// (i, j, weight) with i < j, sorted by (i, j).
    edges: Vec<(usize, usize, f64)>,
    total_weight: f64,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Dsu {
        Dsu((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[rb] = ra;
        ra != rb
    }
}

/// Builds the minimum spanning tree of the complete weighted graph
/// described by `d`. A single-node input yields an empty tree.
pub fn minimum_spanning_tree(d: &DistanceMatrix, algorithm: MstAlgorithm) -> SpanningTree {
    let n = d.n();
    let v = d.values();
    let mut edges: Vec<(usize, usize, f64)> = match algorithm {
        MstAlgorithm::Kruskal => {
            let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in i + 1..n {
                    candidates.push((v[[i, j]], i, j));
                }
            }
            candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite weights"));
            let mut dsu = Dsu::new(n);
            let mut out = Vec::with_capacity(n.saturating_sub(1));
            for (w, i, j) in candidates {
                if dsu.union(i, j) {
                    out.push((i, j, w));
                    if out.len() + 1 == n {
                        break;
                    }
                }
            }
            out
        }
        MstAlgorithm::Prim => {
            let mut in_tree = vec![false; n];
            in_tree[0] = true;
            // Cheapest connection of each outside node to the tree.
            let mut best: Vec<(f64, usize)> = (0..n).map(|k| (v[[0, k]], 0)).collect();
            let mut out = Vec::with_capacity(n.saturating_sub(1));
            for _ in 1..n {
                let mut pick: Option<(f64, usize, usize, usize)> = None;
                for k in 0..n {
                    if in_tree[k] {
                        continue;
                    }
                    let (w, from) = best[k];
                    let (lo, hi) = if from < k { (from, k) } else { (k, from) };
                    let key = (w, lo, hi);
                    if pick.is_none_or(|(pw, plo, phi, _)| key < (pw, plo, phi)) {
                        pick = Some((w, lo, hi, k));
                    }
                }
                let (w, lo, hi, k) = pick.expect("unvisited node remains");
                out.push((lo, hi, w));
                in_tree[k] = true;
                for t in 0..n {
                    if !in_tree[t] && v[[k, t]] < best[t].0 {
                        best[t] = (v[[k, t]], k);
                    }
                }
            }
            out
        }
    };

    let mut weights: Vec<f64> = edges.iter().map(|&(_, _, w)| w).collect();
    weights.sort_by(|a, b| a.partial_cmp(b).expect("finite weights"));
    let total_weight = weights.iter().sum();
    edges.sort_by_key(|&(i, j, _)| (i, j));
    SpanningTree { tickers: d.tickers().to_vec(), edges, total_weight }
}

impl SpanningTree {
    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn n(&self) -> usize {
        self.tickers.len()
    }

    /// Graphviz `graph` document, one undirected edge per line.
    pub fn write_dot<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "graph mst {{")?;
        for &(i, j, weight) in &self.edges {
            writeln!(
                w,
                "  \"{}\" -- \"{}\" [weight={}];",
                dot_escape(&self.tickers[i]),
                dot_escape(&self.tickers[j]),
                sig15(weight)
            )?;
        }
        writeln!(w, "}}")
    }

    /// Edge list CSV.
    pub fn write_edges_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "from,to,weight")?;
        for &(i, j, weight) in &self.edges {
            writeln!(w, "{},{},{}", self.tickers[i], self.tickers[j], sig15(weight))?;
        }
        Ok(())
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
