//! Standard graph families and random connected graphs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::WeightedGraph;

fn unit(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> WeightedGraph {
    WeightedGraph::from_unit_edges(n, edges).expect("generator edges are valid")
}

/// One-path graph `0 - 1 - ... - (n-1)` with unit weights.
pub fn path(n: usize) -> WeightedGraph {
    unit(n, (1..n).map(|i| (i - 1, i)))
}

/// Weighted one-path graph; `weights[i]` is the weight of `{i, i+1}`.
pub fn weighted_path(weights: &[f64]) -> WeightedGraph {
    let n = weights.len() + 1;
    WeightedGraph::from_edges(n, weights.iter().enumerate().map(|(i, &w)| (i, i + 1, w)))
        .expect("positive path weights")
}

pub fn cycle(n: usize) -> WeightedGraph {
    assert!(n >= 3, "cycle needs at least 3 nodes");
    unit(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Star with center 0 and `n - 1` leaves.
pub fn star(n: usize) -> WeightedGraph {
    unit(n, (1..n).map(|i| (0, i)))
}

pub fn complete(n: usize) -> WeightedGraph {
    unit(n, (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))))
}

/// `rows x cols` lattice, row-major numbering.
pub fn grid(rows: usize, cols: usize) -> WeightedGraph {
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    unit(rows * cols, edges)
}

/// Heap-ordered binary tree: node `i` has children `2i+1` and `2i+2`.
pub fn binary_tree(n: usize) -> WeightedGraph {
    unit(n, (1..n).map(|i| ((i - 1) / 2, i)))
}

fn weight<R: Rng + ?Sized>(rng: &mut R, weighted: bool) -> f64 {
    if weighted {
        rng.random_range(0.5..2.0)
    } else {
        1.0
    }
}

fn shuffled_labels<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    labels
}

/// Uniform random recursive tree with shuffled labels.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, n: usize, weighted: bool) -> WeightedGraph {
    let labels = shuffled_labels(rng, n);
    let edges: Vec<_> = (1..n)
        .map(|i| {
            let parent = rng.random_range(0..i);
            (labels[parent], labels[i], weight(rng, weighted))
        })
        .collect();
    WeightedGraph::from_edges(n, edges).expect("tree edges are valid")
}

/// Random spanning tree plus each remaining pair with probability
/// `extra_prob`; labels are shuffled.
pub fn random_connected<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    extra_prob: f64,
    weighted: bool,
) -> WeightedGraph {
    let labels = shuffled_labels(rng, n);
    let mut present = std::collections::BTreeSet::new();
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = rng.random_range(0..i);
        present.insert((parent, i));
        edges.push((labels[parent], labels[i], weight(rng, weighted)));
    }
    for p in 0..n {
        for q in p + 1..n {
            if !present.contains(&(p, q)) && rng.random_bool(extra_prob) {
                edges.push((labels[p], labels[q], weight(rng, weighted)));
            }
        }
    }
    WeightedGraph::from_edges(n, edges).expect("generated edges are valid")
}
