//! Weighted undirected graphs, connectivity, cut-edges and bandwidth-reducing
//! relabeling.
//!
//! Nodes are indexed `0..n` internally. File formats and user-facing output
//! use 1-based ids; the conversion happens at the I/O boundary.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};

/// Undirected graph with positive edge weights and optional self-loops.
///
/// Immutable once built. Each edge is stored once per endpoint in sorted
/// neighbor lists; loops are kept apart so that `degree(i) = sum_j a_ij`
/// counts a loop of weight `w` exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
    degrees: Vec<f64>,
    edge_count: usize,
}

/// Collects edges, rejecting conflicting duplicates, then freezes them
/// into a [`WeightedGraph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Adds `{p, q}` with weight `w` (0-based ids); `p == q` adds a loop.
    ///
    /// `line` is only used for error reporting (0 when not reading a file).
    pub fn add(&mut self, p: usize, q: usize, w: f64, line: usize) -> Result<()> {
        for id in [p, q] {
            if id >= self.n {
                return Err(Error::NodeOutOfRange {
                    id: id + 1,
                    n: self.n,
                });
            }
        }
        let valid = if p == q { w >= 0.0 } else { w > 0.0 };
        if !valid || !w.is_finite() {
            return Err(Error::NonPositiveWeight {
                line,
                p: p + 1,
                q: q + 1,
                weight: w,
            });
        }
        let key = (p.min(q), p.max(q));
        match self.entries.entry(key) {
            Entry::Vacant(slot) => {
                slot.insert(w);
            }
            Entry::Occupied(slot) => {
                if *slot.get() != w {
                    return Err(Error::DuplicateEdge {
                        p: key.0 + 1,
                        q: key.1 + 1,
                        first: *slot.get(),
                        second: w,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn build(self) -> WeightedGraph {
        let n = self.n;
        let mut adj = vec![Vec::new(); n];
        let mut loops = vec![0.0; n];
        let mut edge_count = 0;
        for (&(p, q), &w) in &self.entries {
            if p == q {
                loops[p] = w;
            } else {
                adj[p].push((q, w));
                adj[q].push((p, w));
                edge_count += 1;
            }
        }
        for list in &mut adj {
            list.sort_by_key(|&(j, _)| j);
        }
        let degrees = (0..n).map(|i| row_sum(&adj[i], i, loops[i])).collect();
        WeightedGraph {
            adj,
            loops,
            degrees,
            edge_count,
        }
    }
}

// d_i = (A 1)_i, summed in ascending column order with the loop at column i.
fn row_sum(row: &[(usize, f64)], i: usize, loop_weight: f64) -> f64 {
    let mut sum = 0.0;
    let mut loop_done = loop_weight == 0.0;
    for &(j, w) in row {
        if !loop_done && j > i {
            sum += loop_weight;
            loop_done = true;
        }
        sum += w;
    }
    if !loop_done {
        sum += loop_weight;
    }
    sum
}

impl WeightedGraph {
    /// Builds a graph from 0-based `(p, q, weight)` triples.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut builder = GraphBuilder::new(n);
        for (p, q, w) in edges {
            builder.add(p, q, w, 0)?;
        }
        Ok(builder.build())
    }

    /// Same as [`from_edges`](Self::from_edges) with every weight set to 1.
    pub fn from_unit_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(n, edges.into_iter().map(|(p, q)| (p, q, 1.0)))
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Number of off-diagonal edges (loops excluded).
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// `||d||_1`, the total weight counted from both endpoints.
    pub fn volume(&self) -> f64 {
        self.degrees.iter().sum()
    }

    pub fn loop_weight(&self, i: usize) -> f64 {
        self.loops[i]
    }

    /// Sorted `(neighbor, weight)` list of `i`, loops excluded.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    /// `a_pq`, zero for absent pairs.
    pub fn weight(&self, p: usize, q: usize) -> f64 {
        if p == q {
            return self.loops[p];
        }
        let row = &self.adj[p];
        match row.binary_search_by_key(&q, |&(j, _)| j) {
            Ok(k) => row[k].1,
            Err(_) => 0.0,
        }
    }

    pub fn has_edge(&self, p: usize, q: usize) -> bool {
        p != q && self.weight(p, q) > 0.0
    }

    /// Edges as `(p, q, a_pq)` with `p < q`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(p, row)| {
            row.iter()
                .filter(move |&&(q, _)| q > p)
                .map(move |&(q, w)| (p, q, w))
        })
    }

    /// Loops as `(node, weight)` for nodes with a positive loop weight.
    pub fn loops(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.loops
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w > 0.0)
            .map(|(i, &w)| (i, w))
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut comp = vec![root];
            let mut k = 0;
            while k < comp.len() {
                let v = comp[k];
                k += 1;
                for &(u, _) in &self.adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && self.components().len() == 1
    }

    /// `Ok(())` when connected; otherwise names the smallest component that
    /// does not contain node 1.
    pub fn check_connected(&self) -> Result<()> {
        let comps = self.components();
        if comps.len() <= 1 {
            return Ok(());
        }
        let other = comps[1..]
            .iter()
            .min_by_key(|c| c.len())
            .expect("at least two components");
        Err(Error::Disconnected {
            component: other.iter().map(|&v| v + 1).collect(),
        })
    }

    /// Cut-edges as sorted `(p, q)` pairs with `p < q` (iterative low-link DFS).
    pub fn bridges(&self) -> Result<Vec<(usize, usize)>> {
        self.check_connected()?;
        let n = self.node_count();
        let mut order = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut clock = 0;
        let mut out = Vec::new();
        // (node, parent, next neighbor position)
        let mut stack: Vec<(usize, usize, usize)> = Vec::new();
        for root in 0..n {
            if order[root] != usize::MAX {
                continue;
            }
            order[root] = clock;
            low[root] = clock;
            clock += 1;
            stack.push((root, usize::MAX, 0));
            while let Some(top) = stack.last_mut() {
                let (v, parent, pos) = *top;
                if pos < self.adj[v].len() {
                    top.2 += 1;
                    let u = self.adj[v][pos].0;
                    if u == parent {
                        continue;
                    }
                    if order[u] == usize::MAX {
                        order[u] = clock;
                        low[u] = clock;
                        clock += 1;
                        stack.push((u, v, 0));
                    } else {
                        low[v] = low[v].min(order[u]);
                    }
                } else {
                    stack.pop();
                    if parent != usize::MAX {
                        low[parent] = low[parent].min(low[v]);
                        if low[v] > order[parent] {
                            out.push((parent.min(v), parent.max(v)));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// `b = 1 + max |i - j|` over edges; 1 for an edgeless graph.
    pub fn half_bandwidth(&self) -> usize {
        self.edges().map(|(p, q, _)| q - p).max().unwrap_or(0) + 1
    }

    /// Relabels nodes so that new node `i` is old node `perm.forward()[i]`.
    pub fn permute(&self, perm: &NodePermutation) -> WeightedGraph {
        assert_eq!(perm.len(), self.node_count(), "permutation size mismatch");
        let mut builder = GraphBuilder::new(self.node_count());
        for (p, q, w) in self.edges() {
            builder
                .add(perm.new_index(p), perm.new_index(q), w, 0)
                .expect("relabeling keeps edges valid");
        }
        for (i, w) in self.loops() {
            builder
                .add(perm.new_index(i), perm.new_index(i), w, 0)
                .expect("relabeling keeps loops valid");
        }
        builder.build()
    }

    /// Reverse Cuthill-McKee relabeling from a pseudo-peripheral node.
    ///
    /// Returns the relabeled graph, the permutation and its half-bandwidth.
    /// The identity is kept when the heuristic does not strictly shrink `b`.
    pub fn reorder_for_bandwidth(&self) -> (WeightedGraph, NodePermutation, usize) {
        let n = self.node_count();
        let original = self.half_bandwidth();
        let order = self.reverse_cuthill_mckee();
        let perm = NodePermutation::from_forward(order).expect("RCM yields a permutation");
        let relabeled = self.permute(&perm);
        let b = relabeled.half_bandwidth();
        if b < original {
            (relabeled, perm, b)
        } else {
            (self.clone(), NodePermutation::identity(n), original)
        }
    }

    fn reverse_cuthill_mckee(&self) -> Vec<usize> {
        let n = self.node_count();
        let deg = |v: usize| self.adj[v].len();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for comp in self.components() {
            let start = comp
                .iter()
                .copied()
                .min_by_key(|&v| (deg(v), v))
                .expect("components are nonempty");
            let root = self.pseudo_peripheral(start);
            placed[root] = true;
            let first = order.len();
            order.push(root);
            let mut k = first;
            let mut next = Vec::new();
            while k < order.len() {
                let v = order[k];
                k += 1;
                next.clear();
                next.extend(self.adj[v].iter().map(|&(u, _)| u).filter(|&u| !placed[u]));
                next.sort_unstable_by_key(|&u| (deg(u), u));
                for &u in &next {
                    placed[u] = true;
                    order.push(u);
                }
            }
        }
        order.reverse();
        order
    }

    fn pseudo_peripheral(&self, start: usize) -> usize {
        let mut root = start;
        let mut levels = self.bfs_levels(root);
        loop {
            let last = levels.last().expect("root level");
            let candidate = last
                .iter()
                .copied()
                .min_by_key(|&v| (self.adj[v].len(), v))
                .expect("nonempty level");
            let candidate_levels = self.bfs_levels(candidate);
            if candidate_levels.len() > levels.len() {
                root = candidate;
                levels = candidate_levels;
            } else {
                return root;
            }
        }
    }

    fn bfs_levels(&self, root: usize) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.node_count()];
        seen[root] = true;
        let mut levels = vec![vec![root]];
        loop {
            let mut next = Vec::new();
            for &v in levels.last().expect("level") {
                for &(u, _) in &self.adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        next.push(u);
                    }
                }
            }
            if next.is_empty() {
                return levels;
            }
            levels.push(next);
        }
    }

    /// Unweighted hop distances from `source`; `usize::MAX` when unreachable.
    pub fn hop_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &self.adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }
}

/// Bijective relabeling: `forward[new] = old`, `inverse[old] = new`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePermutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl NodePermutation {
    pub fn identity(n: usize) -> Self {
        Self {
            forward: (0..n).collect(),
            inverse: (0..n).collect(),
        }
    }

    pub fn from_forward(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (new, &old) in forward.iter().enumerate() {
            if old >= n || inverse[old] != usize::MAX {
                return Err(Error::InvalidArgument(format!(
                    "not a permutation of 0..{n}"
                )));
            }
            inverse[old] = new;
        }
        Ok(Self { forward, inverse })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn old_index(&self, new: usize) -> usize {
        self.forward[new]
    }

    pub fn new_index(&self, old: usize) -> usize {
        self.inverse[old]
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &j)| i == j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn degrees_count_loops_once() {
        let g = WeightedGraph::from_edges(2, [(0, 1, 2.0), (0, 0, 0.5)]).unwrap();
        assert_eq!(g.degree(0), 2.5);
        assert_eq!(g.degree(1), 2.0);
        assert_eq!(g.volume(), 4.5);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(1, 0), 2.0);
        assert_eq!(g.weight(0, 0), 0.5);
    }

    #[test]
    fn builder_rejects_bad_input() {
        let mut b = GraphBuilder::new(3);
        assert!(matches!(
            b.add(0, 1, -0.5, 4),
            Err(Error::NonPositiveWeight { line: 4, .. })
        ));
        assert!(matches!(
            b.add(0, 3, 1.0, 1),
            Err(Error::NodeOutOfRange { id: 4, n: 3 })
        ));
        b.add(0, 1, 1.0, 1).unwrap();
        b.add(1, 0, 1.0, 2).unwrap();
        assert!(matches!(
            b.add(1, 0, 2.0, 3),
            Err(Error::DuplicateEdge { p: 1, q: 2, .. })
        ));
        assert_eq!(b.build().edge_count(), 1);
    }

    #[test]
    fn connectivity() {
        assert!(generators::path(2).is_connected());
        assert!(generators::star(10).is_connected());
        let g = WeightedGraph::from_unit_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(!g.is_connected());
        match g.check_connected() {
            Err(Error::Disconnected { component }) => assert_eq!(component, vec![3, 4]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bridges_of_small_graphs() {
        assert_eq!(generators::path(3).bridges().unwrap(), vec![(0, 1), (1, 2)]);
        assert!(generators::cycle(10).bridges().unwrap().is_empty());
        let g =
            WeightedGraph::from_unit_edges(5, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4)]).unwrap();
        assert_eq!(g.bridges().unwrap(), vec![(0, 4)]);
        let disconnected = WeightedGraph::from_unit_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(disconnected.bridges().is_err());
    }

    #[test]
    fn ordered_path_keeps_identity() {
        let (g, perm, b) = generators::path(8).reorder_for_bandwidth();
        assert!(perm.is_identity());
        assert_eq!(b, 2);
        assert_eq!(g, generators::path(8));
    }

    #[test]
    fn star_bandwidth_is_bounded() {
        let (_, _, b) = generators::star(12).reorder_for_bandwidth();
        assert!(b <= 12);
    }

    #[test]
    fn permutation_roundtrip() {
        let perm = NodePermutation::from_forward(vec![2, 0, 1]).unwrap();
        for old in 0..3 {
            assert_eq!(perm.old_index(perm.new_index(old)), old);
        }
        assert!(NodePermutation::from_forward(vec![0, 0, 1]).is_err());
    }
}
