//! Immutable weighted digraph with the adjacency indexes ESU needs.

use std::collections::HashMap;
use std::fmt;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense 0-based node index. The label lives in the owning graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    /// Flow volume in US dollars.
    pub weight: f64,
}

/// Row-bitset adjacency for small graphs; `None` above this node count.
const DENSE_LIMIT: usize = 8192;

#[derive(Clone, Debug, PartialEq)]
struct BitMatrix {
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix {
            words,
            bits: vec![0; words * n],
        }
    }

    fn set(&mut self, r: usize, c: usize) {
        self.bits[r * self.words + c / 64] |= 1 << (c % 64);
    }

    #[inline]
    fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }
}

/// Directed graph with at most one edge per ordered pair and no self-loops.
///
/// `edges` is sorted by `(src, dst)`; every adjacency list is sorted
/// ascending. `undirected_adj(v)` is the duplicate-free union of the out- and
/// in-neighbours of `v`, which is what ESU uses to judge connectivity.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedDigraph {
    labels: Vec<String>,
    edges: Vec<Edge>,
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    undirected_adj: Vec<Vec<NodeId>>,
    dense: Option<BitMatrix>,
    self_loops_dropped: usize,
}

impl WeightedDigraph {
    /// Graph with no nodes and no edges.
    pub fn empty() -> Self {
        Self::from_parts(Vec::new(), Vec::new(), 0)
    }

    /// Assemble a graph from labels and an edge list over dense indices.
    ///
    /// Duplicate ordered pairs are merged by summing weight and self-loops are
    /// dropped (and counted).
    pub fn from_index_edges(labels: Vec<String>, edges: impl IntoIterator<Item = Edge>) -> Self {
        let n = labels.len();
        let mut loops = 0usize;
        let mut list: Vec<Edge> = Vec::new();
        for e in edges {
            assert!(e.src.index() < n && e.dst.index() < n, "edge endpoint out of range");
            if e.src == e.dst {
                loops += 1;
                continue;
            }
            list.push(e);
        }
        list.sort_by_key(|e| (e.src, e.dst));
        let mut merged: Vec<Edge> = Vec::with_capacity(list.len());
        for e in list {
            match merged.last_mut() {
                Some(last) if last.src == e.src && last.dst == e.dst => last.weight += e.weight,
                _ => merged.push(e),
            }
        }
        Self::from_parts(labels, merged, loops)
    }

    fn from_parts(labels: Vec<String>, edges: Vec<Edge>, self_loops_dropped: usize) -> Self {
        let n = labels.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for e in &edges {
            out_adj[e.src.index()].push(e.dst);
            in_adj[e.dst.index()].push(e.src);
        }
        // edges are sorted by (src, dst), so out lists are already ordered
        for l in &mut in_adj {
            l.sort_unstable();
        }
        let undirected_adj = out_adj
            .iter()
            .zip(&in_adj)
            .map(|(o, i)| merge_sorted(o, i))
            .collect();
        let dense = (n <= DENSE_LIMIT).then(|| {
            let mut m = BitMatrix::new(n);
            for e in &edges {
                m.set(e.src.index(), e.dst.index());
            }
            m
        });
        WeightedDigraph {
            labels,
            edges,
            out_adj,
            in_adj,
            undirected_adj,
            dense,
            self_loops_dropped,
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.labels.len() as u32).map(NodeId)
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == label).map(|i| NodeId(i as u32))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.out_adj[v.index()]
    }

    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_adj[v.index()]
    }

    pub fn undirected_adj(&self, v: NodeId) -> &[NodeId] {
        &self.undirected_adj[v.index()]
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        self.out_adj.iter().map(Vec::len).collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        self.in_adj.iter().map(Vec::len).collect()
    }

    /// Self-loop records dropped while building this graph.
    pub fn self_loops_dropped(&self) -> usize {
        self.self_loops_dropped
    }

    #[inline]
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        match &self.dense {
            Some(m) => m.get(u.index(), v.index()),
            None => self.out_adj[u.index()].binary_search(&v).is_ok(),
        }
    }

    #[inline]
    pub fn adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.has_edge(u, v) || self.has_edge(v, u)
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.edges
            .binary_search_by_key(&(u, v), |e| (e.src, e.dst))
            .ok()
            .map(|i| self.edges[i].weight)
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.weight).min_by(f64::total_cmp)
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.weight).max_by(f64::total_cmp)
    }

    /// Subgraph on the edges accepted by `keep`. Nodes left without any edge
    /// are dropped; survivors keep their relative order and labels.
    pub fn edge_subgraph(&self, mut keep: impl FnMut(&Edge) -> bool) -> WeightedDigraph {
        let kept: Vec<Edge> = self.edges.iter().filter(|e| keep(e)).copied().collect();
        let mut used = vec![false; self.node_count()];
        for e in &kept {
            used[e.src.index()] = true;
            used[e.dst.index()] = true;
        }
        let mut remap = vec![u32::MAX; self.node_count()];
        let mut labels = Vec::new();
        for (i, _) in used.iter().enumerate().filter(|(_, &u)| u) {
            remap[i] = labels.len() as u32;
            labels.push(self.labels[i].clone());
        }
        let edges = kept
            .into_iter()
            .map(|e| Edge {
                src: NodeId(remap[e.src.index()]),
                dst: NodeId(remap[e.dst.index()]),
                weight: e.weight,
            })
            .collect();
        // remapping is monotone, so (src, dst) order is preserved
        Self::from_parts(labels, edges, 0)
    }
}

fn merge_sorted(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Build a graph from `(src_label, dst_label, weight)` records.
///
/// Nodes get dense ids in first-seen order. Records on the same ordered pair
/// are merged by summing their weights; self-loops are dropped with a warning.
pub fn build_graph<S: AsRef<str>>(records: impl IntoIterator<Item = (S, S, f64)>) -> Result<WeightedDigraph> {
    let mut index: HashMap<String, NodeId> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let mut loops = 0usize;
    let mut seen_any = false;
    let mut intern = |label: &str, labels: &mut Vec<String>| -> NodeId {
        if let Some(&id) = index.get(label) {
            return id;
        }
        let id = NodeId(labels.len() as u32);
        labels.push(label.to_owned());
        index.insert(label.to_owned(), id);
        id
    };
    for (src, dst, weight) in records {
        seen_any = true;
        let (src, dst) = (src.as_ref(), dst.as_ref());
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::InvalidWeight {
                src: src.to_owned(),
                dst: dst.to_owned(),
                weight,
            });
        }
        if src == dst {
            loops += 1;
            continue;
        }
        let s = intern(src, &mut labels);
        let d = intern(dst, &mut labels);
        edges.push(Edge { src: s, dst: d, weight });
    }
    if !seen_any {
        return Err(Error::EmptyGraph("no records"));
    }
    if loops > 0 {
        warn!("dropped {loops} self-loop record(s)");
    }
    let mut g = WeightedDigraph::from_index_edges(labels, edges);
    g.self_loops_dropped = loops;
    Ok(g)
}

/// `N(w) \ (V_sub ∪ N(V_sub))` over undirected adjacency, ascending.
pub fn exclusive_neighborhood(g: &WeightedDigraph, w: NodeId, v_sub: &[NodeId]) -> Vec<NodeId> {
    debug_assert!(!v_sub.contains(&w));
    g.undirected_adj(w)
        .iter()
        .copied()
        .filter(|&u| !v_sub.contains(&u) && !v_sub.iter().any(|&s| g.adjacent(s, u)))
        .collect()
}
