//! Independent reference implementations used as test oracles. None of these
//! call into the enumeration, classification or switching code under test.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trademotif::graph::{Edge, NodeId, WeightedDigraph};

/// Dense 0/1 adjacency of a digraph, built straight from its edge list.
pub fn adjacency(g: &WeightedDigraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for e in g.edges() {
        a[e.src.index()][e.dst.index()] = true;
    }
    a
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Code of the induced subgraph on `nodes`: entry (i, j) at bit k²−1−(ik+j).
pub fn oracle_code(a: &[Vec<bool>], nodes: &[usize]) -> u64 {
    let mut bits = String::new();
    for &u in nodes {
        for &v in nodes {
            bits.push(if u != v && a[u][v] { '1' } else { '0' });
        }
    }
    u64::from_str_radix(&bits, 2).unwrap()
}

fn weakly_connected(a: &[Vec<bool>], nodes: &[usize]) -> bool {
    let mut seen = vec![nodes[0]];
    let mut frontier = vec![nodes[0]];
    while let Some(u) = frontier.pop() {
        for &v in nodes {
            if !seen.contains(&v) && (a[u][v] || a[v][u]) {
                seen.push(v);
                frontier.push(v);
            }
        }
    }
    seen.len() == nodes.len()
}

/// Every connected k-subset with its induced code, by testing all C(n, k).
pub fn brute_force_subgraphs(g: &WeightedDigraph, k: usize) -> BTreeSet<(Vec<u32>, u64)> {
    let a = adjacency(g);
    combinations(g.node_count(), k)
        .into_iter()
        .filter(|c| weakly_connected(&a, c))
        .map(|c| (c.iter().map(|&v| v as u32).collect(), oracle_code(&a, &c)))
        .collect()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn code_to_matrix(code: u64, k: usize) -> Vec<Vec<bool>> {
    let bits = format!("{:0width$b}", code, width = k * k);
    let b: Vec<bool> = bits.chars().map(|c| c == '1').collect();
    (0..k).map(|i| b[i * k..(i + 1) * k].to_vec()).collect()
}

/// All codes isomorphic to `code`.
pub fn orbit(code: u64, k: usize) -> BTreeSet<u64> {
    let a = code_to_matrix(code, k);
    permutations(k)
        .into_iter()
        .map(|p| {
            let relabeled: Vec<Vec<bool>> = (0..k).map(|i| (0..k).map(|j| a[p[i]][p[j]]).collect()).collect();
            oracle_code(&relabeled, &(0..k).collect::<Vec<_>>())
        })
        .collect()
}

pub fn code_is_connected(code: u64, k: usize) -> bool {
    weakly_connected(&code_to_matrix(code, k), &(0..k).collect::<Vec<_>>())
}

pub fn loop_free_codes(k: usize) -> impl Iterator<Item = u64> {
    (0..1u64 << (k * k)).filter(move |&c| (0..k).all(|i| c >> (k * k - 1 - (i * k + i)) & 1 == 0))
}

/// Uniform simple digraph with the degree sequences of `g`, by pairing out-
/// and in-stubs at random and rejecting loops and multi-arcs.
pub fn configuration_model(g: &WeightedDigraph, rng: &mut ChaCha8Rng) -> WeightedDigraph {
    let mut outs: Vec<u32> = Vec::new();
    let mut ins: Vec<u32> = Vec::new();
    for e in g.edges() {
        outs.push(e.src.0);
        ins.push(e.dst.0);
    }
    'retry: loop {
        // Fisher-Yates on the in-stubs
        for i in (1..ins.len()).rev() {
            let j = rng.random_range(0..=i);
            ins.swap(i, j);
        }
        let mut seen = BTreeSet::new();
        for (&u, &v) in outs.iter().zip(&ins) {
            if u == v || !seen.insert((u, v)) {
                continue 'retry;
            }
        }
        let edges = outs.iter().zip(&ins).map(|(&u, &v)| Edge {
            src: NodeId(u),
            dst: NodeId(v),
            weight: 1.0,
        });
        return WeightedDigraph::from_index_edges(g.labels().to_vec(), edges);
    }
}

/// Triad class of every connected 3-subset, keyed by the smallest member of
/// the orbit, via brute force.
pub fn triad_concentrations(g: &WeightedDigraph) -> std::collections::BTreeMap<u64, f64> {
    let subs = brute_force_subgraphs(g, 3);
    let total = subs.len() as f64;
    let mut counts = std::collections::BTreeMap::new();
    for (_, code) in subs {
        let c = *orbit(code, 3).iter().next().unwrap();
        *counts.entry(c).or_insert(0.0) += 1.0;
    }
    counts.values_mut().for_each(|v| *v *= 100.0 / total);
    counts
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}
