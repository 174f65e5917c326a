//! ESU enumeration and RAND-ESU sampling of connected size-k subgraphs.
//!
//! Every subgraph is grown from its smallest node index (the root). A node may
//! join the extension set only if its index exceeds the root's and it is an
//! exclusive neighbour of the newly added node, i.e. not already adjacent to
//! the current subgraph. Each connected k-subset is therefore reached by
//! exactly one root-to-leaf path of the ESU tree.
//!
//! RAND-ESU keeps each child of a depth-d tree node independently with
//! probability `p_d`, so every leaf survives with probability `q = ∏ p_d` and
//! `observed / q` is an unbiased estimate of the total count. Each root draws
//! from its own RNG stream derived from `(seed, root)`, which makes sampled
//! output independent of how roots are scheduled across threads.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{bit_position, Classifier, MAX_K};
use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedDigraph};
use crate::seed::{stream_rng, StreamRng};

/// One connected size-k subgraph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubgraphOccurrence {
    /// Strictly increasing.
    pub nodes: Vec<NodeId>,
    /// Induced arcs as a row-major k×k adjacency code over `nodes`.
    pub induced_edges: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub k: usize,
    /// `depth_probs[d - 1]` is the probability of keeping a tree node at depth d.
    pub depth_probs: Vec<f64>,
    pub seed: u64,
}

impl SamplerConfig {
    /// Full enumeration.
    pub fn exact(k: usize) -> Self {
        SamplerConfig {
            k,
            depth_probs: vec![1.0; k],
            seed: 0,
        }
    }

    /// Sample a fraction `q` of the leaves, cutting only at the last level.
    pub fn with_fraction(k: usize, q: f64, seed: u64) -> Self {
        let mut depth_probs = vec![1.0; k];
        if let Some(last) = depth_probs.last_mut() {
            *last = q;
        }
        SamplerConfig { k, depth_probs, seed }
    }

    /// Overall leaf-sampling probability.
    pub fn q(&self) -> f64 {
        self.depth_probs.iter().product()
    }

    pub fn is_exact(&self) -> bool {
        self.depth_probs.iter().all(|&p| p >= 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_K).contains(&self.k) {
            return Err(Error::InvalidConfig(format!("motif size must be in 2..={MAX_K}, got {}", self.k)));
        }
        if self.depth_probs.len() != self.k {
            return Err(Error::InvalidConfig(format!(
                "expected {} depth probabilities, got {}",
                self.k,
                self.depth_probs.len()
            )));
        }
        if let Some(p) = self.depth_probs.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::InvalidConfig(format!("depth probability {p} outside (0, 1]")));
        }
        Ok(())
    }
}

/// Induced arcs among `nodes` (sorted) as an adjacency code.
pub fn induced_code(g: &WeightedDigraph, nodes: &[NodeId]) -> u64 {
    let k = nodes.len();
    let mut code = 0u64;
    for (i, &u) in nodes.iter().enumerate() {
        for (j, &v) in nodes.iter().enumerate() {
            if i != j && g.has_edge(u, v) {
                code |= 1 << bit_position(k, i, j);
            }
        }
    }
    code
}

struct Walker<'a, F> {
    g: &'a WeightedDigraph,
    k: usize,
    root: NodeId,
    sampling: Option<(&'a [f64], StreamRng)>,
    sub: Vec<NodeId>,
    visit: F,
}

impl<F: FnMut(&[NodeId], u64)> Walker<'_, F> {
    fn keep(&mut self, depth: usize) -> bool {
        match &mut self.sampling {
            None => true,
            Some((probs, rng)) => {
                let p = probs[depth - 1];
                p >= 1.0 || rng.random::<f64>() < p
            }
        }
    }

    fn run(&mut self) {
        if !self.keep(1) {
            return;
        }
        let root = self.root;
        let ext: Vec<NodeId> = self.g.undirected_adj(root).iter().copied().filter(|&u| u > root).collect();
        self.sub.push(root);
        self.extend(&ext);
        self.sub.pop();
    }

    fn extend(&mut self, ext: &[NodeId]) {
        if self.sub.len() == self.k {
            self.emit();
            return;
        }
        for (i, &w) in ext.iter().enumerate() {
            // w leaves the extension set whether or not its branch is sampled
            if !self.keep(self.sub.len() + 1) {
                continue;
            }
            let mut next: Vec<NodeId> = ext[i + 1..].to_vec();
            if self.sub.len() + 1 < self.k {
                let g = self.g;
                let root = self.root;
                let sub = &self.sub;
                next.extend(
                    g.undirected_adj(w)
                        .iter()
                        .copied()
                        .filter(|&u| u > root && !sub.contains(&u) && !sub.iter().any(|&s| g.adjacent(s, u))),
                );
            }
            self.sub.push(w);
            self.extend(&next);
            self.sub.pop();
        }
    }

    fn emit(&mut self) {
        let mut nodes = [NodeId(0); MAX_K];
        let nodes = &mut nodes[..self.k];
        nodes.copy_from_slice(&self.sub);
        nodes.sort_unstable();
        let code = induced_code(self.g, nodes);
        (self.visit)(nodes, code);
    }
}

/// The ESU subtree of one root: every (sampled) subgraph whose smallest
/// node is `root`. `cfg` is assumed valid.
pub fn walk_root<F: FnMut(&[NodeId], u64)>(g: &WeightedDigraph, cfg: &SamplerConfig, root: NodeId, visit: F) {
    let sampling = (!cfg.is_exact()).then(|| (cfg.depth_probs.as_slice(), stream_rng(cfg.seed, u64::from(root.0))));
    let mut w = Walker {
        g,
        k: cfg.k,
        root,
        sampling,
        sub: Vec::with_capacity(cfg.k),
        visit,
    };
    w.run();
}

/// Stream every connected size-k subgraph (sorted nodes, induced code) to
/// `visit`, roots in ascending order.
pub fn esu_for_each(g: &WeightedDigraph, k: usize, mut visit: impl FnMut(&[NodeId], u64)) -> Result<()> {
    let cfg = SamplerConfig::exact(k);
    cfg.validate()?;
    if k > g.node_count() {
        return Ok(());
    }
    for root in g.nodes() {
        walk_root(g, &cfg, root, &mut visit);
    }
    Ok(())
}

pub fn esu_enumerate(g: &WeightedDigraph, k: usize) -> Result<Vec<SubgraphOccurrence>> {
    let mut out = Vec::new();
    esu_for_each(g, k, |nodes, code| {
        out.push(SubgraphOccurrence {
            nodes: nodes.to_vec(),
            induced_edges: code,
        })
    })?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub observed: u64,
    pub q: f64,
    /// `observed / q`.
    pub estimated_total: f64,
}

/// RAND-ESU, streaming sampled leaves to `visit`.
pub fn rand_esu_for_each(
    g: &WeightedDigraph,
    cfg: &SamplerConfig,
    mut visit: impl FnMut(&[NodeId], u64),
) -> Result<SampleSummary> {
    cfg.validate()?;
    let mut observed = 0u64;
    if cfg.k <= g.node_count() {
        for root in g.nodes() {
            walk_root(g, cfg, root, |nodes: &[NodeId], code| {
                observed += 1;
                visit(nodes, code);
            });
        }
    }
    Ok(SampleSummary {
        observed,
        q: cfg.q(),
        estimated_total: observed as f64 / cfg.q(),
    })
}

pub fn rand_esu_sample(g: &WeightedDigraph, cfg: &SamplerConfig) -> Result<(Vec<SubgraphOccurrence>, SampleSummary)> {
    let mut out = Vec::new();
    let summary = rand_esu_for_each(g, cfg, |nodes, code| {
        out.push(SubgraphOccurrence {
            nodes: nodes.to_vec(),
            induced_edges: code,
        })
    })?;
    Ok((out, summary))
}

/// F1 frequency: every occurrence counts once under its canonical class,
/// overlaps included. Keys are canonical ids.
pub fn count_by_class<'a>(
    occurrences: impl IntoIterator<Item = &'a SubgraphOccurrence>,
    classifier: &Classifier,
) -> BTreeMap<u64, u64> {
    let mut out = BTreeMap::new();
    for occ in occurrences {
        if let Some(i) = classifier.classify(occ.induced_edges) {
            *out.entry(classifier.classes()[i].canonical_id).or_insert(0) += 1;
        }
    }
    out
}

/// Per-class counts from one (possibly sampled) ESU pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassCounts {
    /// Indexed like `Classifier::classes()`.
    pub counts: Vec<u64>,
    pub observed: u64,
    pub q: f64,
}

impl ClassCounts {
    pub fn estimated_total(&self) -> f64 {
        self.observed as f64 / self.q
    }

    /// Percentage of all observed occurrences per class; zeros when nothing
    /// was observed.
    pub fn concentrations(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| if self.observed == 0 { 0.0 } else { 100.0 * c as f64 / self.observed as f64 })
            .collect()
    }
}

/// Count classes over all roots in parallel. Integer totals make the result
/// identical for any thread count.
pub fn census(g: &WeightedDigraph, cfg: &SamplerConfig, classifier: &Classifier) -> Result<ClassCounts> {
    cfg.validate()?;
    if classifier.k() != cfg.k {
        return Err(Error::InvalidConfig(format!(
            "classifier is for k = {}, sampler for k = {}",
            classifier.k(),
            cfg.k
        )));
    }
    let n_classes = classifier.classes().len();
    let mut counts = vec![0u64; n_classes];
    if cfg.k <= g.node_count() {
        counts = g
            .nodes()
            .collect::<Vec<_>>()
            .into_par_iter()
            .fold(
                || vec![0u64; n_classes],
                |mut acc, root| {
                    walk_root(g, cfg, root, |_: &[NodeId], code| {
                        // ESU leaves are connected by construction
                        acc[classifier.classify(code).expect("connected pattern")] += 1;
                    });
                    acc
                },
            )
            .reduce(
                || vec![0u64; n_classes],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
    }
    Ok(ClassCounts {
        observed: counts.iter().sum(),
        counts,
        q: cfg.q(),
    })
}
