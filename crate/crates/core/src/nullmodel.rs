//! Degree-preserving null model and per-class significance.
//!
//! Random replicates come from directed edge switching: two arcs `a→b` and
//! `c→d` become `a→d` and `c→b` when that creates neither a loop nor a
//! duplicate arc. Every node keeps its in- and out-degree. Weights are not
//! carried over.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::classify::{Classifier, MotifClass};
use crate::enumerate::{census, SamplerConfig};
use crate::error::{Error, Result};
use crate::graph::{Edge, NodeId, WeightedDigraph};
use crate::seed::{derive, stream_rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_random: usize,
    pub switches_per_edge: usize,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            n_random: 1000,
            switches_per_edge: 100,
            seed: 0,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_random < 1 {
            return Err(Error::InvalidConfig("ensemble size must be >= 1".into()));
        }
        if self.switches_per_edge < 1 {
            return Err(Error::InvalidConfig("switches per edge must be >= 1".into()));
        }
        Ok(())
    }
}

#[inline]
fn key(u: u32, v: u32) -> u64 {
    u64::from(u) << 32 | u64::from(v)
}

/// Mutable arc list with O(1) membership, the state of the switching chain.
#[derive(Clone, Debug)]
pub struct SwitchState {
    arcs: Vec<(u32, u32)>,
    present: FxHashSet<u64>,
}

impl SwitchState {
    pub fn new(g: &WeightedDigraph) -> Self {
        let arcs: Vec<(u32, u32)> = g.edges().iter().map(|e| (e.src.0, e.dst.0)).collect();
        let present = arcs.iter().map(|&(u, v)| key(u, v)).collect();
        SwitchState { arcs, present }
    }

    pub fn arcs(&self) -> &[(u32, u32)] {
        &self.arcs
    }

    /// Attempt to switch arcs `i` and `j`; returns whether the graph changed.
    pub fn try_switch(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (a, b) = self.arcs[i];
        let (c, d) = self.arcs[j];
        if a == d || c == b || a == c || b == d {
            return false;
        }
        if self.present.contains(&key(a, d)) || self.present.contains(&key(c, b)) {
            return false;
        }
        self.present.remove(&key(a, b));
        self.present.remove(&key(c, d));
        self.present.insert(key(a, d));
        self.present.insert(key(c, b));
        self.arcs[i] = (a, d);
        self.arcs[j] = (c, b);
        true
    }

    /// `attempts` switches between uniformly drawn distinct arc pairs.
    /// Returns the number accepted.
    pub fn run<R: Rng>(&mut self, attempts: usize, rng: &mut R) -> usize {
        let m = self.arcs.len();
        if m < 2 {
            return 0;
        }
        let mut accepted = 0;
        for _ in 0..attempts {
            let i = rng.random_range(0..m);
            let mut j = rng.random_range(0..m - 1);
            if j >= i {
                j += 1;
            }
            accepted += usize::from(self.try_switch(i, j));
        }
        accepted
    }

    /// Back to a graph over the original node set, unit weights.
    pub fn into_graph(self, labels: Vec<String>) -> WeightedDigraph {
        let edges = self.arcs.into_iter().map(|(u, v)| Edge {
            src: NodeId(u),
            dst: NodeId(v),
            weight: 1.0,
        });
        WeightedDigraph::from_index_edges(labels, edges)
    }
}

/// One degree-preserving randomization with `switches_per_edge × |E|` attempts.
pub fn edge_switch_randomize<R: Rng>(g: &WeightedDigraph, switches_per_edge: usize, rng: &mut R) -> WeightedDigraph {
    let mut state = SwitchState::new(g);
    state.run(switches_per_edge.saturating_mul(g.edge_count()), rng);
    state.into_graph(g.labels().to_vec())
}

/// Null concentrations, `concentrations[class][replicate]` in percent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullEnsemble {
    pub concentrations: Vec<Vec<f64>>,
    pub failed: usize,
}

impl NullEnsemble {
    pub fn replicates(&self) -> usize {
        self.concentrations.first().map_or(0, Vec::len)
    }

    /// `replicate,class_id,concentration` rows.
    pub fn write_csv<W: Write>(&self, classes: &[MotifClass], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["replicate", "class_id", "concentration"])?;
        for r in 0..self.replicates() {
            for (c, class) in classes.iter().enumerate() {
                w.write_record([
                    r.to_string(),
                    class.canonical_id.to_string(),
                    self.concentrations[c][r].to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<null dump>", e))?;
        Ok(())
    }
}

/// Keep successful replicates in order; at least 90% must succeed.
pub fn collect_replicates(results: Vec<Result<Vec<f64>>>, n_classes: usize) -> Result<NullEnsemble> {
    let total = results.len();
    let mut concentrations = vec![Vec::with_capacity(total); n_classes];
    let mut failed = 0;
    for r in results {
        match r {
            Ok(conc) => {
                for (c, v) in conc.into_iter().enumerate() {
                    concentrations[c].push(v);
                }
            }
            Err(e) => {
                log::warn!("null replicate failed: {e}");
                failed += 1;
            }
        }
    }
    if total == 0 || (total - failed) * 10 < total * 9 {
        return Err(Error::EnsembleFailed { failed, total });
    }
    Ok(NullEnsemble { concentrations, failed })
}

/// Randomize `g` `n_random` times and census each replicate with the same
/// sampler settings used on the real graph. Replicate `r` switches with the
/// stream `(ensemble.seed, r)` and samples with seed `derive(sampler.seed, r)`.
pub fn build_ensemble(
    g: &WeightedDigraph,
    sampler: &SamplerConfig,
    ensemble: &EnsembleConfig,
    classifier: &Classifier,
) -> Result<NullEnsemble> {
    sampler.validate()?;
    ensemble.validate()?;
    let results: Vec<Result<Vec<f64>>> = (0..ensemble.n_random)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(ensemble.seed, r as u64);
            let rg = edge_switch_randomize(g, ensemble.switches_per_edge, &mut rng);
            let cfg = SamplerConfig {
                seed: derive(sampler.seed, r as u64),
                ..sampler.clone()
            };
            census(&rg, &cfg, classifier).map(|c| c.concentrations())
        })
        .collect();
    collect_replicates(results, classifier.classes().len())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullSummary {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for one replicate.
    pub std: f64,
    /// Undefined when the null has zero spread.
    pub z_score: Option<f64>,
    /// `(#{null ≥ real} + 1) / (n + 1)`.
    pub p_value: f64,
}

pub fn class_significance(real: f64, null: &[f64]) -> NullSummary {
    let n = null.len();
    assert!(n > 0, "empty null distribution");
    let mean = null.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (null.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let z_score = (std > 0.0).then(|| (real - mean) / std);
    let exceed = null.iter().filter(|&&x| x >= real).count();
    NullSummary {
        mean,
        std,
        z_score,
        p_value: (exceed + 1) as f64 / (n + 1) as f64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotifStats {
    pub class: MotifClass,
    pub real_count: u64,
    /// Percent of all connected size-k occurrences.
    pub concentration: f64,
    pub null_mean: f64,
    pub null_std: f64,
    pub z_score: Option<f64>,
    pub p_value: f64,
}

/// Compare real concentrations with the null ensemble, class by class.
pub fn significance(classes: &[MotifClass], real_counts: &[u64], null: &NullEnsemble) -> Vec<MotifStats> {
    let total: u64 = real_counts.iter().sum();
    classes
        .iter()
        .zip(real_counts)
        .zip(&null.concentrations)
        .map(|((class, &count), nulls)| {
            let concentration = if total == 0 { 0.0 } else { 100.0 * count as f64 / total as f64 };
            let s = class_significance(concentration, nulls);
            MotifStats {
                class: class.clone(),
                real_count: count,
                concentration,
                null_mean: s.mean,
                null_std: s.std,
                z_score: s.z_score,
                p_value: s.p_value,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn digraph(edges: &[(u32, u32)]) -> WeightedDigraph {
        build_graph(edges.iter().map(|&(a, b)| (a.to_string(), b.to_string(), 1.0))).unwrap()
    }

    #[test]
    fn forced_switch() {
        let g = digraph(&[(1, 2), (3, 4)]);
        let mut s = SwitchState::new(&g);
        assert!(s.try_switch(0, 1));
        let out = s.into_graph(g.labels().to_vec());
        let labelled: Vec<(&str, &str)> = out.edges().iter().map(|e| (out.label(e.src), out.label(e.dst))).collect();
        assert_eq!(labelled, vec![("1", "4"), ("3", "2")]);
        assert_eq!(out.out_degrees(), g.out_degrees());
        assert_eq!(out.in_degrees(), g.in_degrees());
    }

    #[test]
    fn shared_source_is_rejected() {
        let g = digraph(&[(1, 2), (1, 3)]);
        let mut s = SwitchState::new(&g);
        assert!(!s.try_switch(0, 1));
        assert_eq!(s.arcs(), SwitchState::new(&g).arcs());
    }

    #[test]
    fn switch_creating_duplicate_or_loop_is_rejected() {
        // 1->2, 3->1: switching would create 1->1
        let mut s = SwitchState::new(&digraph(&[(1, 2), (3, 1)]));
        assert!(!s.try_switch(0, 1));
        // 1->2, 3->4 with 1->4 already present
        let mut s = SwitchState::new(&digraph(&[(1, 2), (3, 4), (1, 4)]));
        let g = digraph(&[(1, 2), (3, 4), (1, 4)]);
        let i = g.edges().iter().position(|e| g.label(e.dst) == "2").unwrap();
        let j = g.edges().iter().position(|e| g.label(e.src) == "3").unwrap();
        assert!(!s.try_switch(i, j));
    }

    #[test]
    fn randomization_preserves_degrees() {
        let g = crate::synth::random_digraph(30, 0.15, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = edge_switch_randomize(&g, 50, &mut rng);
        assert_eq!(r.out_degrees(), g.out_degrees());
        assert_eq!(r.in_degrees(), g.in_degrees());
        assert_eq!(r.edge_count(), g.edge_count());
        assert_ne!(r.edges(), g.edges());
    }

    #[test]
    fn directed_three_cycle_is_rigid() {
        let g = digraph(&[(0, 1), (1, 2), (2, 0)]);
        let sampler = SamplerConfig::exact(3);
        let ens = EnsembleConfig {
            n_random: 1,
            switches_per_edge: 10_000,
            seed: 4,
        };
        let null = build_ensemble(&g, &sampler, &ens, Classifier::triads()).unwrap();
        let real = census(&g, &sampler, Classifier::triads()).unwrap();
        for (c, v) in real.concentrations().iter().enumerate() {
            assert_eq!(null.concentrations[c], vec![*v]);
        }
    }

    #[test]
    fn half_failed_ensemble_is_an_error() {
        let results: Vec<Result<Vec<f64>>> = (0..100)
            .map(|i| if i % 2 == 0 { Ok(vec![1.0]) } else { Err(Error::EmptyGraph("test")) })
            .collect();
        assert!(matches!(
            collect_replicates(results, 1),
            Err(Error::EnsembleFailed { failed: 50, total: 100 })
        ));
    }

    #[test]
    fn ten_percent_failures_are_tolerated() {
        let results: Vec<Result<Vec<f64>>> = (0..100)
            .map(|i| if i < 10 { Err(Error::EmptyGraph("test")) } else { Ok(vec![i as f64]) })
            .collect();
        let e = collect_replicates(results, 1).unwrap();
        assert_eq!(e.failed, 10);
        assert_eq!(e.replicates(), 90);
        assert_eq!(e.concentrations[0][0], 10.0);
    }

    #[test]
    fn hand_computed_significance() {
        let s = class_significance(6.0, &[2.0, 4.0, 6.0]);
        assert_eq!(s.mean, 4.0);
        assert_eq!(s.std, 2.0);
        assert_eq!(s.z_score, Some(1.0));
        assert_eq!(s.p_value, 0.5);
    }

    #[test]
    fn zero_variance_significance() {
        let s = class_significance(3.5, &[3.5, 3.5, 3.5]);
        assert_eq!(s.z_score, None);
        assert_eq!(s.p_value, 1.0);
    }

    #[test]
    fn single_replicate_has_zero_std() {
        let s = class_significance(1.0, &[0.5]);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.z_score, None);
        assert_eq!(s.p_value, 0.5);
    }

    #[test]
    fn ensemble_is_deterministic_across_thread_counts() {
        let g = crate::synth::random_digraph(25, 0.2, 8);
        let sampler = SamplerConfig::with_fraction(3, 0.5, 3);
        let ens = EnsembleConfig {
            n_random: 12,
            switches_per_edge: 20,
            seed: 9,
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| build_ensemble(&g, &sampler, &ens, Classifier::triads()).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn p_value_in_unit_interval(real in 0.0f64..100.0, null in prop::collection::vec(0.0f64..100.0, 1..50)) {
                let s = class_significance(real, &null);
                prop_assert!(s.p_value > 0.0 && s.p_value <= 1.0);
            }

            #[test]
            fn switching_preserves_degree_sequences(n in 3usize..25, p in 0.05f64..0.6, seed in any::<u64>()) {
                let g = crate::synth::random_digraph(n, p, seed);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
                let r = edge_switch_randomize(&g, 10, &mut rng);
                prop_assert_eq!(r.out_degrees(), g.out_degrees());
                prop_assert_eq!(r.in_degrees(), g.in_degrees());
                prop_assert_eq!(r.edge_count(), g.edge_count());
                prop_assert_eq!(r.self_loops_dropped(), 0);
            }
        }
    }
}
