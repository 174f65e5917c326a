mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{adjacency, configuration_model, mean_std, rng, triad_concentrations};
use proptest::prelude::*;
use trademotif::nullmodel::{build_ensemble, class_significance, edge_switch_randomize, EnsembleConfig};
use trademotif::synth::random_digraph;
use trademotif::{Classifier, SamplerConfig, WeightedDigraph};

fn arcs(g: &WeightedDigraph) -> BTreeSet<(u32, u32)> {
    g.edges().iter().map(|e| (e.src.0, e.dst.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn switching_preserves_degrees_and_simplicity(n in 4usize..40, p in 0.05f64..0.5, seed in any::<u64>()) {
        let g = random_digraph(n, p, seed);
        let r = edge_switch_randomize(&g, 20, &mut rng(seed ^ 1));
        prop_assert_eq!(r.out_degrees(), g.out_degrees());
        prop_assert_eq!(r.in_degrees(), g.in_degrees());
        prop_assert_eq!(r.edge_count(), g.edge_count());
        prop_assert_eq!(arcs(&r).len(), r.edge_count());
        prop_assert!(r.edges().iter().all(|e| e.src != e.dst));
    }
}

#[test]
fn switching_null_agrees_with_configuration_model() {
    let g = random_digraph(24, 0.15, 3);
    let classifier = Classifier::triads();
    let ens = EnsembleConfig {
        n_random: 100,
        switches_per_edge: 100,
        seed: 11,
    };
    let null = build_ensemble(&g, &SamplerConfig::exact(3), &ens, classifier).unwrap();
    assert_eq!(null.replicates(), 100);

    let mut oracle: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut r = rng(99);
    for rep in 0..100 {
        let cm = configuration_model(&g, &mut r);
        assert_eq!(adjacency(&cm).iter().flatten().filter(|&&b| b).count(), g.edge_count());
        let conc = triad_concentrations(&cm);
        for class in classifier.classes() {
            let v = oracle.entry(class.canonical_id).or_default();
            v.push(conc.get(&class.canonical_id).copied().unwrap_or(0.0));
            assert_eq!(v.len(), rep + 1);
        }
    }

    for (i, class) in classifier.classes().iter().enumerate() {
        let (m1, s1) = mean_std(&null.concentrations[i]);
        let (m2, s2) = mean_std(&oracle[&class.canonical_id]);
        let se = ((s1 * s1 + s2 * s2) / 100.0).sqrt();
        if se == 0.0 {
            assert!((m1 - m2).abs() < 1e-9, "class {}: {m1} vs {m2}", class.canonical_id);
        } else {
            assert!((m1 - m2).abs() <= 3.0 * se, "class {}: {m1} vs {m2} (se {se})", class.canonical_id);
        }
    }
}

#[test]
fn significance_arithmetic() {
    let s = class_significance(8.0, &[2.0, 4.0, 6.0]);
    assert_eq!(s.mean, 4.0);
    assert_eq!(s.std, 2.0);
    assert_eq!(s.z_score, Some(2.0));
    assert_eq!(s.p_value, 0.25);

    let s = class_significance(6.0, &[2.0, 4.0, 6.0]);
    assert_eq!(s.z_score, Some(1.0));
    assert_eq!(s.p_value, 0.5);

    let s = class_significance(3.0, &[3.0; 10]);
    assert_eq!(s.std, 0.0);
    assert_eq!(s.z_score, None);
    assert_eq!(s.p_value, 1.0);
}
