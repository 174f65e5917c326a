//! Synthetic inputs for tests, benchmarks and demos.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::graph::{Edge, NodeId, WeightedDigraph};
use crate::ingest::{FlowKind, FlowRecord, YearRange};

/// Directed Erdős–Rényi graph with unit weights; node labels are `0..n`.
pub fn random_digraph(n: usize, p: f64, seed: u64) -> WeightedDigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in 0..n as u32 {
            if u != v && rng.random::<f64>() < p {
                edges.push(Edge {
                    src: NodeId(u),
                    dst: NodeId(v),
                    weight: 1.0,
                });
            }
        }
    }
    WeightedDigraph::from_index_edges((0..n).map(|i| i.to_string()).collect(), edges)
}

/// Shape of a synthetic trade network.
#[derive(Clone, Debug)]
pub struct TradeShape {
    pub countries: usize,
    pub edges: usize,
    /// The first `core` countries trade strongly among themselves.
    pub core: usize,
    /// Fraction of core-to-core pairs carrying heavy-tail volume.
    pub core_density: f64,
    /// Multiplier separating the heavy tail from the bulk.
    pub tail_factor: f64,
}

impl Default for TradeShape {
    fn default() -> Self {
        TradeShape {
            countries: 180,
            edges: 8000,
            core: 30,
            core_density: 0.6,
            tail_factor: 1e6,
        }
    }
}

fn pair_weights(shape: &TradeShape, rng: &mut ChaCha8Rng) -> Vec<(usize, usize, f64)> {
    let n = shape.countries;
    let all = n * (n - 1);
    let picks = sample(rng, all, shape.edges.min(all));
    let bulk = LogNormal::new(13.0, 1.0).unwrap();
    let mut pairs: Vec<(usize, usize, f64)> = picks
        .into_iter()
        .map(|i| {
            let (u, mut v) = (i / (n - 1), i % (n - 1));
            if v >= u {
                v += 1;
            }
            (u, v)
        })
        .map(|(u, v)| {
            let strong = u < shape.core && v < shape.core && rng.random::<f64>() < shape.core_density;
            // bulk is capped at e^17 so the tail stays separated by a clear gap
            let w: f64 = bulk.sample(rng);
            let w = w.min(17f64.exp());
            (u, v, if strong { w * shape.tail_factor } else { w })
        })
        .collect();
    pairs.sort_by_key(|&(u, v, _)| (u, v));
    pairs
}

/// Skewed-weight trade graph: log-normal bulk plus a core whose links are
/// `tail_factor` times heavier.
pub fn skewed_trade_graph(shape: &TradeShape, seed: u64) -> WeightedDigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = pair_weights(shape, &mut rng)
        .into_iter()
        .map(|(u, v, w)| Edge {
            src: NodeId(u as u32),
            dst: NodeId(v as u32),
            weight: w,
        });
    WeightedDigraph::from_index_edges((0..shape.countries).map(country_code).collect(), edges)
}

fn country_code(i: usize) -> String {
    format!("C{i:03}")
}

/// Yearly export rows (plus a mirrored import row per pair) for a trade
/// network whose pairs keep their bulk/tail role across years.
pub fn trade_flows(shape: &TradeShape, years: YearRange, seed: u64) -> Vec<FlowRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = pair_weights(shape, &mut rng);
    let mut out = Vec::new();
    for year in years.start_year..=years.end_year {
        for &(u, v, w) in &pairs {
            let jitter = rng.random_range(0.7..1.3);
            out.push(FlowRecord {
                year,
                reporter: country_code(u),
                partner: country_code(v),
                flow: FlowKind::Export,
                value: (w * jitter).round().max(1.0),
            });
            out.push(FlowRecord {
                year,
                reporter: country_code(v),
                partner: country_code(u),
                flow: FlowKind::Import,
                value: (w * jitter * 1.05).round().max(1.0),
            });
        }
    }
    out
}

/// Render flow records as a Comtrade-style CSV with default headers.
pub fn flows_to_csv(records: &[FlowRecord]) -> String {
    let mut s = String::from("Year,Reporter Code,Partner Code,Trade Flow,Trade Value (US$)\n");
    for r in records {
        let flow = match r.flow {
            FlowKind::Export => "Export",
            FlowKind::Import => "Import",
        };
        s.push_str(&format!("{},{},{},{},{}\n", r.year, r.reporter, r.partner, flow, r.value));
    }
    s
}
