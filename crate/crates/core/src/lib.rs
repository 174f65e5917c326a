//! Motif mining for weighted directed flow networks.
//!
//! The pipeline aggregates yearly bilateral flows into a weighted digraph,
//! splits it into a weak-link ("inliers") and a strong-link ("outliers")
//! subgraph at a histogram discontinuity, enumerates or samples every
//! connected size-k subgraph with ESU / RAND-ESU, classifies each one into
//! its directed isomorphism class, and scores every class against an
//! ensemble of degree-preserving randomizations.

pub mod classify;
pub mod cli;
pub mod enumerate;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod nullmodel;
pub mod pipeline;
pub mod report;
pub mod seed;
pub mod split;
pub mod synth;

pub use classify::{canonical_code, Classifier, MotifClass};
pub use enumerate::{esu_enumerate, rand_esu_sample, SamplerConfig, SubgraphOccurrence};
pub use error::{Error, Result};
pub use graph::{build_graph, NodeId, WeightedDigraph};
pub use ingest::{FlowKind, FlowRecord, YearRange};
pub use nullmodel::{EnsembleConfig, MotifStats};
pub use report::{AnalysisReport, SubgraphType};
pub use split::{SplitConfig, SplitResult};
