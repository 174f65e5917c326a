//! Python bindings: graphs, motif censuses, splitting, randomization and the
//! full pipeline.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use trademotif::classify::{self, Classifier};
use trademotif::enumerate::{census as run_census, esu_enumerate};
use trademotif::ingest::{read_edge_list, write_edge_list_file};
use trademotif::nullmodel::{class_significance, edge_switch_randomize};
use trademotif::pipeline::{parse_periods, run_full_pipeline, with_threads, PipelineConfig};
use trademotif::report::render_diff_markdown;
use trademotif::seed::stream_rng;
use trademotif::split::{split_auto, SplitConfig};
use trademotif::{build_graph, SamplerConfig, WeightedDigraph};

fn err(e: trademotif::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Weighted directed graph; node ids follow first appearance in the edges.
#[pyclass(name = "Graph", module = "trademotif", frozen)]
struct PyGraph {
    inner: WeightedDigraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(edges: Vec<(String, String, f64)>) -> PyResult<Self> {
        Ok(PyGraph {
            inner: build_graph(edges).map_err(err)?,
        })
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        Ok(PyGraph {
            inner: read_edge_list(&path).map_err(err)?,
        })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        write_edge_list_file(&self.inner, &path).map_err(err)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn edges(&self) -> Vec<(String, String, f64)> {
        let g = &self.inner;
        g.edges()
            .iter()
            .map(|e| (g.label(e.src).to_owned(), g.label(e.dst).to_owned(), e.weight))
            .collect()
    }

    fn out_degrees(&self) -> Vec<usize> {
        self.inner.out_degrees()
    }

    fn in_degrees(&self) -> Vec<usize> {
        self.inner.in_degrees()
    }

    fn __len__(&self) -> usize {
        self.inner.edge_count()
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={})", self.inner.node_count(), self.inner.edge_count())
    }
}

#[pyfunction]
fn canonical_code(code: u64, k: usize) -> u64 {
    classify::canonical_code(code, k)
}

/// `(canonical_id, display_id, name)` for every connected class of size k.
#[pyfunction]
#[pyo3(signature = (k = 3))]
fn motif_table(k: usize) -> PyResult<Vec<(u64, u64, String)>> {
    let c = Classifier::for_size(k).map_err(err)?;
    Ok(c.classes().iter().map(|m| (m.canonical_id, m.display_id(), m.name.clone())).collect())
}

/// `(canonical_id, name)` of a published triad id.
#[pyfunction]
fn resolve_paper_id(id: u64) -> PyResult<(u64, String)> {
    let c = classify::resolve_paper_id(id).map_err(err)?;
    Ok((c.canonical_id, c.name.clone()))
}

/// Every connected k-subgraph as `(node labels, induced code)`.
#[pyfunction]
#[pyo3(signature = (graph, k = 3))]
fn enumerate(py: Python<'_>, graph: &PyGraph, k: usize) -> PyResult<Vec<(Vec<String>, u64)>> {
    let g = &graph.inner;
    let occ = py.detach(|| esu_enumerate(g, k)).map_err(err)?;
    Ok(occ
        .into_iter()
        .map(|o| (o.nodes.iter().map(|&v| g.label(v).to_owned()).collect(), o.induced_edges))
        .collect())
}

/// Class counts keyed by display id, plus the number observed and the
/// estimated total.
#[pyfunction]
#[pyo3(signature = (graph, k = 3, sample_q = 1.0, seed = 0))]
fn census(
    py: Python<'_>,
    graph: &PyGraph,
    k: usize,
    sample_q: f64,
    seed: u64,
) -> PyResult<(BTreeMap<u64, u64>, u64, f64)> {
    let classifier = Classifier::for_size(k).map_err(err)?;
    let cfg = SamplerConfig::with_fraction(k, sample_q, seed);
    let counts = py.detach(|| run_census(&graph.inner, &cfg, classifier)).map_err(err)?;
    let by_id = classifier
        .classes()
        .iter()
        .zip(&counts.counts)
        .map(|(c, &n)| (c.display_id(), n))
        .collect();
    Ok((by_id, counts.observed, counts.estimated_total()))
}

/// `(threshold, inliers, outliers)`.
#[pyfunction]
#[pyo3(signature = (graph, bins = 10_000, min_gap = 1, threshold = None, log_scale = true))]
fn split(
    graph: &PyGraph,
    bins: usize,
    min_gap: usize,
    threshold: Option<f64>,
    log_scale: bool,
) -> PyResult<(f64, PyGraph, PyGraph)> {
    let cfg = SplitConfig {
        bins,
        min_gap_bins: min_gap,
        manual_threshold: threshold,
        log_scale,
    };
    let s = split_auto(&graph.inner, &cfg).map_err(err)?;
    Ok((s.threshold, PyGraph { inner: s.inliers }, PyGraph { inner: s.outliers }))
}

/// Degree-preserving edge-switching randomization (unit weights).
#[pyfunction]
#[pyo3(signature = (graph, switches_per_edge = 100, seed = 0))]
fn randomize(py: Python<'_>, graph: &PyGraph, switches_per_edge: usize, seed: u64) -> PyGraph {
    let inner = py.detach(|| edge_switch_randomize(&graph.inner, switches_per_edge, &mut stream_rng(seed, 0)));
    PyGraph { inner }
}

/// `(mean, std, z, p)` of a real value against null samples.
#[pyfunction]
fn significance(real: f64, null: Vec<f64>) -> PyResult<(f64, f64, Option<f64>, f64)> {
    if null.is_empty() {
        return Err(PyValueError::new_err("null distribution is empty"));
    }
    let s = class_significance(real, &null);
    Ok((s.mean, s.std, s.z_score, s.p_value))
}

/// Run every stage and write artifacts under `out`; returns the difference
/// table as Markdown.
#[pyfunction]
#[pyo3(signature = (inputs, out, years = None, ensemble = 1000, sample_q = 1.0, seed = 0, threads = None))]
#[allow(clippy::too_many_arguments)]
fn run_pipeline(
    py: Python<'_>,
    inputs: Vec<PathBuf>,
    out: PathBuf,
    years: Option<&str>,
    ensemble: usize,
    sample_q: f64,
    seed: u64,
    threads: Option<usize>,
) -> PyResult<String> {
    let mut cfg = PipelineConfig {
        inputs,
        out_dir: out,
        n_random: ensemble,
        sample_q,
        seed,
        ..PipelineConfig::default()
    };
    if let Some(y) = years {
        cfg.periods = parse_periods(y).map_err(err)?;
    }
    let result = py.detach(|| with_threads(threads, || run_full_pipeline(&cfg))).map_err(err)?;
    let output = result.map_err(err)?;
    Ok(render_diff_markdown(&output.diff, false))
}

#[pymodule]
#[pyo3(name = "trademotif")]
fn trademotif_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(canonical_code, m)?)?;
    m.add_function(wrap_pyfunction!(motif_table, m)?)?;
    m.add_function(wrap_pyfunction!(resolve_paper_id, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(census, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    m.add_function(wrap_pyfunction!(randomize, m)?)?;
    m.add_function(wrap_pyfunction!(significance, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}
