//! End-to-end orchestration: ingest, aggregate, split, census, null
//! ensemble, significance and reporting for each period.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classify::Classifier;
use crate::enumerate::{census, rand_esu_for_each, SamplerConfig};
use crate::error::{Error, Result, StageContext};
use crate::graph::{build_graph, WeightedDigraph};
use crate::ingest::{aggregate_flows, canonical_form, parse_csv_file, write_edge_list_file, ColumnMap, FlowKind, FlowRecord, YearRange};
use crate::nullmodel::{build_ensemble, significance, EnsembleConfig, MotifStats, NullEnsemble};
use crate::report::{build_report, diff_table, render_csv, render_diff_markdown, render_json, AnalysisReport, DiffTable, FilterConfig, SubgraphType};
use crate::seed::derive_str;
use crate::split::{split_auto, SplitConfig, SplitResult};

/// A labelled year range, e.g. `Before=2004-2006`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub label: String,
    pub years: YearRange,
}

impl FromStr for Period {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once('=') {
            Some((label, years)) => Ok(Period {
                label: label.trim().to_owned(),
                years: years.parse()?,
            }),
            None => {
                let years: YearRange = s.parse()?;
                Ok(Period {
                    label: years.to_string(),
                    years,
                })
            }
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.label, self.years)
    }
}

/// Comma-separated list of periods.
pub fn parse_periods(s: &str) -> Result<Vec<Period>> {
    let periods: Vec<Period> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if periods.is_empty() {
        return Err(Error::InvalidConfig("at least one period is required".into()));
    }
    Ok(periods)
}

/// Before / during / after the 2007 crisis.
pub fn default_periods() -> Vec<Period> {
    parse_periods("Before=2004-2006,During=2007-2007,After=2008-2010").unwrap()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub columns: ColumnMap,
    pub flow: FlowKind,
    pub periods: Vec<Period>,
    pub split: SplitConfig,
    pub motif_size: usize,
    pub sample_q: f64,
    pub n_random: usize,
    pub switches_per_edge: usize,
    pub filter: FilterConfig,
    pub seed: u64,
    pub locale_comma: bool,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub dump_hist: Option<PathBuf>,
    #[serde(skip)]
    pub dump_null: Option<PathBuf>,
    #[serde(skip)]
    pub dump_occurrences: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let ens = EnsembleConfig::default();
        PipelineConfig {
            inputs: Vec::new(),
            columns: ColumnMap::default(),
            flow: FlowKind::Export,
            periods: default_periods(),
            split: SplitConfig::default(),
            motif_size: 3,
            sample_q: 1.0,
            n_random: ens.n_random,
            switches_per_edge: ens.switches_per_edge,
            filter: FilterConfig::default(),
            seed: 0,
            locale_comma: false,
            out_dir: PathBuf::from("out"),
            dump_hist: None,
            dump_null: None,
            dump_occurrences: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::InvalidConfig("no input files".into()));
        }
        if self.periods.is_empty() {
            return Err(Error::InvalidConfig("at least one period is required".into()));
        }
        self.split.validate()?;
        Classifier::for_size(self.motif_size)?;
        self.sampler(0).validate()?;
        self.ensemble(0).validate()
    }

    pub fn sampler(&self, seed: u64) -> SamplerConfig {
        SamplerConfig::with_fraction(self.motif_size, self.sample_q, seed)
    }

    pub fn ensemble(&self, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            n_random: self.n_random,
            switches_per_edge: self.switches_per_edge,
            seed,
        }
    }
}

/// Seeds for one (period, subgraph) analysis: `(sampler, ensemble)`.
///
/// Keyed on `"<start>-<end>/<type>"`, then `"sample"` / `"ensemble"`, so
/// running a single stage by hand with the master seed reproduces the
/// pipeline.
pub fn analysis_seeds(master: u64, years: YearRange, subgraph: SubgraphType) -> (u64, u64) {
    let base = derive_str(master, &format!("{years}/{}", subgraph.as_str().to_ascii_lowercase()));
    (derive_str(base, "sample"), derive_str(base, "ensemble"))
}

#[derive(Clone, Debug)]
pub struct SubgraphAnalysis {
    pub stats: Vec<MotifStats>,
    pub null: NullEnsemble,
    pub observed: u64,
    pub estimated_total: f64,
}

/// Census, null ensemble and significance for one subgraph.
pub fn analyze_subgraph(
    g: &WeightedDigraph,
    sampler: &SamplerConfig,
    ensemble: &EnsembleConfig,
) -> Result<SubgraphAnalysis> {
    let classifier = Classifier::for_size(sampler.k)?;
    let real = census(g, sampler, classifier).stage("motifs")?;
    let null = build_ensemble(g, sampler, ensemble, classifier).stage("significance")?;
    let stats = significance(classifier.classes(), &real.counts, &null);
    Ok(SubgraphAnalysis {
        stats,
        null,
        observed: real.observed,
        estimated_total: real.estimated_total(),
    })
}

/// Intermediate file written by the `significance` stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsFile {
    pub start_year: i32,
    pub end_year: i32,
    pub subgraph_type: SubgraphType,
    pub motif_size: usize,
    pub sample_q: f64,
    pub n_random: usize,
    pub switches_per_edge: usize,
    pub seed: u64,
    pub observed: u64,
    pub estimated_total: f64,
    pub stats: Vec<MotifStats>,
}

impl StatsFile {
    pub fn years(&self) -> YearRange {
        YearRange {
            start_year: self.start_year,
            end_year: self.end_year,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        write_file(path, &bytes)
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?))
}

/// `dir/stem_tag1_tag2.ext` next to `path`.
pub fn tagged_path(path: &Path, tags: &[&str]) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut name = std::iter::once(stem.as_str()).chain(tags.iter().copied()).collect::<Vec<_>>().join("_");
    if let Some(ext) = path.extension() {
        name.push('.');
        name.push_str(&ext.to_string_lossy());
    }
    path.with_file_name(name)
}

/// `node1..nodek,class_id` rows for the (sampled) occurrences of `g`.
pub fn write_occurrences<W: Write>(g: &WeightedDigraph, sampler: &SamplerConfig, writer: W) -> Result<()> {
    let classifier = Classifier::for_size(sampler.k)?;
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=sampler.k).map(|i| format!("node{i}")).collect();
    header.push("class_id".into());
    w.write_record(&header)?;
    let mut failure = None;
    rand_esu_for_each(g, sampler, |nodes, code| {
        if failure.is_some() {
            return;
        }
        let class = classifier.classify(code).map(|i| classifier.classes()[i].canonical_id).unwrap_or(0);
        let mut row: Vec<String> = nodes.iter().map(|&v| g.label(v).to_owned()).collect();
        row.push(class.to_string());
        if let Err(e) = w.write_record(&row) {
            failure = Some(e);
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    w.flush().map_err(|e| Error::io("<occurrence dump>", e))?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
struct SplitSidecar {
    threshold: f64,
    edges: usize,
    inlier_edges: usize,
    outlier_edges: usize,
    inlier_nodes: usize,
    outlier_nodes: usize,
    warning: Option<crate::split::SplitWarning>,
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub reports: Vec<(String, AnalysisReport)>,
    pub diff: DiffTable,
    pub splits: Vec<(String, SplitResult)>,
}

pub fn load_records(cfg: &PipelineConfig) -> Result<Vec<FlowRecord>> {
    let mut records = Vec::new();
    for path in &cfg.inputs {
        records.extend(parse_csv_file(path, &cfg.columns)?.records);
    }
    Ok(records)
}

/// Run every stage for every period and write all artifacts under `out_dir`:
/// `<label>/{inliers,outliers}.csv`, `<label>/split.json`,
/// `<label>/report.{csv,json}`, `diff.md` and `config.json`.
pub fn run_full_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate().stage("config")?;
    let records = load_records(cfg).stage("ingest")?;
    let mut reports = Vec::new();
    let mut splits = Vec::new();
    for period in &cfg.periods {
        let dir = cfg.out_dir.join(&period.label);
        let edges = aggregate_flows(&records, period.years, cfg.flow);
        if edges.is_empty() {
            return Err(Error::EmptyGraph("no flow records in the year range")).stage("aggregate");
        }
        let g = build_graph(edges).stage("graph")?;
        let split = split_auto(&g, &cfg.split).stage("split")?;
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e)).stage("split")?;
        write_edge_list_file(&split.inliers, &dir.join("inliers.csv")).stage("split")?;
        write_edge_list_file(&split.outliers, &dir.join("outliers.csv")).stage("split")?;
        let sidecar = SplitSidecar {
            threshold: split.threshold,
            edges: g.edge_count(),
            inlier_edges: split.inliers.edge_count(),
            outlier_edges: split.outliers.edge_count(),
            inlier_nodes: split.inliers.node_count(),
            outlier_nodes: split.outliers.node_count(),
            warning: split.warning,
        };
        write_file(&dir.join("split.json"), &serde_json::to_vec_pretty(&sidecar)?).stage("split")?;
        if let (Some(path), Some(hist)) = (&cfg.dump_hist, &split.histogram) {
            hist.write_csv(create(&tagged_path(path, &[&period.label]))?).stage("split")?;
        }

        let mut per_type = Vec::new();
        for (ty, sub) in [(SubgraphType::Inliers, &split.inliers), (SubgraphType::Outliers, &split.outliers)] {
            // analyze the node order the written edge list reads back in
            let sub = &canonical_form(sub);
            let (s_seed, e_seed) = analysis_seeds(cfg.seed, period.years, ty);
            let sampler = cfg.sampler(s_seed);
            let tag = ty.as_str().to_ascii_lowercase();
            if let Some(path) = &cfg.dump_occurrences {
                write_occurrences(sub, &sampler, create(&tagged_path(path, &[&period.label, &tag]))?).stage("motifs")?;
            }
            let analysis = analyze_subgraph(sub, &sampler, &cfg.ensemble(e_seed))?;
            if let Some(path) = &cfg.dump_null {
                let classes = Classifier::for_size(cfg.motif_size)?.classes();
                analysis
                    .null
                    .write_csv(classes, create(&tagged_path(path, &[&period.label, &tag]))?)
                    .stage("significance")?;
            }
            per_type.push(analysis.stats);
        }
        let outlier_stats = per_type.pop().unwrap();
        let inlier_stats = per_type.pop().unwrap();
        let report = build_report(period.years, inlier_stats, outlier_stats, cfg.filter);
        write_file(&dir.join("report.csv"), &render_csv(&report, cfg.locale_comma)?).stage("report")?;
        write_file(&dir.join("report.json"), &render_json(&report)?).stage("report")?;
        reports.push((period.label.clone(), report));
        splits.push((period.label.clone(), split));
    }
    let diff = diff_table(&reports);
    write_file(&cfg.out_dir.join("diff.md"), render_diff_markdown(&diff, cfg.locale_comma).as_bytes()).stage("report")?;
    let mut config_json = serde_json::to_vec_pretty(cfg)?;
    config_json.push(b'\n');
    write_file(&cfg.out_dir.join("config.json"), &config_json).stage("report")?;
    Ok(PipelineOutput { reports, diff, splits })
}

/// Reports and diff table from `significance` stage outputs, grouped by year
/// range. `periods` supplies labels and order; unlisted ranges follow in
/// first-seen order, labelled by their range.
pub fn report_from_stats(
    files: &[StatsFile],
    periods: &[Period],
    filter: FilterConfig,
    out_dir: &Path,
    locale_comma: bool,
) -> Result<(Vec<(String, AnalysisReport)>, DiffTable)> {
    let mut order: Vec<Period> = periods
        .iter()
        .filter(|p| files.iter().any(|f| f.years() == p.years))
        .cloned()
        .collect();
    for f in files {
        if !order.iter().any(|p| p.years == f.years()) {
            order.push(Period {
                label: f.years().to_string(),
                years: f.years(),
            });
        }
    }
    let mut reports = Vec::new();
    for period in &order {
        let pick = |ty| {
            files
                .iter()
                .find(|f| f.years() == period.years && f.subgraph_type == ty)
                .map(|f| f.stats.clone())
                .unwrap_or_default()
        };
        let report = build_report(period.years, pick(SubgraphType::Inliers), pick(SubgraphType::Outliers), filter);
        let dir = out_dir.join(&period.label);
        write_file(&dir.join("report.csv"), &render_csv(&report, locale_comma)?)?;
        write_file(&dir.join("report.json"), &render_json(&report)?)?;
        reports.push((period.label.clone(), report));
    }
    let diff = diff_table(&reports);
    write_file(&out_dir.join("diff.md"), render_diff_markdown(&diff, locale_comma).as_bytes())?;
    Ok((reports, diff))
}

/// Run `f` on a dedicated pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
