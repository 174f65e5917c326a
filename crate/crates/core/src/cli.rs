//! Command-line front end. Every pipeline stage is also a subcommand that
//! reads and writes the intermediate CSV/JSON files, so a full run can be
//! replayed one stage at a time.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::classify::{arcs, Classifier};
use crate::enumerate::{census, SamplerConfig};
use crate::error::{Error, Result, StageContext};
use crate::graph::build_graph;
use crate::ingest::{aggregate_flows, parse_csv_file, read_edge_list, write_edge_list, write_edge_list_file, ColumnMap, FlowKind, YearRange};
use crate::pipeline::{
    analysis_seeds, analyze_subgraph, default_periods, parse_periods, report_from_stats, run_full_pipeline, with_threads,
    write_file, write_occurrences, PipelineConfig, StatsFile,
};
use crate::report::{FilterConfig, SubgraphType};
use crate::split::{split_auto, SplitConfig};

#[derive(Debug, Parser)]
#[command(name = "trademotif", version, about = "Motif mining for weighted directed trade networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the whole pipeline for every period.
    Run(RunArgs),
    /// Aggregate raw flow CSVs into a `src,dst,weight` edge list.
    Ingest(IngestCmd),
    /// Split an edge list into inliers and outliers.
    Split(SplitCmd),
    /// Count motif classes in an edge list.
    Motifs(MotifsCmd),
    /// Score motif classes against a degree-preserving null ensemble.
    Significance(SignificanceCmd),
    /// Build filtered reports and the inlier/outlier diff table from stats files.
    Report(ReportCmd),
    /// Print the table of connected motif classes.
    MotifTable(MotifTableCmd),
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunArgs {
    /// Key = value file mirroring the flags; flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Raw flow CSV (repeatable).
    #[arg(long, num_args = 1..)]
    #[serde(default)]
    pub input: Vec<PathBuf>,
    /// export | import
    #[arg(long)]
    pub flow: Option<String>,
    /// Periods, e.g. `Before=2004-2006,During=2007,After=2008-2010`.
    #[arg(long)]
    pub years: Option<String>,
    /// Column overrides, e.g. `value=TradeValue,flow=flowDesc`.
    #[arg(long)]
    pub col_map: Option<String>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Manual split threshold in US dollars.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Bin raw weights instead of log weights.
    #[arg(long)]
    #[serde(default)]
    pub linear_hist: bool,
    #[arg(long)]
    pub min_gap: Option<usize>,
    #[arg(long)]
    pub motif_size: Option<usize>,
    /// Leaf sampling fraction; 1.0 is full enumeration.
    #[arg(long)]
    pub sample_q: Option<f64>,
    /// Number of randomized replicates.
    #[arg(long)]
    pub ensemble: Option<usize>,
    #[arg(long)]
    pub switches_per_edge: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub p_filter: Option<f64>,
    /// Minimum share as a fraction (0.05 = 5%).
    #[arg(long)]
    pub freq_filter: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Decimal comma in rendered numbers.
    #[arg(long)]
    #[serde(default)]
    pub locale_comma: bool,
    #[arg(long)]
    pub dump_hist: Option<PathBuf>,
    #[arg(long)]
    pub dump_null: Option<PathBuf>,
    #[arg(long)]
    pub dump_occurrences: Option<PathBuf>,
}

impl RunArgs {
    /// Fill unset flags from the config file named by `--config`.
    pub fn merged(self) -> Result<RunArgs> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let file: RunArgs =
            toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Ok(RunArgs {
            config: self.config,
            input: if self.input.is_empty() { file.input } else { self.input },
            flow: self.flow.or(file.flow),
            years: self.years.or(file.years),
            col_map: self.col_map.or(file.col_map),
            bins: self.bins.or(file.bins),
            threshold: self.threshold.or(file.threshold),
            linear_hist: self.linear_hist || file.linear_hist,
            min_gap: self.min_gap.or(file.min_gap),
            motif_size: self.motif_size.or(file.motif_size),
            sample_q: self.sample_q.or(file.sample_q),
            ensemble: self.ensemble.or(file.ensemble),
            switches_per_edge: self.switches_per_edge.or(file.switches_per_edge),
            seed: self.seed.or(file.seed),
            p_filter: self.p_filter.or(file.p_filter),
            freq_filter: self.freq_filter.or(file.freq_filter),
            out: self.out.or(file.out),
            threads: self.threads.or(file.threads),
            locale_comma: self.locale_comma || file.locale_comma,
            dump_hist: self.dump_hist.or(file.dump_hist),
            dump_null: self.dump_null.or(file.dump_null),
            dump_occurrences: self.dump_occurrences.or(file.dump_occurrences),
        })
    }

    pub fn to_config(&self) -> Result<PipelineConfig> {
        let d = PipelineConfig::default();
        let columns = match &self.col_map {
            Some(spec) => ColumnMap::default().with_overrides(spec)?,
            None => d.columns,
        };
        Ok(PipelineConfig {
            inputs: self.input.clone(),
            columns,
            flow: self.flow.as_deref().map(str::parse).transpose()?.unwrap_or(d.flow),
            periods: self.years.as_deref().map(parse_periods).transpose()?.unwrap_or_else(default_periods),
            split: SplitConfig {
                bins: self.bins.unwrap_or(d.split.bins),
                min_gap_bins: self.min_gap.unwrap_or(d.split.min_gap_bins),
                manual_threshold: self.threshold,
                log_scale: !self.linear_hist,
            },
            motif_size: self.motif_size.unwrap_or(d.motif_size),
            sample_q: self.sample_q.unwrap_or(d.sample_q),
            n_random: self.ensemble.unwrap_or(d.n_random),
            switches_per_edge: self.switches_per_edge.unwrap_or(d.switches_per_edge),
            filter: FilterConfig {
                p_max: self.p_filter.unwrap_or(d.filter.p_max),
                f_min: self.freq_filter.unwrap_or(d.filter.f_min),
            },
            seed: self.seed.unwrap_or(d.seed),
            locale_comma: self.locale_comma,
            out_dir: self.out.clone().unwrap_or(d.out_dir),
            dump_hist: self.dump_hist.clone(),
            dump_null: self.dump_null.clone(),
            dump_occurrences: self.dump_occurrences.clone(),
        })
    }
}

#[derive(Debug, Args)]
pub struct IngestCmd {
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value = "export")]
    pub flow: String,
    #[arg(long, default_value = "2004-2006")]
    pub years: String,
    #[arg(long)]
    pub col_map: Option<String>,
    /// Edge list destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitCmd {
    /// `src,dst,weight` edge list.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub bins: usize,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub linear_hist: bool,
    #[arg(long, default_value_t = 1)]
    pub min_gap: usize,
    #[arg(long)]
    pub dump_hist: Option<PathBuf>,
    /// Directory for `inliers.csv` and `outliers.csv`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 3)]
    pub motif_size: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sample_q: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MotifsCmd {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long)]
    pub dump_occurrences: Option<PathBuf>,
    /// Counts CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SignificanceCmd {
    #[arg(long)]
    pub input: PathBuf,
    /// inliers | outliers
    #[arg(long = "type")]
    pub subgraph_type: String,
    /// Year range the edge list was aggregated over.
    #[arg(long)]
    pub years: String,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, default_value_t = 1000)]
    pub ensemble: usize,
    #[arg(long, default_value_t = 100)]
    pub switches_per_edge: usize,
    #[arg(long)]
    pub dump_null: Option<PathBuf>,
    /// Stats JSON destination.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportCmd {
    /// Stats JSON from `significance` (repeatable).
    #[arg(long, required = true, num_args = 1..)]
    pub stats: Vec<PathBuf>,
    /// Period labels and order, e.g. `Before=2004-2006,...`.
    #[arg(long)]
    pub years: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub p_filter: f64,
    #[arg(long, default_value_t = 0.05)]
    pub freq_filter: f64,
    #[arg(long)]
    pub locale_comma: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MotifTableCmd {
    #[arg(long, visible_alias = "motif-size", default_value_t = 3)]
    pub k: usize,
    /// csv | markdown
    #[arg(long, default_value = "csv")]
    pub format: String,
}

fn output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_file(p, bytes),
        None => io::stdout().write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let args = args.merged().stage("config")?;
            let cfg = args.to_config().stage("config")?;
            let out = with_threads(args.threads, || run_full_pipeline(&cfg))??;
            for (label, split) in &out.splits {
                eprintln!(
                    "{label}: threshold {} ({} inlier / {} outlier edges)",
                    split.threshold,
                    split.inliers.edge_count(),
                    split.outliers.edge_count()
                );
            }
            eprintln!("wrote reports for {} period(s) to {}", out.reports.len(), cfg.out_dir.display());
            Ok(())
        }
        Command::Ingest(c) => {
            let columns = match &c.col_map {
                Some(spec) => ColumnMap::default().with_overrides(spec)?,
                None => ColumnMap::default(),
            };
            let flow: FlowKind = c.flow.parse()?;
            let years: YearRange = c.years.parse()?;
            let mut records = Vec::new();
            let mut skipped = 0;
            for path in &c.input {
                let parsed = parse_csv_file(path, &columns).stage("ingest")?;
                skipped += parsed.skipped;
                records.extend(parsed.records);
            }
            let edges = aggregate_flows(&records, years, flow);
            let g = build_graph(edges).stage("aggregate")?;
            let mut buf = Vec::new();
            write_edge_list(&g, &mut buf)?;
            output(c.out.as_deref(), &buf)?;
            eprintln!(
                "{} records ({skipped} skipped) -> {} nodes, {} edges",
                records.len(),
                g.node_count(),
                g.edge_count()
            );
            Ok(())
        }
        Command::Split(c) => {
            let g = read_edge_list(&c.input).stage("ingest")?;
            let cfg = SplitConfig {
                bins: c.bins,
                min_gap_bins: c.min_gap,
                manual_threshold: c.threshold,
                log_scale: !c.linear_hist,
            };
            let split = split_auto(&g, &cfg).stage("split")?;
            if let (Some(path), Some(h)) = (&c.dump_hist, &split.histogram) {
                let mut buf = Vec::new();
                h.write_csv(&mut buf)?;
                write_file(path, &buf)?;
            }
            fs::create_dir_all(&c.out).map_err(|e| Error::io(&c.out, e))?;
            write_edge_list_file(&split.inliers, &c.out.join("inliers.csv"))?;
            write_edge_list_file(&split.outliers, &c.out.join("outliers.csv"))?;
            println!("threshold\t{}", split.threshold);
            println!("inliers\t{}", split.inliers.edge_count());
            println!("outliers\t{}", split.outliers.edge_count());
            Ok(())
        }
        Command::Motifs(c) => {
            let g = read_edge_list(&c.input).stage("ingest")?;
            let sampler = SamplerConfig::with_fraction(c.sampling.motif_size, c.sampling.sample_q, c.sampling.seed);
            let classifier = Classifier::for_size(sampler.k).stage("motifs")?;
            let counts = with_threads(c.sampling.threads, || census(&g, &sampler, classifier))?.stage("motifs")?;
            if let Some(path) = &c.dump_occurrences {
                let mut buf = Vec::new();
                write_occurrences(&g, &sampler, &mut buf)?;
                write_file(path, &buf)?;
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["class_id", "idm", "name", "count", "estimated"])?;
            for (class, &n) in classifier.classes().iter().zip(&counts.counts) {
                w.write_record([
                    class.canonical_id.to_string(),
                    class.display_id().to_string(),
                    class.name.clone(),
                    n.to_string(),
                    (n as f64 / counts.q).to_string(),
                ])?;
            }
            let buf = w.into_inner().map_err(|e| Error::io("<counts>", e.into_error()))?;
            output(c.out.as_deref(), &buf)?;
            eprintln!(
                "observed {} subgraphs, estimated total {} (q = {})",
                counts.observed,
                counts.estimated_total(),
                counts.q
            );
            Ok(())
        }
        Command::Significance(c) => {
            let g = read_edge_list(&c.input).stage("ingest")?;
            let ty: SubgraphType = c.subgraph_type.parse()?;
            let years: YearRange = c.years.parse()?;
            let (s_seed, e_seed) = analysis_seeds(c.sampling.seed, years, ty);
            let sampler = SamplerConfig::with_fraction(c.sampling.motif_size, c.sampling.sample_q, s_seed);
            let ensemble = crate::nullmodel::EnsembleConfig {
                n_random: c.ensemble,
                switches_per_edge: c.switches_per_edge,
                seed: e_seed,
            };
            let analysis = with_threads(c.sampling.threads, || analyze_subgraph(&g, &sampler, &ensemble))??;
            if let Some(path) = &c.dump_null {
                let mut buf = Vec::new();
                analysis.null.write_csv(Classifier::for_size(sampler.k)?.classes(), &mut buf)?;
                write_file(path, &buf)?;
            }
            StatsFile {
                start_year: years.start_year,
                end_year: years.end_year,
                subgraph_type: ty,
                motif_size: sampler.k,
                sample_q: c.sampling.sample_q,
                n_random: c.ensemble,
                switches_per_edge: c.switches_per_edge,
                seed: c.sampling.seed,
                observed: analysis.observed,
                estimated_total: analysis.estimated_total,
                stats: analysis.stats,
            }
            .write(&c.out)
        }
        Command::Report(c) => {
            let files = c.stats.iter().map(|p| StatsFile::read(p)).collect::<Result<Vec<_>>>().stage("report")?;
            let periods = c.years.as_deref().map(parse_periods).transpose()?.unwrap_or_default();
            let filter = FilterConfig {
                p_max: c.p_filter,
                f_min: c.freq_filter,
            };
            let (reports, _) = report_from_stats(&files, &periods, filter, &c.out, c.locale_comma).stage("report")?;
            eprintln!("wrote reports for {} period(s) to {}", reports.len(), c.out.display());
            Ok(())
        }
        Command::MotifTable(c) => {
            let classifier = Classifier::for_size(c.k)?;
            let text = render_motif_table(classifier, &c.format)?;
            output(None, text.as_bytes())
        }
    }
}

/// Class table as CSV (`canonical_id,aliases,name,edges`) or Markdown.
pub fn render_motif_table(classifier: &Classifier, format: &str) -> Result<String> {
    let edge_list = |code| {
        arcs(code, classifier.k())
            .iter()
            .map(|(i, j)| format!("{}->{}", i + 1, j + 1))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let aliases = |a: &[u64]| a.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    match format.to_ascii_lowercase().as_str() {
        "csv" => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["canonical_id", "aliases", "name", "edges"])?;
            for c in classifier.classes() {
                w.write_record([
                    c.canonical_id.to_string(),
                    aliases(&c.alias_ids),
                    c.name.clone(),
                    edge_list(c.canonical_id),
                ])?;
            }
            let buf = w.into_inner().map_err(|e| Error::io("<table>", e.into_error()))?;
            Ok(String::from_utf8(buf).expect("utf-8 csv"))
        }
        "markdown" | "md" => {
            let mut s = String::from("| Canonical id | Aliases | Name | Edges |\n|---|---|---|---|\n");
            for c in classifier.classes() {
                s.push_str(&format!(
                    "| {} | {} | {} | {} |\n",
                    c.canonical_id,
                    aliases(&c.alias_ids),
                    c.name,
                    edge_list(c.canonical_id)
                ));
            }
            Ok(s)
        }
        other => Err(Error::UnknownFormat(other.to_owned())),
    }
}
