//! Comtrade-style CSV ingestion and multi-year flow aggregation.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    Export,
    Import,
}

impl FromStr for FlowKind {
    type Err = Error;

    /// Accepts the textual labels and the legacy Comtrade codes
    /// (`1` import, `2` export) as well as `M` / `X`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "export" | "exports" | "x" | "2" => Ok(FlowKind::Export),
            "import" | "imports" | "m" | "1" => Ok(FlowKind::Import),
            other => Err(Error::InvalidConfig(format!("unknown trade flow `{other}`"))),
        }
    }
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowKind::Export => "export",
            FlowKind::Import => "import",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub year: i32,
    pub reporter: String,
    pub partner: String,
    pub flow: FlowKind,
    pub value: f64,
}

/// Inclusive range of years.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YearRange {
    pub start_year: i32,
    pub end_year: i32,
}

impl YearRange {
    pub fn new(start_year: i32, end_year: i32) -> Result<Self> {
        if start_year > end_year {
            return Err(Error::InvalidConfig(format!(
                "year range {start_year}-{end_year} is reversed"
            )));
        }
        Ok(YearRange { start_year, end_year })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start_year..=self.end_year).contains(&year)
    }
}

impl FromStr for YearRange {
    type Err = Error;

    /// `2004-2006` or a single year `2007`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("bad year range `{s}` (expected START-END)"));
        let s = s.trim();
        match s.split_once('-') {
            Some((a, b)) => Self::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => {
                let y = s.parse().map_err(|_| bad())?;
                Self::new(y, y)
            }
        }
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start_year, self.end_year)
    }
}

/// Header names for the five columns the parser needs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub year: String,
    pub reporter: String,
    pub partner: String,
    pub flow: String,
    pub value: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            year: "Year".into(),
            reporter: "Reporter Code".into(),
            partner: "Partner Code".into(),
            flow: "Trade Flow".into(),
            value: "Trade Value (US$)".into(),
        }
    }
}

impl ColumnMap {
    /// Apply `key=value,...` overrides, e.g. `value=TradeValue,flow=flowDesc`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| Error::BadColumnMap(part.into()))?;
            let slot = match k.trim().to_ascii_lowercase().as_str() {
                "year" => &mut self.year,
                "reporter" => &mut self.reporter,
                "partner" => &mut self.partner,
                "flow" => &mut self.flow,
                "value" => &mut self.value,
                _ => return Err(Error::BadColumnMap(part.into())),
            };
            *slot = v.trim().to_owned();
        }
        Ok(self)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedFlows {
    pub records: Vec<FlowRecord>,
    /// Rows skipped for a missing, unparsable or negative field.
    pub skipped: usize,
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    let exact = headers.iter().position(|h| h.trim() == name);
    exact
        .or_else(|| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name)))
        .ok_or_else(|| Error::MissingColumn(name.to_owned()))
}

/// Parse a headered CSV stream into flow records.
pub fn parse_csv<R: Read>(reader: R, columns: &ColumnMap) -> Result<ParsedFlows> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let idx = [
        find_column(&headers, &columns.year)?,
        find_column(&headers, &columns.reporter)?,
        find_column(&headers, &columns.partner)?,
        find_column(&headers, &columns.flow)?,
        find_column(&headers, &columns.value)?,
    ];
    let mut out = ParsedFlows::default();
    for row in rdr.records() {
        let row = row?;
        match parse_row(&row, idx) {
            Some(r) => out.records.push(r),
            None => out.skipped += 1,
        }
    }
    if out.skipped > 0 {
        log::warn!("skipped {} malformed or negative-value row(s)", out.skipped);
    }
    Ok(out)
}

fn parse_row(row: &csv::StringRecord, [y, r, p, f, v]: [usize; 5]) -> Option<FlowRecord> {
    let field = |i: usize| row.get(i).map(str::trim).filter(|s| !s.is_empty());
    let value: f64 = field(v)?.parse().ok()?;
    if !value.is_finite() || value < 0.0 {
        return None;
    }
    Some(FlowRecord {
        year: field(y)?.parse().ok()?,
        reporter: field(r)?.to_owned(),
        partner: field(p)?.to_owned(),
        flow: field(f)?.parse().ok()?,
        value,
    })
}

pub fn parse_csv_file(path: &Path, columns: &ColumnMap) -> Result<ParsedFlows> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(std::io::BufReader::new(file), columns)
}

/// Sum flow values per ordered `(reporter, partner)` pair over `range`.
///
/// Only records of the requested `flow` participate; export and import rows
/// are never combined. Pairs appear in first-seen order and zero totals
/// produce no edge. Per-pair values are summed in sorted order so the totals
/// do not depend on input order.
pub fn aggregate_flows(records: &[FlowRecord], range: YearRange, flow: FlowKind) -> Vec<(String, String, f64)> {
    let mut pairs: IndexMap<(&str, &str), Vec<f64>> = IndexMap::new();
    for r in records.iter().filter(|r| r.flow == flow && range.contains(r.year)) {
        pairs
            .entry((r.reporter.as_str(), r.partner.as_str()))
            .or_default()
            .push(r.value);
    }
    pairs
        .into_iter()
        .filter_map(|((s, d), mut values)| {
            values.sort_by(f64::total_cmp);
            let total: f64 = values.iter().sum();
            (total > 0.0).then(|| (s.to_owned(), d.to_owned(), total))
        })
        .collect()
}

/// Read an intermediate `src,dst,weight` edge list.
pub fn read_edge_list(path: &Path) -> Result<WeightedDigraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(std::io::BufReader::new(file));
    let mut records = Vec::new();
    for row in rdr.deserialize::<(String, String, f64)>() {
        records.push(row?);
    }
    crate::graph::build_graph(records)
}

fn label_sorted_edges(g: &WeightedDigraph) -> Vec<(&str, &str, f64)> {
    let mut edges: Vec<(&str, &str, f64)> =
        g.edges().iter().map(|e| (g.label(e.src), g.label(e.dst), e.weight)).collect();
    edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    edges
}

/// Write a graph as a `src,dst,weight` edge list (labels, not indices),
/// sorted by label so equal graphs give equal files.
pub fn write_edge_list<W: Write>(g: &WeightedDigraph, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["src", "dst", "weight"])?;
    for (src, dst, weight) in label_sorted_edges(g) {
        w.write_record([src, dst, &weight.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<edge list>", e))?;
    Ok(())
}

/// `g` renumbered the way it reads back from its own edge-list file.
pub fn canonical_form(g: &WeightedDigraph) -> WeightedDigraph {
    if g.edge_count() == 0 {
        return WeightedDigraph::empty();
    }
    crate::graph::build_graph(label_sorted_edges(g)).expect("edges of a valid graph")
}

pub fn write_edge_list_file(g: &WeightedDigraph, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_edge_list(g, std::io::BufWriter::new(file))
}
