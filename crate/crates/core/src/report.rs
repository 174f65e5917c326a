//! Significance/frequency filtering and table rendering.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::YearRange;
use crate::nullmodel::MotifStats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SubgraphType {
    Inliers,
    Outliers,
}

impl SubgraphType {
    pub fn as_str(self) -> &'static str {
        match self {
            SubgraphType::Inliers => "Inliers",
            SubgraphType::Outliers => "Outliers",
        }
    }
}

impl fmt::Display for SubgraphType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SubgraphType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inliers" | "inlier" => Ok(SubgraphType::Inliers),
            "outliers" | "outlier" => Ok(SubgraphType::Outliers),
            _ => Err(Error::InvalidConfig(format!("unknown subgraph type `{s}`"))),
        }
    }
}

/// A class is reported when `p < p_max` or its share exceeds `f_min`
/// (`f_min` is a fraction, so 0.05 means 5%).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub p_max: f64,
    pub f_min: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig { p_max: 0.05, f_min: 0.05 }
    }
}

impl FilterConfig {
    pub fn keeps(&self, percentage: f64, p_value: f64) -> bool {
        p_value < self.p_max || percentage / 100.0 > self.f_min
    }

    pub fn significant(&self, p_value: f64) -> bool {
        p_value < self.p_max
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub subgraph_type: SubgraphType,
    pub class_id: u64,
    /// Published id of the class (canonical id when it has no alias).
    pub idm: u64,
    pub name: String,
    pub percentage: f64,
    pub p_value: f64,
}

/// Inlier minus outlier share of one class, over significant rows only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffRow {
    pub class_id: u64,
    pub idm: u64,
    pub inlier_pct: Option<f64>,
    pub outlier_pct: Option<f64>,
    pub difference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub start_year: i32,
    pub end_year: i32,
    pub filter: FilterConfig,
    pub rows: Vec<ReportRow>,
    pub diffs: Vec<DiffRow>,
    /// Full per-class statistics, null ensemble summary included.
    pub inlier_stats: Vec<MotifStats>,
    pub outlier_stats: Vec<MotifStats>,
}

pub fn filter_rows(stats: &[MotifStats], subgraph_type: SubgraphType, filter: &FilterConfig) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = stats
        .iter()
        .filter(|s| filter.keeps(s.concentration, s.p_value))
        .map(|s| ReportRow {
            subgraph_type,
            class_id: s.class.canonical_id,
            idm: s.class.display_id(),
            name: s.class.name.clone(),
            percentage: s.concentration,
            p_value: s.p_value,
        })
        .collect();
    rows.sort_by_key(|r| (r.class_id, r.subgraph_type));
    rows
}

fn diffs_from_rows(rows: &[ReportRow], filter: &FilterConfig) -> Vec<DiffRow> {
    let mut by_class: BTreeMap<u64, DiffRow> = BTreeMap::new();
    for r in rows {
        let d = by_class.entry(r.class_id).or_insert(DiffRow {
            class_id: r.class_id,
            idm: r.idm,
            inlier_pct: None,
            outlier_pct: None,
            difference: None,
        });
        if !filter.significant(r.p_value) {
            continue;
        }
        match r.subgraph_type {
            SubgraphType::Inliers => d.inlier_pct = Some(r.percentage),
            SubgraphType::Outliers => d.outlier_pct = Some(r.percentage),
        }
    }
    by_class
        .into_values()
        .filter(|d| d.inlier_pct.is_some() || d.outlier_pct.is_some())
        .map(|mut d| {
            d.difference = d.inlier_pct.zip(d.outlier_pct).map(|(i, o)| i - o);
            d
        })
        .collect()
}

pub fn build_report(
    years: YearRange,
    inlier_stats: Vec<MotifStats>,
    outlier_stats: Vec<MotifStats>,
    filter: FilterConfig,
) -> AnalysisReport {
    let mut rows = filter_rows(&inlier_stats, SubgraphType::Inliers, &filter);
    rows.extend(filter_rows(&outlier_stats, SubgraphType::Outliers, &filter));
    rows.sort_by_key(|r| (r.class_id, r.subgraph_type));
    let diffs = diffs_from_rows(&rows, &filter);
    AnalysisReport {
        start_year: years.start_year,
        end_year: years.end_year,
        filter,
        rows,
        diffs,
        inlier_stats,
        outlier_stats,
    }
}

/// Per-class inlier/outlier comparison across labelled periods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffTable {
    pub periods: Vec<String>,
    pub rows: Vec<DiffTableRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffTableRow {
    pub class_id: u64,
    pub idm: u64,
    /// One cell per period, same order as `DiffTable::periods`.
    pub cells: Vec<DiffRow>,
}

pub fn diff_table(periods: &[(String, AnalysisReport)]) -> DiffTable {
    let mut classes: BTreeMap<u64, u64> = BTreeMap::new();
    for (_, rep) in periods {
        for d in &rep.diffs {
            classes.insert(d.class_id, d.idm);
        }
    }
    let rows = classes
        .into_iter()
        .map(|(class_id, idm)| DiffTableRow {
            class_id,
            idm,
            cells: periods
                .iter()
                .map(|(_, rep)| {
                    rep.diffs.iter().find(|d| d.class_id == class_id).cloned().unwrap_or(DiffRow {
                        class_id,
                        idm,
                        inlier_pct: None,
                        outlier_pct: None,
                        difference: None,
                    })
                })
                .collect(),
        })
        .collect();
    DiffTable {
        periods: periods.iter().map(|(l, _)| l.clone()).collect(),
        rows,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(Error::UnknownFormat(other.to_owned())),
        }
    }
}

fn decimal(x: f64, places: usize, locale_comma: bool) -> String {
    let mut s = format!("{x:.places$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s.remove(0);
    }
    if locale_comma {
        s = s.replace('.', ",");
    }
    s
}

pub fn format_percentage(x: f64, locale_comma: bool) -> String {
    decimal(x, 2, locale_comma)
}

pub fn format_p_value(p: f64, locale_comma: bool) -> String {
    decimal(p, 3, locale_comma)
}

/// `Syear,Eyear,Type,IDM,Percentage,P` rows.
pub fn render_csv(report: &AnalysisReport, locale_comma: bool) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["Syear", "Eyear", "Type", "IDM", "Percentage", "P"])?;
    for r in &report.rows {
        w.write_record([
            report.start_year.to_string(),
            report.end_year.to_string(),
            r.subgraph_type.to_string(),
            r.idm.to_string(),
            format_percentage(r.percentage, locale_comma),
            format_p_value(r.p_value, locale_comma),
        ])?;
    }
    w.into_inner().map_err(|e| Error::io("<report csv>", e.into_error()))
}

pub fn render_json(report: &AnalysisReport) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(report)?;
    out.push(b'\n');
    Ok(out)
}

/// Inliers / Outliers / Difference rows per class, one column per period.
pub fn render_diff_markdown(table: &DiffTable, locale_comma: bool) -> String {
    let pct = |v: Option<f64>| v.map_or_else(|| "--".to_owned(), |x| format!("{}%", format_percentage(x, locale_comma)));
    let mut s = String::new();
    let _ = writeln!(s, "| IDM | Type | {} |", table.periods.join(" | "));
    let _ = writeln!(s, "|---|---|{}", "---|".repeat(table.periods.len()));
    for row in &table.rows {
        let line = |label: &str, cells: Vec<String>| format!("| {} | {} | {} |\n", row.idm, label, cells.join(" | "));
        s.push_str(&line("Inliers", row.cells.iter().map(|c| pct(c.inlier_pct)).collect()));
        s.push_str(&line("Outliers", row.cells.iter().map(|c| pct(c.outlier_pct)).collect()));
        if row.cells.iter().any(|c| c.difference.is_some()) {
            let cells: Vec<String> = row.cells.iter().map(|c| format!("**{}**", pct(c.difference))).collect();
            let _ = writeln!(s, "| | **Difference:** | {} |", cells.join(" | "));
        }
    }
    s
}

pub fn render(report: &AnalysisReport, format: Format, locale_comma: bool) -> Result<Vec<u8>> {
    match format {
        Format::Csv => render_csv(report, locale_comma),
        Format::Json => render_json(report),
        Format::Markdown => {
            let label = format!("{}-{}", report.start_year, report.end_year);
            let table = diff_table(&[(label, report.clone())]);
            Ok(render_diff_markdown(&table, locale_comma).into_bytes())
        }
    }
}
