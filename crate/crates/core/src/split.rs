//! Weight-threshold split into "inliers" (weak links) and "outliers"
//! (strong links).
//!
//! The threshold sits at a discontinuity of the edge-weight histogram: the
//! widest run of empty bins, with the cut placed at the lower edge of the
//! first occupied bin after the run. Binning is over `ln(weight)` by default
//! because trade volumes span many orders of magnitude.

use std::io::Write;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub bins: usize,
    pub min_gap_bins: usize,
    pub manual_threshold: Option<f64>,
    pub log_scale: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            bins: 10_000,
            min_gap_bins: 1,
            manual_threshold: None,
            log_scale: true,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 {
            return Err(Error::InvalidConfig(format!("bins must be >= 2, got {}", self.bins)));
        }
        if self.min_gap_bins < 1 {
            return Err(Error::InvalidConfig("min gap must be >= 1 bin".into()));
        }
        if let Some(t) = self.manual_threshold {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidConfig(format!("threshold must be > 0, got {t}")));
            }
        }
        Ok(())
    }
}

/// Equal-width histogram over `[lo, hi]` in the binning domain
/// (`ln(weight)` when `log_scale`, raw weight otherwise).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub lo: f64,
    pub hi: f64,
    pub log_scale: bool,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    /// All weights equal: only one bin can be occupied.
    pub fn is_degenerate(&self) -> bool {
        !(self.hi > self.lo)
    }

    fn to_weight(&self, x: f64) -> f64 {
        if self.log_scale {
            x.exp()
        } else {
            x
        }
    }

    /// Lower edge of bin `i`, in weight units.
    pub fn bin_lower(&self, i: usize) -> f64 {
        self.to_weight(self.lo + i as f64 * self.width())
    }

    pub fn bin_upper(&self, i: usize) -> f64 {
        if i + 1 == self.counts.len() {
            return self.to_weight(self.hi);
        }
        self.to_weight(self.lo + (i + 1) as f64 * self.width())
    }

    pub fn bin_of(&self, weight: f64) -> usize {
        let x = if self.log_scale { weight.ln() } else { weight };
        if self.is_degenerate() {
            return 0;
        }
        let b = ((x - self.lo) / self.width()).floor();
        (b.max(0.0) as usize).min(self.counts.len() - 1)
    }

    /// `bin_lower,bin_upper,count` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["bin_lower", "bin_upper", "count"])?;
        for (i, c) in self.counts.iter().enumerate() {
            w.write_record([self.bin_lower(i).to_string(), self.bin_upper(i).to_string(), c.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<histogram>", e))?;
        Ok(())
    }
}

pub fn build_histogram(g: &WeightedDigraph, cfg: &SplitConfig) -> Result<Histogram> {
    cfg.validate()?;
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph("cannot histogram a graph without edges"));
    }
    if cfg.log_scale {
        if let Some(e) = g.edges().iter().find(|e| !(e.weight > 0.0)) {
            return Err(Error::InvalidWeight {
                src: g.label(e.src).to_owned(),
                dst: g.label(e.dst).to_owned(),
                weight: e.weight,
            });
        }
    }
    let map = |w: f64| if cfg.log_scale { w.ln() } else { w };
    let lo = map(g.min_weight().unwrap());
    let hi = map(g.max_weight().unwrap());
    let mut hist = Histogram {
        counts: vec![0; cfg.bins],
        lo,
        hi,
        log_scale: cfg.log_scale,
    };
    for e in g.edges() {
        let b = hist.bin_of(e.weight);
        hist.counts[b] += 1;
    }
    Ok(hist)
}

/// Index of the first occupied bin after the widest run of at least
/// `min_gap` empty bins (earliest run wins ties).
fn gap_end(counts: &[u64], min_gap: usize) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None; // (len, bin after run)
    let mut run = 0usize;
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            run += 1;
            continue;
        }
        if run >= min_gap && run > 0 && best.is_none_or(|(len, _)| run > len) {
            best = Some((run, i));
        }
        run = 0;
    }
    // a trailing empty run has no occupied bin after it
    best.map(|(_, i)| i)
}

/// Threshold in weight units. A manual threshold wins; otherwise the lower
/// edge of the occupied bin that follows the widest empty-bin run.
pub fn detect_threshold(hist: &Histogram, cfg: &SplitConfig) -> Result<f64> {
    if let Some(t) = cfg.manual_threshold {
        return Ok(t);
    }
    if hist.is_degenerate() {
        return Err(Error::DegenerateHistogram);
    }
    gap_end(&hist.counts, cfg.min_gap_bins)
        .map(|i| hist.bin_lower(i))
        .ok_or(Error::NoDiscontinuity {
            bins: hist.bins(),
            min_gap: cfg.min_gap_bins,
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitWarning {
    /// Threshold at or below the smallest weight: everything is an outlier.
    AllOutliers,
    /// Threshold above the largest weight: everything is an inlier.
    AllInliers,
}

#[derive(Clone, Debug)]
pub struct SplitResult {
    pub threshold: f64,
    /// Edges with weight strictly below the threshold.
    pub inliers: WeightedDigraph,
    /// Edges with weight at or above the threshold.
    pub outliers: WeightedDigraph,
    pub histogram: Option<Histogram>,
    pub warning: Option<SplitWarning>,
}

/// Partition the edges of `g` at `threshold`.
pub fn split_graph(g: &WeightedDigraph, threshold: f64) -> SplitResult {
    let warning = match (g.min_weight(), g.max_weight()) {
        (Some(min), _) if threshold <= min => Some(SplitWarning::AllOutliers),
        (_, Some(max)) if threshold > max => Some(SplitWarning::AllInliers),
        _ => None,
    };
    if let Some(w) = warning {
        warn!("split threshold {threshold} does not cut the weight range: {w:?}");
    }
    SplitResult {
        threshold,
        inliers: g.edge_subgraph(|e| e.weight < threshold),
        outliers: g.edge_subgraph(|e| e.weight >= threshold),
        histogram: None,
        warning,
    }
}

/// Histogram, detect and split in one go.
///
/// A detected threshold is snapped into `(max inlier, min outlier]` so that
/// the `exp` round trip of a log-scale bin edge cannot move an edge across
/// the cut.
pub fn split_auto(g: &WeightedDigraph, cfg: &SplitConfig) -> Result<SplitResult> {
    cfg.validate()?;
    if let Some(t) = cfg.manual_threshold {
        let hist = build_histogram(g, cfg).ok();
        return Ok(SplitResult {
            histogram: hist,
            ..split_graph(g, t)
        });
    }
    let hist = build_histogram(g, cfg)?;
    let raw = detect_threshold(&hist, cfg)?;
    let cut_bin = gap_end(&hist.counts, cfg.min_gap_bins).expect("detect_threshold succeeded");
    let min_outlier = g
        .edges()
        .iter()
        .filter(|e| hist.bin_of(e.weight) >= cut_bin)
        .map(|e| e.weight)
        .min_by(f64::total_cmp)
        .expect("bin after the gap is occupied");
    let max_inlier = g
        .edges()
        .iter()
        .filter(|e| hist.bin_of(e.weight) < cut_bin)
        .map(|e| e.weight)
        .max_by(f64::total_cmp)
        .expect("bin 0 is occupied");
    let threshold = if raw > max_inlier && raw <= min_outlier {
        raw
    } else {
        min_outlier
    };
    Ok(SplitResult {
        histogram: Some(hist),
        ..split_graph(g, threshold)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn weights(ws: &[f64]) -> WeightedDigraph {
        build_graph(ws.iter().enumerate().map(|(i, &w)| (format!("s{i}"), format!("d{i}"), w))).unwrap()
    }

    fn linear(bins: usize) -> SplitConfig {
        SplitConfig {
            bins,
            log_scale: false,
            ..SplitConfig::default()
        }
    }

    #[test]
    fn equal_width_linear_bins() {
        let h = build_histogram(&weights(&[1.0, 2.0, 3.0, 4.0]), &linear(2)).unwrap();
        assert_eq!(h.counts, vec![2, 2]);
    }

    #[test]
    fn equal_weights_are_degenerate() {
        let h = build_histogram(&weights(&[5.0, 5.0, 5.0]), &SplitConfig::default()).unwrap();
        assert!(h.is_degenerate());
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert!(matches!(
            detect_threshold(&h, &SplitConfig::default()),
            Err(Error::DegenerateHistogram)
        ));
    }

    #[test]
    fn threshold_at_lower_edge_after_widest_gap() {
        let h = Histogram {
            counts: vec![5, 3, 0, 0, 0, 2],
            lo: 0.0,
            hi: 60.0,
            log_scale: false,
        };
        assert_eq!(detect_threshold(&h, &linear(6)).unwrap(), 50.0);
    }

    #[test]
    fn widest_gap_wins_over_earlier_narrow_one() {
        let h = Histogram {
            counts: vec![1, 0, 1, 0, 0, 0, 1],
            lo: 0.0,
            hi: 7.0,
            log_scale: false,
        };
        assert_eq!(detect_threshold(&h, &linear(7)).unwrap(), 6.0);
        let cfg = SplitConfig {
            min_gap_bins: 4,
            ..linear(7)
        };
        assert!(matches!(detect_threshold(&h, &cfg), Err(Error::NoDiscontinuity { .. })));
    }

    #[test]
    fn no_empty_bin_is_an_error() {
        let h = Histogram {
            counts: vec![4, 4, 4, 4],
            lo: 0.0,
            hi: 4.0,
            log_scale: false,
        };
        let err = detect_threshold(&h, &linear(4)).unwrap_err();
        assert!(err.to_string().contains("--threshold"));
    }

    #[test]
    fn manual_threshold_overrides() {
        let h = Histogram {
            counts: vec![4, 4, 4, 4],
            lo: 0.0,
            hi: 4.0,
            log_scale: false,
        };
        let cfg = SplitConfig {
            manual_threshold: Some(123.0),
            ..linear(4)
        };
        assert_eq!(detect_threshold(&h, &cfg).unwrap(), 123.0);
    }

    #[test]
    fn split_by_definition() {
        let g = build_graph([("A", "B", 1.0), ("C", "D", 100.0)]).unwrap();
        let s = split_graph(&g, 50.0);
        assert_eq!(s.inliers.edge_count(), 1);
        assert_eq!(s.inliers.labels(), &["A".to_string(), "B".to_string()]);
        assert_eq!(s.outliers.labels(), &["C".to_string(), "D".to_string()]);
        assert_eq!(s.warning, None);
    }

    #[test]
    fn threshold_below_range_warns() {
        let g = build_graph([("A", "B", 1.0), ("C", "D", 100.0)]).unwrap();
        let s = split_graph(&g, 0.5);
        assert_eq!(s.warning, Some(SplitWarning::AllOutliers));
        assert_eq!(s.outliers.edge_count(), 2);
        assert_eq!(s.inliers.edge_count(), 0);
        assert_eq!(split_graph(&g, 101.0).warning, Some(SplitWarning::AllInliers));
    }

    #[test]
    fn log_histogram_shows_gap_before_tail() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, LogNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let bulk = LogNormal::new(8.0, 1.0).unwrap();
        let mut ws: Vec<f64> = (0..500).map(|_| bulk.sample(&mut rng)).collect();
        let bulk_max = ws.iter().cloned().fold(0.0, f64::max);
        ws.extend((0..20).map(|i| 1e6 * bulk_max * (1.0 + i as f64 / 10.0)));
        let g = weights(&ws);
        let h = build_histogram(&g, &SplitConfig::default()).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 520);
        let longest = h.counts.split(|&c| c > 0).map(<[u64]>::len).max().unwrap();
        assert!(longest > 5000, "longest empty run {longest}");
        let s = split_auto(&g, &SplitConfig::default()).unwrap();
        assert_eq!(s.outliers.edge_count(), 20);
        assert!(s.threshold > bulk_max);
    }

    #[test]
    fn histogram_csv_has_one_row_per_bin() {
        let h = build_histogram(&weights(&[1.0, 2.0, 3.0, 4.0]), &linear(2)).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "bin_lower,bin_upper,count\n1,2.5,2\n2.5,4,2\n");
    }
}
