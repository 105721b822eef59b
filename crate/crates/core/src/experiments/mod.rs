//! Monte-Carlo and deterministic experiments with machine-readable reports.
//!
//! Every experiment is a pure function of its config: samples are drawn from
//! counter-keyed generators, evaluated in parallel, collected in index order
//! and folded sequentially, so the worker count never changes a number.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid;

mod bilinear;
mod conservation;
pub mod data;
mod khintchine;
mod smoothing;
pub mod stats;
mod strichartz;
mod tail;
mod xsb;

pub use bilinear::{
    bilinear_annulus, bilinear_ball, bilinear_forms, bilinear_statistic, BilinearAnnulusConfig, BilinearBallConfig,
};
pub use conservation::{conservation_experiment, conservation_report, ConservationConfig, ConservationSeries};
pub use khintchine::{gaussian_abs_moment, khintchine_check, KhintchineConfig};
pub use smoothing::{smoothing_experiment, SmoothingConfig};
pub use strichartz::{check_admissible, strichartz_loss_check, strichartz_ratio, StrichartzConfig};
pub use tail::{mc_tail, McTailConfig};
pub use xsb::{transfer_sides, xsb_transfer_check, XsbTransferConfig};

/// Added to every predicted exponent before a one-sided slope verdict.
pub const SLOPE_TOLERANCE: f64 = 0.2;
/// Largest relative growth of a statistic under refinement that counts as stable.
pub const GROWTH_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// A fitted exponent or constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub name: String,
    pub estimate: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub residual: f64,
    pub points: usize,
}

impl Fit {
    pub fn slope(name: impl Into<String>, line: &stats::LineFit) -> Self {
        Fit {
            name: name.into(),
            estimate: line.slope,
            stderr: line.slope_stderr,
            ci95: line.slope_ci95(),
            residual: line.residual,
            points: line.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: String,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn new(criterion: impl Into<String>, status: Status, detail: impl Into<String>) -> Self {
        Verdict {
            criterion: criterion.into(),
            status,
            detail: detail.into(),
        }
    }

    pub fn check(criterion: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Verdict::new(criterion, if ok { Status::Pass } else { Status::Fail }, detail)
    }
}

/// A named curve published in the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: String,
    /// SHA-256 of the canonical JSON form of the config.
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl Provenance {
    pub fn new<C: Serialize>(kind: ExperimentKind, config: &C, seed: u64) -> Result<Self> {
        Ok(Provenance {
            kind: kind.name().to_string(),
            config_hash: config_hash(kind, config)?,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }
}

pub fn config_hash<C: Serialize>(kind: ExperimentKind, config: &C) -> Result<String> {
    let body = serde_json::to_vec(&serde_json::json!({ "kind": kind.name(), "config": config }))?;
    Ok(hex::encode(Sha256::digest(&body)))
}

/// Result of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub columns: Vec<String>,
    /// One record per sample (or per cell for aggregate experiments).
    pub rows: Vec<Vec<String>>,
    pub fits: Vec<Fit>,
    pub verdicts: Vec<Verdict>,
    pub series: Vec<Series>,
    /// Overrides of project-wide tolerances and other remarks.
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

/// Full-precision text form of a number as written to CSV.
pub fn num(x: f64) -> String {
    format!("{x:.17e}")
}

impl ExperimentReport {
    pub fn new(provenance: Provenance, columns: &[&str]) -> Self {
        ExperimentReport {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            fits: Vec::new(),
            verdicts: Vec::new(),
            series: Vec::new(),
            notes: Vec::new(),
            provenance,
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Fail beats inconclusive beats pass; a report without verdicts is inconclusive.
    pub fn status(&self) -> Status {
        if self.verdicts.is_empty() {
            return Status::Inconclusive;
        }
        self.verdicts.iter().map(|v| v.status).fold(Status::Pass, |acc, s| match (acc, s) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        })
    }

    pub fn fit(&self, name: &str) -> Option<&Fit> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn verdict(&self, criterion: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.criterion == criterion)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Everything except the per-sample rows.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.provenance.kind,
            "status": self.status(),
            "columns": self.columns,
            "rows": self.rows.len(),
            "fits": self.fits,
            "verdicts": self.verdicts,
            "series": self.series,
            "notes": self.notes,
            "provenance": self.provenance,
        })
    }
}

/// Recorded when a config loosens or tightens a project-wide tolerance.
pub(crate) fn tolerance_note(name: &str, used: f64, default: f64) -> Option<String> {
    (used != default).then(|| format!("{name} overridden: {used} (default {default})"))
}

pub(crate) fn check_samples(name: &'static str, n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::param(name, format!("need at least {min}, got {n}")));
    }
    Ok(())
}

/// Evaluates `f(0..n)` on the rayon pool, returning results in index order.
pub(crate) fn ordered_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Open interval of regularities `s` covered by the local theory for order `α`.
pub fn admissible_s_range(alpha: f64) -> Result<(f64, f64)> {
    let alpha = crate::propagator::Order::new(alpha)?.get();
    let lo = ((2.0 * alpha - 1.0) / (4.0 * alpha - 3.0) * alpha / 2.0).max(0.5);
    let hi = alpha / 2.0;
    assert!(lo < hi, "empty admissible range at alpha = {alpha}");
    Ok((lo, hi))
}

/// Spatial part of a grid as it appears in configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub box_length: f64,
}

impl GridSpec {
    pub fn grid(&self) -> Result<Grid> {
        Grid::spatial(self.dim, self.n, self.box_length)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    McTail,
    Khintchine,
    BilinearAnnulus,
    BilinearBall,
    Strichartz,
    XsbTransfer,
    Smoothing,
    Conservation,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::McTail,
        ExperimentKind::Khintchine,
        ExperimentKind::BilinearAnnulus,
        ExperimentKind::BilinearBall,
        ExperimentKind::Strichartz,
        ExperimentKind::XsbTransfer,
        ExperimentKind::Smoothing,
        ExperimentKind::Conservation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::McTail => "mc-tail",
            ExperimentKind::Khintchine => "khintchine",
            ExperimentKind::BilinearAnnulus => "bilinear-annulus",
            ExperimentKind::BilinearBall => "bilinear-ball",
            ExperimentKind::Strichartz => "strichartz",
            ExperimentKind::XsbTransfer => "xsb-transfer",
            ExperimentKind::Smoothing => "smoothing",
            ExperimentKind::Conservation => "conservation",
        }
    }

    /// The estimate each experiment probes.
    pub fn anchor(&self) -> &'static str {
        match self {
            ExperimentKind::McTail => "subgaussian tails of randomized data and of its linear evolution",
            ExperimentKind::Khintchine => "Khintchine moment growth of random series",
            ExperimentKind::BilinearAnnulus => "bilinear Strichartz estimate for dyadic annuli",
            ExperimentKind::BilinearBall => "bilinear estimate with one factor in a small ball",
            ExperimentKind::Strichartz => "Strichartz estimate with derivative loss (2-α)/q",
            ExperimentKind::XsbTransfer => "transfer from X^{s,b} to mixed Lebesgue norms",
            ExperimentKind::Smoothing => "smoothing of the Duhamel part",
            ExperimentKind::Conservation => "mass and energy conservation",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::param("kind", format!("unknown experiment '{s}'")))
    }
}

/// `kind → anchor` lines in stable order.
pub fn list_experiments() -> String {
    ExperimentKind::ALL
        .iter()
        .map(|k| format!("{} → {}\n", k.name(), k.anchor()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissible_examples() {
        let (lo, hi) = admissible_s_range(2.0).unwrap();
        assert!((lo - 0.6).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        let (lo, hi) = admissible_s_range(1.5).unwrap();
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 0.75).abs() < 1e-15);
        let (lo, hi) = admissible_s_range(1.25).unwrap();
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 0.625).abs() < 1e-15);
        assert!(admissible_s_range(1.0).is_err());
    }

    #[test]
    fn status_aggregation() {
        let p = Provenance {
            kind: "x".into(),
            config_hash: String::new(),
            seed: 0,
            version: String::new(),
        };
        let mut r = ExperimentReport::new(p, &["a"]);
        assert_eq!(r.status(), Status::Inconclusive);
        r.verdicts.push(Verdict::check("a", true, ""));
        assert_eq!(r.status(), Status::Pass);
        r.verdicts.push(Verdict::new("b", Status::Inconclusive, ""));
        assert_eq!(r.status(), Status::Inconclusive);
        r.verdicts.push(Verdict::check("c", false, ""));
        assert_eq!(r.status(), Status::Fail);
    }

    #[test]
    fn listing_is_stable_and_complete() {
        let text = list_experiments();
        for k in ExperimentKind::ALL {
            assert!(text.contains(k.name()));
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        assert_eq!(text, list_experiments());
    }
}
