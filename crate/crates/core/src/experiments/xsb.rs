//! Mixed Lebesgue norms controlled by `X^{s,b}` norms.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::data::gaussian;
use super::strichartz::check_admissible;
use super::{
    check_samples, num, ordered_map, tolerance_note, ExperimentKind, ExperimentReport, Provenance, Series, Status,
    Verdict, GROWTH_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::field::{forward_transform, Field, SpaceTimeField};
use crate::grid::Grid;
use crate::norms::{mixed_norm, xsb_norm, TimeWindow};
use crate::propagator::{LinearFlow, Order};
use crate::randomize::{keyed_rng, streams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct XsbTransferConfig {
    pub dim: usize,
    pub n: usize,
    pub box_length: f64,
    pub alpha: f64,
    pub q: f64,
    pub r: f64,
    pub b: f64,
    pub half_width: f64,
    /// Time resolutions compared under refinement.
    pub n_time_levels: Vec<usize>,
    pub draws: usize,
    /// Relative size of the random perturbation added to the linear solution.
    pub perturbation: f64,
    pub seed: u64,
    pub growth_tolerance: f64,
}

impl Default for XsbTransferConfig {
    fn default() -> Self {
        XsbTransferConfig {
            dim: 2,
            n: 32,
            box_length: 4.0 * std::f64::consts::PI,
            alpha: 1.5,
            q: 4.0,
            r: 4.0,
            b: 0.55,
            half_width: 0.5,
            n_time_levels: vec![64, 128],
            draws: 100,
            perturbation: 0.2,
            seed: 1,
            growth_tolerance: GROWTH_TOLERANCE,
        }
    }
}

impl XsbTransferConfig {
    pub fn validate(&self) -> Result<()> {
        Grid::spatial(self.dim, self.n, self.box_length)?;
        Order::new(self.alpha)?;
        check_admissible(self.dim, self.q, self.r)?;
        if !(self.b > 0.5) {
            return Err(Error::param("b", "transfer needs b > 1/2"));
        }
        TimeWindow::new(self.half_width)?;
        if self.n_time_levels.len() < 2 || self.n_time_levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("n_time_levels", "need at least two increasing resolutions"));
        }
        check_samples("n_time", self.n_time_levels[0], 8)?;
        check_samples("draws", self.draws, 1)?;
        if !(self.perturbation >= 0.0) {
            return Err(Error::param("perturbation", "must be non-negative"));
        }
        Ok(())
    }

    /// Regularity on the right-hand side, `(2-α)/q`.
    pub fn s(&self) -> f64 {
        if self.q.is_infinite() {
            0.0
        } else {
            (2.0 - self.alpha) / self.q
        }
    }
}

/// Windowed modulated linear solution plus a smooth random perturbation, on `grid`'s time axis from `t0`.
fn trial(config: &XsbTransferConfig, grid: &Grid, t0: f64, draw: usize) -> Result<SpaceTimeField> {
    let mut rng = keyed_rng(config.seed, streams::PERTURBATION, draw as u64);
    let d = config.dim;
    let width = rng.gen_range(0.8..1.5);
    let momentum: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let f = gaussian(grid, width, 1.0, &momentum)?;
    let scale = f.max_abs() * config.perturbation;
    let modes: Vec<(Vec<f64>, Complex64, f64, f64)> = (0..4)
        .map(|_| {
            let k: Vec<f64> = (0..d).map(|_| rng.gen_range(-3i64..=3) as f64 * grid.dk()).collect();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            (k, Complex64::new(re, im) * scale, rng.gen_range(0.0..3.0), rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let flow = LinearFlow::new(grid, Order::new(config.alpha)?);
    let spec = forward_transform(&f)?;
    let mut snaps = Vec::with_capacity(grid.n_time());
    for t in grid.times(t0) {
        let lin = flow.evaluate(&spec, t)?;
        let pert = Field::from_fn(*grid, |x| {
            modes
                .iter()
                .map(|(k, a, w, p)| {
                    let phase: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
                    a * Complex64::from_polar(1.0, phase) * (w * t + p).cos()
                })
                .sum()
        })?;
        snaps.push(lin.combine(Complex64::new(1.0, 0.0), &pert, Complex64::new(1.0, 0.0))?);
    }
    SpaceTimeField::from_snapshots(t0, grid.dt(), &snaps)
}

/// `‖η_T u‖_{L^q_t L^r_x}` and `‖u‖_{X^{s,b}}` (windowed) for one space-time field.
pub fn transfer_sides(u: &SpaceTimeField, config: &XsbTransferConfig) -> Result<(f64, f64)> {
    let window = TimeWindow::new(config.half_width)?;
    let lhs = mixed_norm(&u.windowed(|t| window.eval(t)), config.q, config.r)?;
    let rhs = xsb_norm(u, config.s(), config.b, config.alpha, &window)?;
    Ok((lhs, rhs))
}

pub fn xsb_transfer_check(config: &XsbTransferConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let window = TimeWindow::new(config.half_width)?;
    let space = Grid::spatial(config.dim, config.n, config.box_length)?;
    let prov = Provenance::new(ExperimentKind::XsbTransfer, config, config.seed)?;
    let mut report = ExperimentReport::new(prov, &["n_time", "draw", "lhs", "rhs", "ratio"]);
    report.notes.extend(tolerance_note("growth_tolerance", config.growth_tolerance, GROWTH_TOLERANCE));

    let mut maxima = Vec::new();
    for &n_time in &config.n_time_levels {
        let (grid, t0) = window.sampling_grid(&space, n_time)?;
        let sides = ordered_map(config.draws, |j| {
            let u = trial(config, &grid, t0, j)?;
            transfer_sides(&u, config)
        })?;
        let mut max_ratio: f64 = 0.0;
        for (j, (l, r)) in sides.iter().enumerate() {
            let ratio = l / r;
            max_ratio = max_ratio.max(ratio);
            report.push_row(vec![n_time.to_string(), j.to_string(), num(*l), num(*r), num(ratio)]);
        }
        maxima.push(max_ratio);
    }
    report.series.push(Series {
        name: "max_ratio".into(),
        x: config.n_time_levels.iter().map(|&n| n as f64).collect(),
        y: maxima.clone(),
    });
    let finite = maxima.iter().all(|m| m.is_finite() && *m > 0.0);
    report.verdicts.push(if finite {
        Verdict::new("finite", Status::Pass, format!("max ratios {maxima:?}"))
    } else {
        Verdict::new("finite", Status::Fail, format!("max ratios {maxima:?}"))
    });
    let growth = maxima.windows(2).map(|w| w[1] / w[0] - 1.0).fold(f64::NEG_INFINITY, f64::max);
    report.verdicts.push(Verdict::check(
        "stable",
        finite && growth <= config.growth_tolerance,
        format!("largest growth under time refinement {growth:.4} (tolerance {})", config.growth_tolerance),
    ));
    Ok(report)
}
