//! Strichartz estimate with derivative loss under spatial refinement.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::power_law_spectrum;
use super::stats::mean;
use super::{
    check_samples, num, ordered_map, tolerance_note, ExperimentKind, ExperimentReport, Provenance, Series, Verdict,
    GROWTH_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, Field};
use crate::grid::Grid;
use crate::norms::{lp_norm, time_norm};
use crate::propagator::{riesz_spectrum, LinearFlow, Order};
use crate::randomize::{keyed_rng, streams};

/// `2/q + d/r = d/2`, `q ≥ 2`, excluding the forbidden endpoint `(2, 2, ∞)`.
pub fn check_admissible(d: usize, q: f64, r: f64) -> Result<()> {
    let df = d as f64;
    let lhs = if q.is_infinite() { 0.0 } else { 2.0 / q } + if r.is_infinite() { 0.0 } else { df / r };
    if q < 2.0 || r < 2.0 || (lhs - df / 2.0).abs() > 1e-12 {
        return Err(Error::param("(q, r)", format!("({q}, {r}) is not admissible in d = {d}")));
    }
    if d == 2 && q == 2.0 && r.is_infinite() {
        return Err(Error::param("(q, r)", "the endpoint (2, ∞) in d = 2 is excluded"));
    }
    Ok(())
}

/// `‖|∇|^{-(2-α)/q} U(t) f‖_{L^q([0,T]) L^r} / ‖f‖_{L²}` on `n_time` equispaced samples.
pub fn strichartz_ratio(f: &Field, alpha: Order, q: f64, r: f64, t_final: f64, n_time: usize) -> Result<f64> {
    if n_time < 2 {
        return Err(Error::param("n_time", "need at least two samples"));
    }
    let loss = if q.is_infinite() { 0.0 } else { (2.0 - alpha.get()) / q };
    let mut spec = forward_transform(f)?;
    if loss != 0.0 {
        riesz_spectrum(&mut spec, -loss);
    }
    let flow = LinearFlow::new(f.grid(), alpha);
    let dt = t_final / (n_time - 1) as f64;
    let samples = (0..n_time)
        .map(|j| lp_norm(&flow.evaluate(&spec, j as f64 * dt)?, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(time_norm(&samples, dt, q) / f.l2_norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrichartzConfig {
    pub dim: usize,
    pub alpha: f64,
    pub box_length: f64,
    pub levels: Vec<usize>,
    /// `(q, r)` pairs; `q = inf` checks unitarity.
    pub pairs: Vec<(f64, f64)>,
    /// Spectral decay is `(1+|ξ|)^{-(d/2 + decay_excess)}`.
    pub decay_excess: f64,
    pub t_final: f64,
    pub n_time: usize,
    pub draws: usize,
    pub seed: u64,
    pub growth_tolerance: f64,
}

impl Default for StrichartzConfig {
    fn default() -> Self {
        StrichartzConfig {
            dim: 3,
            alpha: 1.5,
            box_length: std::f64::consts::TAU,
            levels: vec![16, 32, 64],
            pairs: vec![(4.0, 3.0), (8.0, 2.4), (f64::INFINITY, 2.0)],
            decay_excess: 0.1,
            t_final: 1.0,
            n_time: 33,
            draws: 6,
            seed: 1,
            growth_tolerance: GROWTH_TOLERANCE,
        }
    }
}

impl StrichartzConfig {
    pub fn validate(&self) -> Result<()> {
        Order::new(self.alpha)?;
        if self.levels.len() < 2 {
            return Err(Error::param("levels", "need at least two resolutions"));
        }
        for w in self.levels.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::param("levels", "resolutions must increase"));
            }
        }
        for &n in &self.levels {
            Grid::spatial(self.dim, n, self.box_length)?;
        }
        if self.pairs.is_empty() {
            return Err(Error::param("pairs", "need at least one (q, r) pair"));
        }
        for &(q, r) in &self.pairs {
            check_admissible(self.dim, q, r)?;
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::param("t_final", "must be positive"));
        }
        check_samples("n_time", self.n_time, 2)?;
        check_samples("draws", self.draws, 1)?;
        if !(self.decay_excess > 0.0) {
            return Err(Error::param("decay_excess", "must be positive for an L² datum"));
        }
        Ok(())
    }
}

/// Ratio statistics for every `(q, r)` pair across refinements of the same
/// mean-zero random datum.
pub fn strichartz_loss_check(config: &StrichartzConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let alpha = Order::new(config.alpha)?;
    let decay = config.dim as f64 / 2.0 + config.decay_excess;
    let prov = Provenance::new(ExperimentKind::Strichartz, config, config.seed)?;
    let mut report = ExperimentReport::new(prov, &["q", "r", "grid_n", "draw", "ratio"]);
    report.notes.extend(tolerance_note("growth_tolerance", config.growth_tolerance, GROWTH_TOLERANCE));

    // ratios[level][draw][pair]
    let mut ratios = Vec::new();
    for &n in &config.levels {
        let grid = Grid::spatial(config.dim, n, config.box_length)?;
        let per_draw = ordered_map(config.draws, |j| {
            let phase_seed = keyed_rng(config.seed, streams::BASE_PHASES, j as u64).gen::<u64>();
            let f = inverse_transform(&power_law_spectrum(&grid, decay, 1.0, phase_seed))?;
            config
                .pairs
                .iter()
                .map(|&(q, r)| strichartz_ratio(&f, alpha, q, r, config.t_final, config.n_time))
                .collect::<Result<Vec<f64>>>()
        })?;
        ratios.push(per_draw);
    }
    for (p, &(q, r)) in config.pairs.iter().enumerate() {
        for (l, &n) in config.levels.iter().enumerate() {
            for (j, draw) in ratios[l].iter().enumerate() {
                report.push_row(vec![num(q), num(r), n.to_string(), j.to_string(), num(draw[p])]);
            }
        }
    }

    for (p, &(q, r)) in config.pairs.iter().enumerate() {
        let means: Vec<f64> = ratios
            .iter()
            .map(|level| mean(&level.iter().map(|d| d[p]).collect::<Vec<_>>()))
            .collect();
        report.series.push(Series {
            name: format!("mean_ratio(q={q},r={r})"),
            x: config.levels.iter().map(|&n| n as f64).collect(),
            y: means.clone(),
        });
        if q.is_infinite() {
            let worst = ratios
                .iter()
                .flat_map(|level| level.iter().map(|d| (d[p] - 1.0).abs()))
                .fold(0.0, f64::max);
            report.verdicts.push(Verdict::check(
                format!("unitarity(q=inf,r={r})"),
                worst <= 1e-10,
                format!("max |ratio - 1| = {worst:.3e}"),
            ));
        } else {
            let growth = means.windows(2).map(|w| w[1] / w[0] - 1.0).fold(f64::NEG_INFINITY, f64::max);
            report.verdicts.push(Verdict::check(
                format!("stable(q={q},r={r})"),
                growth <= config.growth_tolerance,
                format!("largest growth across refinements {:.4} (tolerance {})", growth, config.growth_tolerance),
            ));
        }
    }
    Ok(report)
}
