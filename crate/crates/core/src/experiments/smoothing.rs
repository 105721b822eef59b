//! Smoothing of the Duhamel part `v(t) = u(t) - U(t) φ^ω`.
//!
//! The randomized datum sits at regularity `s` only, so its `H^σ` norm grows
//! under spatial refinement. The nonlinear correction `v(T)` should not.

use serde::{Deserialize, Serialize};

use super::data::power_law_spectrum;
use super::stats::median;
use super::{admissible_s_range, check_samples, num, ordered_map, ExperimentKind, ExperimentReport, Provenance, Series, Verdict};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hartree::HartreeParams;
use crate::norms::{sobolev_norm, sobolev_norm_spectrum};
use crate::randomize::{Law, Randomizer};
use crate::solver::{duhamel_part, evolve_with, EvolveOptions, Method};

/// Smallest allowed growth exponent of the datum's `H^σ` norm, as a fraction of `σ - s`.
pub const DATUM_GROWTH_FRACTION: f64 = 0.8;
/// Largest allowed growth factor of the Duhamel part's `H^σ` norm.
pub const DUHAMEL_GROWTH_BOUND: f64 = 1.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoothingConfig {
    pub dim: usize,
    pub alpha: f64,
    pub mu: f64,
    pub s: f64,
    /// Defaults to `α/2 + 0.05`.
    pub sigma: Option<f64>,
    pub box_length: f64,
    /// Coarse resolution; the fine one is twice this.
    pub n: usize,
    pub t_final: f64,
    pub steps: usize,
    pub samples: usize,
    pub law: Law,
    pub seed: u64,
    pub phase_seed: u64,
    /// The base spectrum decays like `(1+|ξ|)^{-(s + d/2 + decay_excess)}`.
    pub decay_excess: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            dim: 3,
            alpha: 1.25,
            mu: 1.0,
            s: 0.55,
            sigma: None,
            box_length: 4.0 * std::f64::consts::PI,
            n: 16,
            t_final: 0.05,
            steps: 20,
            samples: 32,
            law: Law::ComplexGaussian,
            seed: 1,
            phase_seed: 7,
            decay_excess: 0.05,
        }
    }
}

impl SmoothingConfig {
    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or(self.alpha / 2.0 + 0.05)
    }

    pub fn params(&self) -> Result<HartreeParams> {
        if self.mu == 0.0 {
            HartreeParams::linear(self.alpha, self.dim)
        } else {
            HartreeParams::new(self.alpha, self.mu, self.dim)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        let (lo, hi) = admissible_s_range(self.alpha)?;
        if !(self.s > lo && self.s < hi) {
            return Err(Error::param("s", format!("{} is outside the admissible range ({lo}, {hi})", self.s)));
        }
        if !(self.sigma() > self.s) {
            return Err(Error::param("sigma", "must exceed s"));
        }
        Grid::spatial(self.dim, 2 * self.n, self.box_length)?;
        Grid::spatial(self.dim, self.n, self.box_length)?;
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::param("t_final", "must be positive"));
        }
        check_samples("steps", self.steps, 1)?;
        check_samples("samples", self.samples, 20)?;
        if !(self.decay_excess > 0.0) {
            return Err(Error::param("decay_excess", "must be positive"));
        }
        Ok(())
    }
}

/// `(A, B) = (‖v(T)‖_{H^σ}, ‖φ^ω‖_{H^σ})` per sample at resolution `n`.
fn level(config: &SmoothingConfig, n: usize, scale: f64) -> Result<Vec<(f64, f64)>> {
    let grid = Grid::spatial(config.dim, n, config.box_length)?;
    let params = config.params()?;
    let decay = config.s + config.dim as f64 / 2.0 + config.decay_excess;
    let mut spec = power_law_spectrum(&grid, decay, 1.0, config.phase_seed);
    for v in spec.values_mut() {
        *v *= scale;
    }
    let randomizer = Randomizer::from_spectrum(spec, config.law)?;
    let sigma = config.sigma();
    let options = EvolveOptions::default();
    ordered_map(config.samples, |i| {
        let phi = randomizer.realize(config.seed, i as u64)?;
        let b = sobolev_norm(&phi, sigma)?;
        let traj = evolve_with(&phi, config.t_final, config.steps + 1, &params, Method::Strang, &options)
            .map_err(|e| match e {
                Error::Unstable { time } => Error::param(
                    "t_final",
                    format!("evolution became unstable at t = {time}; local theory only, try a smaller T"),
                ),
                other => other,
            })?;
        let v = duhamel_part(&traj, &phi)?;
        let a = sobolev_norm(&v.snapshot(v.n_time() - 1), sigma)?;
        Ok((a, b))
    })
}

pub fn smoothing_experiment(config: &SmoothingConfig) -> Result<ExperimentReport> {
    config.validate()?;
    // normalize ‖φ‖_{H^s} = 1 at the coarse level and keep the constant
    let coarse = Grid::spatial(config.dim, config.n, config.box_length)?;
    let decay = config.s + config.dim as f64 / 2.0 + config.decay_excess;
    let base = power_law_spectrum(&coarse, decay, 1.0, config.phase_seed);
    let scale = 1.0 / sobolev_norm_spectrum(&base, config.s);

    let levels = [config.n, 2 * config.n];
    let results = levels
        .iter()
        .map(|&n| level(config, n, scale))
        .collect::<Result<Vec<_>>>()?;

    let prov = Provenance::new(ExperimentKind::Smoothing, config, config.seed)?;
    let mut report = ExperimentReport::new(prov, &["grid_n", "sample", "duhamel_h_sigma", "datum_h_sigma"]);
    report.notes.push(format!(
        "T = {}, sigma = {}, {} strang steps",
        config.t_final,
        config.sigma(),
        config.steps
    ));
    for (n, res) in levels.iter().zip(&results) {
        for (i, (a, b)) in res.iter().enumerate() {
            report.push_row(vec![n.to_string(), i.to_string(), num(*a), num(*b)]);
        }
    }
    let med = |res: &[(f64, f64)]| {
        (
            median(&res.iter().map(|r| r.0).collect::<Vec<_>>()),
            median(&res.iter().map(|r| r.1).collect::<Vec<_>>()),
        )
    };
    let (a0, b0) = med(&results[0]);
    let (a1, b1) = med(&results[1]);
    let datum_growth = b1 / b0;
    let datum_bound = 2f64.powf((config.sigma() - config.s) * DATUM_GROWTH_FRACTION);
    report.verdicts.push(Verdict::check(
        "datum_growth",
        datum_growth >= datum_bound,
        format!("median ‖φ^ω‖_H^σ grows by {datum_growth:.4} (need ≥ {datum_bound:.4})"),
    ));
    if config.mu == 0.0 {
        report.verdicts.push(Verdict::check(
            "duhamel_vanishes",
            a0 == 0.0 && a1 == 0.0,
            format!("median ‖v(T)‖_H^σ = {a0:e}, {a1:e}"),
        ));
    } else {
        let duhamel_growth = a1 / a0;
        report.verdicts.push(Verdict::check(
            "duhamel_growth",
            duhamel_growth <= DUHAMEL_GROWTH_BOUND,
            format!("median ‖v(T)‖_H^σ grows by {duhamel_growth:.4} (need ≤ {DUHAMEL_GROWTH_BOUND})"),
        ));
    }
    report.series.push(Series {
        name: "median_duhamel_h_sigma".into(),
        x: levels.iter().map(|&n| n as f64).collect(),
        y: vec![a0, a1],
    });
    report.series.push(Series {
        name: "median_datum_h_sigma".into(),
        x: levels.iter().map(|&n| n as f64).collect(),
        y: vec![b0, b1],
    });
    Ok(report)
}
