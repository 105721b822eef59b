//! Mass and energy along strang trajectories.

use serde::{Deserialize, Serialize};

use super::data::BaseDatum;
use super::{num, ExperimentKind, ExperimentReport, GridSpec, Provenance, Series, Verdict};
use crate::error::{Error, Result};
use crate::hartree::{energy, mass, Energy, HartreeParams};
use crate::solver::{evolve_with, EvolveOptions, Method, Trajectory};

pub const MASS_DRIFT_BOUND: f64 = 1e-10;
/// Accepted ratio of energy drifts at `dt` and `dt/2` for a second-order scheme.
pub const ENERGY_RATIO_RANGE: (f64, f64) = (3.0, 5.0);

/// Per-snapshot mass and energy, with relative drifts from `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationSeries {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<Energy>,
}

impl ConservationSeries {
    pub fn of(traj: &Trajectory) -> Result<Self> {
        let mut m = Vec::with_capacity(traj.n_time());
        let mut e = Vec::with_capacity(traj.n_time());
        for j in 0..traj.n_time() {
            let u = traj.snapshot(j);
            m.push(mass(&u));
            e.push(energy(&u, &traj.params)?);
        }
        Ok(ConservationSeries {
            times: traj.times(),
            mass: m,
            energy: e,
        })
    }

    /// `max_t |m(t) - m(0)| / m(0)`.
    pub fn mass_drift(&self) -> f64 {
        relative_drift(&self.mass)
    }

    /// `max_t |E(t) - E(0)| / |E(0)|`.
    pub fn energy_drift(&self) -> f64 {
        relative_drift(&self.energy.iter().map(|e| e.total).collect::<Vec<_>>())
    }
}

fn relative_drift(v: &[f64]) -> f64 {
    let first = v[0];
    let scale = first.abs().max(f64::MIN_POSITIVE);
    v.iter().map(|x| (x - first).abs()).fold(0.0, f64::max) / scale
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConservationConfig {
    pub grid: GridSpec,
    pub alpha: f64,
    pub mu: f64,
    pub base: BaseDatum,
    pub t_final: f64,
    /// Strang steps of the coarse run; the fine run uses twice as many.
    pub steps: usize,
    pub seed: u64,
}

impl Default for ConservationConfig {
    fn default() -> Self {
        ConservationConfig {
            grid: GridSpec {
                dim: 3,
                n: 16,
                box_length: 4.0 * std::f64::consts::PI,
            },
            alpha: 1.25,
            mu: 1.0,
            base: BaseDatum::Gaussian {
                width: 1.0,
                amplitude: 1.0,
                momentum: vec![1.0, 0.0, 0.0],
            },
            t_final: 0.1,
            steps: 10,
            seed: 0,
        }
    }
}

impl ConservationConfig {
    pub fn params(&self) -> Result<HartreeParams> {
        if self.mu == 0.0 {
            HartreeParams::linear(self.alpha, self.grid.dim)
        } else {
            HartreeParams::new(self.alpha, self.mu, self.grid.dim)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.grid()?;
        self.params()?;
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::param("t_final", "must be positive"));
        }
        if self.steps == 0 {
            return Err(Error::param("steps", "need at least one step"));
        }
        Ok(())
    }
}

const COLUMNS: [&str; 8] = [
    "steps", "t", "mass", "kinetic", "potential", "energy", "mass_drift", "energy_drift",
];

fn push_series(report: &mut ExperimentReport, steps: usize, s: &ConservationSeries) {
    let m0 = s.mass[0];
    let e0 = s.energy[0].total;
    for ((t, m), e) in s.times.iter().zip(&s.mass).zip(&s.energy) {
        report.push_row(vec![
            steps.to_string(),
            num(*t),
            num(*m),
            num(e.kinetic),
            num(e.potential),
            num(e.total),
            num((m - m0).abs() / m0.abs().max(f64::MIN_POSITIVE)),
            num((e.total - e0).abs() / e0.abs().max(f64::MIN_POSITIVE)),
        ]);
    }
}

/// Time series of mass and energy of one trajectory.
pub fn conservation_report(traj: &Trajectory) -> Result<ExperimentReport> {
    let series = ConservationSeries::of(traj)?;
    let prov = Provenance::new(ExperimentKind::Conservation, &(traj.params, traj.method), 0)?;
    let mut report = ExperimentReport::new(prov, &COLUMNS);
    push_series(&mut report, traj.n_time() - 1, &series);
    let drift = series.mass_drift();
    if traj.method == Method::Strang {
        report.verdicts.push(Verdict::check(
            "mass_drift",
            drift <= MASS_DRIFT_BOUND,
            format!("{drift:.3e} (bound {MASS_DRIFT_BOUND:e})"),
        ));
    }
    if traj.params.is_linear() {
        let e = series.energy_drift();
        report.verdicts.push(Verdict::check(
            "linear_conservation",
            drift <= 1e-12 && e <= 1e-12,
            format!("mass drift {drift:.3e}, energy drift {e:.3e}"),
        ));
    }
    report.series.push(Series {
        name: "mass".into(),
        x: series.times.clone(),
        y: series.mass.clone(),
    });
    report.series.push(Series {
        name: "energy".into(),
        x: series.times.clone(),
        y: series.energy.iter().map(|e| e.total).collect(),
    });
    Ok(report)
}

/// Strang runs at `steps` and `2·steps`; checks mass drift and the
/// second-order decay of the energy drift.
pub fn conservation_experiment(config: &ConservationConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let grid = config.grid.grid()?;
    let params = config.params()?;
    let datum = config.base.build(&grid)?;
    let run = |substeps: usize| {
        let options = EvolveOptions {
            substeps,
            ..EvolveOptions::default()
        };
        evolve_with(&datum, config.t_final, config.steps + 1, &params, Method::Strang, &options)
            .and_then(|t| ConservationSeries::of(&t))
    };
    let coarse = run(1)?;
    let fine = run(2)?;

    let prov = Provenance::new(ExperimentKind::Conservation, config, config.seed)?;
    let mut report = ExperimentReport::new(prov, &COLUMNS);
    push_series(&mut report, config.steps, &coarse);
    push_series(&mut report, 2 * config.steps, &fine);

    let mass_drift = coarse.mass_drift().max(fine.mass_drift());
    report.verdicts.push(Verdict::check(
        "mass_drift",
        mass_drift <= MASS_DRIFT_BOUND,
        format!("{mass_drift:.3e} (bound {MASS_DRIFT_BOUND:e})"),
    ));
    let (e1, e2) = (coarse.energy_drift(), fine.energy_drift());
    if params.is_linear() {
        report.verdicts.push(Verdict::check(
            "linear_conservation",
            mass_drift <= 1e-12 && e1.max(e2) <= 1e-12,
            format!("mass drift {mass_drift:.3e}, energy drift {:.3e}", e1.max(e2)),
        ));
    } else {
        let ratio = e1 / e2;
        report.verdicts.push(Verdict::check(
            "energy_order",
            ratio >= ENERGY_RATIO_RANGE.0 && ratio <= ENERGY_RATIO_RANGE.1,
            format!("drift {e1:.3e} → {e2:.3e}, ratio {ratio:.3} (accepted {ENERGY_RATIO_RANGE:?})"),
        ));
    }
    report.series.push(Series {
        name: "energy_drift".into(),
        x: vec![config.steps as f64, 2.0 * config.steps as f64],
        y: vec![e1, e2],
    });
    Ok(report)
}
