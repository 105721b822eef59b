//! Empirical tails of norms of randomized data.

use serde::{Deserialize, Serialize};

use super::data::BaseDatum;
use super::stats::{ccdf, fit_line, linspace, quantile_sorted, sorted};
use super::{
    check_samples, num, ordered_map, ExperimentKind, ExperimentReport, Fit, GridSpec, Provenance, Series, Status,
    Verdict,
};
use crate::error::{Error, Result};
use crate::field::{forward_transform, Field, SpaceTimeField};
use crate::norms::{lp_norm, mixed_norm, sobolev_norm, xsb_norm, NormSpec, TimeWindow};
use crate::propagator::{LinearFlow, Order};
use crate::randomize::{Law, Randomizer};

/// Probability band in which the CCDF enters the tail fit.
pub const TAIL_FIT_BAND: (f64, f64) = (0.005, 0.8);
/// Fewer usable λ points than this makes the fit inconclusive.
pub const MIN_TAIL_POINTS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McTailConfig {
    pub grid: GridSpec,
    pub alpha: f64,
    pub law: Law,
    pub base: BaseDatum,
    pub norm: NormSpec,
    /// Evaluate the norm on `U(t) f^ω` over `[0, t_final]` instead of on `f^ω`.
    pub evolve_linear: bool,
    pub t_final: f64,
    pub n_time: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub lambda_points: usize,
}

impl Default for McTailConfig {
    fn default() -> Self {
        McTailConfig {
            grid: GridSpec {
                dim: 3,
                n: 16,
                box_length: 8.0 * std::f64::consts::PI,
            },
            alpha: 1.5,
            law: Law::ComplexGaussian,
            base: BaseDatum::Gaussian {
                width: 1.5,
                amplitude: 1.0,
                momentum: vec![],
            },
            norm: NormSpec::Sobolev { s: 0.6 },
            evolve_linear: false,
            t_final: 1.0,
            n_time: 9,
            n_samples: 2000,
            seed: 1,
            lambda_points: 40,
        }
    }
}

impl McTailConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.grid()?;
        Order::new(self.alpha)?;
        self.norm.validate()?;
        check_samples("n_samples", self.n_samples, 100)?;
        check_samples("lambda_points", self.lambda_points, 2)?;
        if self.evolve_linear {
            if !(self.t_final.is_finite() && self.t_final > 0.0) {
                return Err(Error::param("t_final", "must be positive"));
            }
            check_samples("n_time", self.n_time, 2)?;
        } else if matches!(self.norm, NormSpec::Xsb { .. }) {
            return Err(Error::param("norm", "an X^{s,b} norm needs evolve_linear = true"));
        }
        Ok(())
    }
}

/// Norm of one realization, with the linear flow applied if requested.
fn sample_norm(config: &McTailConfig, flow: &LinearFlow, f: &Field) -> Result<f64> {
    match (&config.norm, config.evolve_linear) {
        (NormSpec::Sobolev { s }, _) => sobolev_norm(f, *s),
        (NormSpec::Mixed { r, .. }, false) => lp_norm(f, *r),
        (NormSpec::Mixed { q, r }, true) => {
            let spec = forward_transform(f)?;
            let dt = config.t_final / (config.n_time - 1) as f64;
            let snaps = (0..config.n_time)
                .map(|j| flow.evaluate(&spec, j as f64 * dt))
                .collect::<Result<Vec<_>>>()?;
            mixed_norm(&SpaceTimeField::from_snapshots(0.0, dt, &snaps)?, *q, *r)
        }
        (NormSpec::Xsb { s, b, alpha }, true) => {
            let window = TimeWindow::new(0.5 * config.t_final)?;
            let (grid, t0) = window.sampling_grid(f.grid(), config.n_time)?;
            let spec = forward_transform(f)?;
            let snaps = grid
                .times(t0)
                .into_iter()
                .map(|t| flow.evaluate(&spec, t))
                .collect::<Result<Vec<_>>>()?;
            let u = SpaceTimeField::from_snapshots(t0, grid.dt(), &snaps)?;
            xsb_norm(&u, *s, *b, *alpha, &window)
        }
        (NormSpec::Xsb { .. }, false) => Err(Error::param("norm", "an X^{s,b} norm needs evolve_linear = true")),
    }
}

/// Size of the base datum in the norm the tail is normalized by.
fn base_scale(config: &McTailConfig, f: &Field) -> Result<f64> {
    match &config.norm {
        NormSpec::Sobolev { s } => sobolev_norm(f, *s),
        NormSpec::Mixed { q, .. } if config.evolve_linear => {
            Ok(config.t_final.powf(1.0 / q) * f.l2_norm())
        }
        NormSpec::Mixed { .. } => Ok(f.l2_norm()),
        NormSpec::Xsb { s, .. } => sobolev_norm(f, *s),
    }
}

/// Draws `n_samples` randomizations, evaluates the norm, and fits
/// `log P(X > λ) = a + b λ²` over the tail band.
pub fn mc_tail(config: &McTailConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let grid = config.grid.grid()?;
    let base = config.base.build(&grid)?;
    if base.l2_norm() == 0.0 {
        return Err(Error::param("base", "degenerate base datum with zero norm"));
    }
    let randomizer = Randomizer::new(&base, config.law)?;
    let flow = LinearFlow::new(&grid, Order::new(config.alpha)?);

    let values = ordered_map(config.n_samples, |i| {
        let f = randomizer.realize(config.seed, i as u64)?;
        sample_norm(config, &flow, &f)
    })?;

    let prov = Provenance::new(ExperimentKind::McTail, config, config.seed)?;
    let mut report = ExperimentReport::new(prov, &["sample", "norm"]);
    for (i, v) in values.iter().enumerate() {
        report.push_row(vec![i.to_string(), num(*v)]);
    }

    let s = sorted(&values);
    let lambdas = linspace(
        quantile_sorted(&s, 0.2),
        quantile_sorted(&s, 0.995),
        config.lambda_points,
    );
    let probs = ccdf(&values, &lambdas);
    report.series.push(Series {
        name: "ccdf".into(),
        x: lambdas.clone(),
        y: probs.clone(),
    });

    let (x, y): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(&probs)
        .filter(|(_, &p)| p > TAIL_FIT_BAND.0 && p < TAIL_FIT_BAND.1)
        .map(|(&l, &p)| (l * l, p.ln()))
        .unzip();
    // a spread at roundoff level means the law has no tail to fit
    let spread = quantile_sorted(&s, 0.995) - quantile_sorted(&s, 0.2);
    let degenerate = !(spread > 1e-9 * quantile_sorted(&s, 0.5).abs());
    let line = if x.len() >= MIN_TAIL_POINTS && !degenerate {
        fit_line(&x, &y)
    } else {
        None
    };
    match line {
        Some(line) => {
            let t = line.t_statistic();
            report.fits.push(Fit::slope("quadratic_coefficient", &line));
            let scale = base_scale(config, &base)?.powi(2);
            report.fits.push(Fit {
                name: "c".into(),
                estimate: -line.slope * scale,
                stderr: line.slope_stderr * scale,
                ci95: (-line.slope_ci95().1 * scale, -line.slope_ci95().0 * scale),
                residual: line.residual,
                points: line.n,
            });
            report.fits.push(Fit {
                name: "log_C".into(),
                estimate: line.intercept,
                stderr: line.intercept_stderr,
                ci95: (
                    line.intercept - 1.96 * line.intercept_stderr,
                    line.intercept + 1.96 * line.intercept_stderr,
                ),
                residual: line.residual,
                points: line.n,
            });
            report.verdicts.push(Verdict::check(
                "tail_decay",
                line.slope < 0.0 && t.abs() > 3.0,
                format!(
                    "coefficient {:.4e} (t = {t:.2}), residual {:.3e}, {} points",
                    line.slope, line.residual, line.n
                ),
            ));
        }
        None => report.verdicts.push(Verdict::new(
            "tail_decay",
            Status::Inconclusive,
            if degenerate {
                format!("sampled norms are constant up to roundoff (spread {spread:.3e}); no tail to fit")
            } else {
                format!(
                    "only {} λ points with probability in ({}, {}); need {MIN_TAIL_POINTS}",
                    x.len(),
                    TAIL_FIT_BAND.0,
                    TAIL_FIT_BAND.1
                )
            },
        )),
    }
    Ok(report)
}
