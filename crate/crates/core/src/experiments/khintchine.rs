//! Moment growth of random series `Σ g_n c_n`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::stats::{fit_line, mean};
use super::{check_samples, num, ordered_map, ExperimentKind, ExperimentReport, Fit, Provenance, Series, Verdict};
use crate::error::{Error, Result};
use crate::randomize::{keyed_rng, streams, Law};

/// Largest fitted growth exponent of `‖S‖_{L^p(Ω)}` in `p` that passes.
pub const KHINTCHINE_EXPONENT_BOUND: f64 = 0.6;
const BLOCK: usize = 4096;

/// `(E|X|^p)^{1/p}` for a standard real gaussian `X`:
/// `(2^{p/2} Γ((p+1)/2) / √π)^{1/p}`.
pub fn gaussian_abs_moment(p: f64) -> f64 {
    let ln = 0.5 * p * std::f64::consts::LN_2 + ln_gamma(0.5 * (p + 1.0)) - 0.5 * std::f64::consts::PI.ln();
    (ln / p).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KhintchineConfig {
    /// Real coefficients `c_n`.
    pub coefficients: Vec<f64>,
    pub law: Law,
    pub p_grid: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for KhintchineConfig {
    fn default() -> Self {
        KhintchineConfig {
            coefficients: (0..64).map(|n| 1.0 / (1.0 + n as f64)).collect(),
            law: Law::ComplexGaussian,
            p_grid: vec![2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0],
            n_samples: 200_000,
            seed: 1,
        }
    }
}

impl KhintchineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coefficients.is_empty() || self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("coefficients", "need finite coefficients"));
        }
        if self.coefficients.iter().all(|&c| c == 0.0) {
            return Err(Error::param("coefficients", "all coefficients vanish"));
        }
        if self.p_grid.is_empty() || self.p_grid.iter().any(|p| !(2.0..=12.0).contains(p)) {
            return Err(Error::param("p_grid", "exponents must lie in [2, 12]"));
        }
        check_samples("n_samples", self.n_samples, 2)
    }
}

/// Samples `S = Σ X_n c_n` with `X_n` drawn from the law's unit-variance real component.
fn draw_sums(config: &KhintchineConfig) -> Result<Vec<f64>> {
    let blocks = config.n_samples.div_ceil(BLOCK);
    let parts = ordered_map(blocks, |b| {
        let mut rng = keyed_rng(config.seed, streams::KHINTCHINE, b as u64);
        let len = BLOCK.min(config.n_samples - b * BLOCK);
        Ok((0..len)
            .map(|_| {
                config
                    .coefficients
                    .iter()
                    .map(|c| c * config.law.sample_component(&mut rng))
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>())
    })?;
    Ok(parts.concat())
}

pub fn khintchine_check(config: &KhintchineConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let sums = draw_sums(config)?;
    let norm_c = config.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
    let n = sums.len() as f64;
    let gaussian = config.law == Law::ComplexGaussian;

    let prov = Provenance::new(ExperimentKind::Khintchine, config, config.seed)?;
    let mut report = ExperimentReport::new(prov, &["p", "moment", "stderr", "gaussian_moment"]);
    let mut moments = Vec::new();
    let mut worst_rel: f64 = 0.0;
    for &p in &config.p_grid {
        let powers: Vec<f64> = sums.iter().map(|s| s.abs().powf(p)).collect();
        let m = mean(&powers);
        let var = powers.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
        let moment = m.powf(1.0 / p);
        // delta method for m^{1/p}
        let se = moment / p * (var / n).sqrt() / m;
        let exact = norm_c * gaussian_abs_moment(p);
        if gaussian {
            worst_rel = worst_rel.max((moment / exact - 1.0).abs());
        }
        report.push_row(vec![
            num(p),
            num(moment),
            num(se),
            if gaussian { num(exact) } else { String::new() },
        ]);
        moments.push((p, moment, se, m, var));
    }

    let x: Vec<f64> = moments.iter().map(|m| m.0.ln()).collect();
    let y: Vec<f64> = moments.iter().map(|m| m.1.ln()).collect();
    match fit_line(&x, &y) {
        Some(line) => {
            report.fits.push(Fit::slope("p_exponent", &line));
            report.verdicts.push(Verdict::check(
                "p_exponent",
                line.slope <= KHINTCHINE_EXPONENT_BOUND,
                format!("fitted exponent {:.4} (bound {KHINTCHINE_EXPONENT_BOUND})", line.slope),
            ));
        }
        None => report.verdicts.push(Verdict::new(
            "p_exponent",
            super::Status::Inconclusive,
            "need at least two distinct exponents",
        )),
    }
    if let Some(&(_, _, _, m2, var2)) = moments.iter().find(|m| m.0 == 2.0) {
        let se = (var2 / n).sqrt();
        let gap = (m2 - norm_c * norm_c).abs();
        report.verdicts.push(Verdict::check(
            "second_moment",
            gap <= 3.0 * se + 1e-12 * norm_c * norm_c,
            format!("E S² = {m2:.6}, ‖c‖² = {:.6}, {:.2} standard errors", norm_c * norm_c, gap / se.max(1e-300)),
        ));
    }
    if gaussian {
        report.verdicts.push(Verdict::check(
            "gaussian_closed_form",
            worst_rel <= 0.05,
            format!("largest relative deviation {worst_rel:.4}"),
        ));
    }
    report.series.push(Series {
        name: "moment".into(),
        x: moments.iter().map(|m| m.0).collect(),
        y: moments.iter().map(|m| m.1).collect(),
    });
    Ok(report)
}
