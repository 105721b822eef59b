//! Bilinear estimates for products of linear solutions.
//!
//! The statistic is `Q = ‖η_T(t) U(t)f · U(t)g‖_{L²_{t,x}} / (‖f‖ ‖g‖)`.
//! Random-phase data filling a periodic box give `E Q²` independent of the
//! frequency scales, so each cell instead uses localized random packets in a
//! box sized to the packet (`L = box_factor / N₁`, envelope `envelope / N₁`)
//! and a time window covering the passage of the fast packet through the slow
//! one (`T = time_factor · envelope / (N₁ v₂)`, `v₂ = α N₂^{α-1}`).

use serde::{Deserialize, Serialize};

use super::data::random_packet;
use super::stats::{fit_line, mean, stderr};
use super::{
    check_samples, num, ordered_map, tolerance_note, ExperimentKind, ExperimentReport, Fit, Provenance, Series,
    Verdict, SLOPE_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::field::{forward_transform, Field};
use crate::grid::Grid;
use crate::norms::{in_dyadic_block, TimeWindow};
use crate::propagator::{LinearFlow, Order};
use crate::randomize::{keyed_rng, streams};

/// The two algebraic forms of the annulus bound:
/// `(N₁/N₂)^{(d+α-2)/4} (N₁N₂)^{(d-α)/4}` and `N₁^{(d-1)/2} N₂^{(1-α)/2}`.
pub fn bilinear_forms(d: f64, alpha: f64, n1: f64, n2: f64) -> (f64, f64) {
    let a = (n1 / n2).powf((d + alpha - 2.0) / 4.0) * (n1 * n2).powf((d - alpha) / 4.0);
    let b = n1.powf((d - 1.0) / 2.0) * n2.powf((1.0 - alpha) / 2.0);
    (a, b)
}

/// `Q` for given data, sampled on `n_time` equispaced times spanning the window support.
pub fn bilinear_statistic(f: &Field, g: &Field, alpha: Order, window: &TimeWindow, n_time: usize) -> Result<f64> {
    f.grid().check_same_space(g.grid())?;
    if n_time < 3 {
        return Err(Error::param("n_time", "need at least three time samples"));
    }
    let flow = LinearFlow::new(f.grid(), alpha);
    let fh = forward_transform(f)?;
    let gh = forward_transform(g)?;
    let t_half = 2.0 * window.half_width();
    let dt = 2.0 * t_half / (n_time - 1) as f64;
    let cell = f.grid().cell_volume();
    let mut total = 0.0;
    for j in 0..n_time {
        let t = -t_half + j as f64 * dt;
        let w = window.eval(t).powi(2);
        if w == 0.0 {
            continue;
        }
        let uf = flow.evaluate(&fh, t)?;
        let ug = flow.evaluate(&gh, t)?;
        let s: f64 = uf
            .values()
            .iter()
            .zip(ug.values())
            .map(|(a, b)| (a * b).norm_sqr())
            .sum();
        total += w * s * cell * dt;
    }
    Ok(total.sqrt() / (f.l2_norm() * g.l2_norm()))
}

/// Time samples resolving `|U(t)f U(t)g|²` whose temporal frequencies lie below `omega`.
fn time_samples(window: &TimeWindow, omega: f64, oversample: f64) -> usize {
    let span = 4.0 * window.half_width();
    let dt = std::f64::consts::TAU / (oversample * omega.max(1e-300));
    (span / dt).ceil() as usize + 1
}

fn check_dyadic(name: &'static str, list: &[u32]) -> Result<()> {
    if list.is_empty() {
        return Err(Error::param(name, "empty list"));
    }
    for &n in list {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::param(name, format!("{n} is not a dyadic scale ≥ 2")));
        }
    }
    Ok(())
}

fn annulus(n_block: u32) -> impl Fn(&[f64]) -> bool {
    move |xi: &[f64]| in_dyadic_block(xi.iter().map(|v| v * v).sum::<f64>().sqrt(), n_block)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BilinearAnnulusConfig {
    pub dim: usize,
    pub alpha: f64,
    /// Grid points per axis for a cell with `N₁ = N₂`; cells use `n_base · N₂/N₁`.
    pub n_base: usize,
    pub n1_list: Vec<u32>,
    pub n2_list: Vec<u32>,
    pub draws: usize,
    pub seed: u64,
    pub envelope: f64,
    pub box_factor: f64,
    pub time_factor: f64,
    pub oversample: f64,
    pub slope_tolerance: f64,
}

impl Default for BilinearAnnulusConfig {
    fn default() -> Self {
        BilinearAnnulusConfig {
            dim: 2,
            alpha: 1.5,
            n_base: 32,
            n1_list: vec![2, 4, 8, 16],
            n2_list: vec![2, 4, 8, 16],
            draws: 50,
            seed: 1,
            envelope: 3.0,
            box_factor: 8.0 * std::f64::consts::PI,
            time_factor: 4.0,
            oversample: 1.5,
            slope_tolerance: SLOPE_TOLERANCE,
        }
    }
}

impl BilinearAnnulusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::param("dim", "bilinear estimates need d ≥ 2"));
        }
        Order::new(self.alpha)?;
        check_dyadic("n1_list", &self.n1_list)?;
        check_dyadic("n2_list", &self.n2_list)?;
        check_samples("draws", self.draws, 1)?;
        for (name, v) in [
            ("envelope", self.envelope),
            ("box_factor", self.box_factor),
            ("time_factor", self.time_factor),
            ("oversample", self.oversample),
            ("slope_tolerance", self.slope_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !self.n_base.is_power_of_two() {
            return Err(Error::param("n_base", "must be a power of two"));
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(u32, u32)> {
        let mut cells = Vec::new();
        for &n1 in &self.n1_list {
            for &n2 in &self.n2_list {
                if n1 <= n2 {
                    cells.push((n1, n2));
                }
            }
        }
        cells.sort_unstable();
        cells.dedup();
        cells
    }

    fn cell_setup(&self, n1: u32, n2: u32) -> Result<(Grid, f64, TimeWindow, usize)> {
        let (f1, f2) = (n1 as f64, n2 as f64);
        let n = self.n_base * (n2 / n1) as usize;
        let grid = Grid::spatial(self.dim, n, self.box_factor / f1)?;
        if grid.nyquist() < 2.0 * f2 {
            return Err(Error::param(
                "n_base",
                format!("annulus {n2} is not below half the Nyquist frequency {:.3}", grid.nyquist()),
            ));
        }
        let envelope = self.envelope / f1;
        let v2 = self.alpha * f2.powf(self.alpha - 1.0);
        let window = TimeWindow::new(self.time_factor * envelope / v2)?;
        let a = self.alpha;
        let omega = f1.powf(a) + f2.powf(a) - (0.5 * f1).powf(a) - (0.5 * f2).powf(a);
        Ok((grid, envelope, window, time_samples(&window, omega, self.oversample)))
    }
}

pub fn bilinear_annulus(config: &BilinearAnnulusConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let alpha = Order::new(config.alpha)?;
    let prov = Provenance::new(ExperimentKind::BilinearAnnulus, config, config.seed)?;
    let mut report = ExperimentReport::new(
        prov,
        &["n1", "n2", "grid_n", "box_length", "half_width", "n_time", "draw", "q"],
    );
    report.notes.extend(tolerance_note("slope_tolerance", config.slope_tolerance, SLOPE_TOLERANCE));

    let cells = config.cells();
    let mut means = Vec::with_capacity(cells.len());
    for (c, &(n1, n2)) in cells.iter().enumerate() {
        let (grid, envelope, window, n_time) = config.cell_setup(n1, n2)?;
        let qs = ordered_map(config.draws, |j| {
            let mut rng = keyed_rng(config.seed, streams::BILINEAR, ((c as u64) << 32) | j as u64);
            let f = random_packet(&grid, envelope, &mut rng, annulus(n1))?;
            let g = random_packet(&grid, envelope, &mut rng, annulus(n2))?;
            bilinear_statistic(&f, &g, alpha, &window, n_time)
        })?;
        for (j, q) in qs.iter().enumerate() {
            report.push_row(vec![
                n1.to_string(),
                n2.to_string(),
                grid.n().to_string(),
                num(grid.box_length()),
                num(window.half_width()),
                n_time.to_string(),
                j.to_string(),
                num(*q),
            ]);
        }
        means.push((n1, n2, mean(&qs), stderr(&qs)));
    }

    let d = config.dim as f64;
    let bound_n2 = (1.0 - config.alpha) / 2.0;
    let bound_n1 = (d - 1.0) / 2.0;
    let tol = config.slope_tolerance;

    let mut n2_fits = Vec::new();
    for &n1 in &config.n1_list {
        let pts: Vec<_> = means.iter().filter(|m| m.0 == n1).collect();
        let x: Vec<f64> = pts.iter().map(|m| (m.1 as f64).ln()).collect();
        let y: Vec<f64> = pts.iter().map(|m| m.2.ln()).collect();
        if let Some(line) = fit_line(&x, &y) {
            report.fits.push(Fit::slope(format!("n2_slope@n1={n1}"), &line));
            n2_fits.push((n1, pts.len(), line));
        }
    }
    let mut n1_fits = Vec::new();
    for &n2 in &config.n2_list {
        let pts: Vec<_> = means.iter().filter(|m| m.1 == n2).collect();
        let x: Vec<f64> = pts.iter().map(|m| (m.0 as f64).ln()).collect();
        let y: Vec<f64> = pts.iter().map(|m| m.2.ln()).collect();
        if let Some(line) = fit_line(&x, &y) {
            report.fits.push(Fit::slope(format!("n1_slope@n2={n2}"), &line));
            n1_fits.push((n2, pts.len(), line));
        }
    }
    // The verdict uses the longest line in each direction (smallest N₁, largest N₂).
    let pick = |fits: &[(u32, usize, super::stats::LineFit)]| fits.iter().max_by_key(|f| f.1).map(|f| (f.0, f.2));
    match pick(&n2_fits) {
        Some((n1, line)) => report.verdicts.push(Verdict::check(
            "n2_slope",
            line.slope <= bound_n2 + tol,
            format!("slope {:.4} at N1={n1}, bound {bound_n2:.4} + {tol}", line.slope),
        )),
        None => report.verdicts.push(Verdict::new(
            "n2_slope",
            super::Status::Inconclusive,
            "fewer than two N2 values at any N1",
        )),
    }
    match pick(&n1_fits) {
        Some((n2, line)) => report.verdicts.push(Verdict::check(
            "n1_slope",
            line.slope <= bound_n1 + tol,
            format!("slope {:.4} at N2={n2}, bound {bound_n1:.4} + {tol}", line.slope),
        )),
        None => report.verdicts.push(Verdict::new(
            "n1_slope",
            super::Status::Inconclusive,
            "fewer than two N1 values at any N2",
        )),
    }
    report.series.push(Series {
        name: "mean_q".into(),
        x: means.iter().map(|m| (m.1 as f64) / (m.0 as f64)).collect(),
        y: means.iter().map(|m| m.2).collect(),
    });
    report.series.push(Series {
        name: "mean_q_stderr".into(),
        x: means.iter().map(|m| (m.1 as f64) / (m.0 as f64)).collect(),
        y: means.iter().map(|m| m.3).collect(),
    });
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BilinearBallConfig {
    pub dim: usize,
    pub alpha: f64,
    /// Ball radii `ρ` for the slow factor.
    pub rho_list: Vec<f64>,
    /// Centre `ξ₀` of the ball (defaults to the origin).
    pub center: Vec<f64>,
    /// Dyadic annulus of the fast partner `g`.
    pub partner_block: u32,
    pub draws: usize,
    pub seed: u64,
    /// Envelope of `f` is `ball_envelope / ρ`.
    pub ball_envelope: f64,
    /// Envelope of `g`.
    pub partner_envelope: f64,
    /// Box side in units of the envelope of `f`.
    pub box_factor: f64,
    pub time_factor: f64,
    pub oversample: f64,
    pub slope_tolerance: f64,
}

impl Default for BilinearBallConfig {
    fn default() -> Self {
        BilinearBallConfig {
            dim: 2,
            alpha: 1.5,
            rho_list: vec![0.125, 0.25, 0.5],
            center: vec![],
            partner_block: 4,
            draws: 50,
            seed: 1,
            ball_envelope: 1.0,
            partner_envelope: 1.0,
            box_factor: 8.0,
            time_factor: 2.0,
            oversample: 1.5,
            slope_tolerance: SLOPE_TOLERANCE,
        }
    }
}

impl BilinearBallConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::param("dim", "bilinear estimates need d ≥ 2"));
        }
        Order::new(self.alpha)?;
        if self.rho_list.is_empty() || self.rho_list.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::param("rho_list", "radii must be positive"));
        }
        if !self.center.is_empty() && self.center.len() != self.dim {
            return Err(Error::param("center", "length must equal the dimension"));
        }
        check_dyadic("partner_block", &[self.partner_block])?;
        let lo = 0.5 * self.partner_block as f64;
        let c = self.center.iter().map(|v| v * v).sum::<f64>().sqrt();
        if self.rho_list.iter().any(|r| c + r >= lo) {
            return Err(Error::param("rho_list", "ball must stay inside the partner's inner radius"));
        }
        check_samples("draws", self.draws, 1)?;
        for (name, v) in [
            ("ball_envelope", self.ball_envelope),
            ("partner_envelope", self.partner_envelope),
            ("box_factor", self.box_factor),
            ("time_factor", self.time_factor),
            ("oversample", self.oversample),
            ("slope_tolerance", self.slope_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn cell_setup(&self, rho: f64) -> Result<(Grid, f64, TimeWindow, usize)> {
        let envelope = self.ball_envelope / rho;
        let box_length = self.box_factor * envelope.max(self.partner_envelope);
        let top = self.partner_block as f64;
        let needed = (2.0 * top * box_length / std::f64::consts::PI).ceil() as usize;
        let grid = Grid::spatial(self.dim, needed.next_power_of_two().max(8), box_length)?;
        let v = self.alpha * (0.5 * top).powf(self.alpha - 1.0);
        let window = TimeWindow::new(self.time_factor * envelope / v)?;
        let c = self.center.iter().map(|v| v * v).sum::<f64>().sqrt();
        let omega = top.powf(self.alpha) + (c + rho).powf(self.alpha) - (0.5 * top).powf(self.alpha);
        Ok((grid, envelope, window, time_samples(&window, omega, self.oversample)))
    }
}

pub fn bilinear_ball(config: &BilinearBallConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let alpha = Order::new(config.alpha)?;
    let prov = Provenance::new(ExperimentKind::BilinearBall, config, config.seed)?;
    let mut report = ExperimentReport::new(
        prov,
        &["rho", "grid_n", "box_length", "half_width", "n_time", "draw", "q"],
    );
    report.notes.extend(tolerance_note("slope_tolerance", config.slope_tolerance, SLOPE_TOLERANCE));
    let center: Vec<f64> = if config.center.is_empty() {
        vec![0.0; config.dim]
    } else {
        config.center.clone()
    };

    let mut means = Vec::new();
    for (c, &rho) in config.rho_list.iter().enumerate() {
        let (grid, envelope, window, n_time) = config.cell_setup(rho)?;
        let qs = ordered_map(config.draws, |j| {
            let mut rng = keyed_rng(config.seed, streams::BILINEAR, ((c as u64) << 32) | j as u64);
            let ball = |xi: &[f64]| xi.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum::<f64>() < rho * rho;
            let f = random_packet(&grid, envelope, &mut rng, ball)?;
            let g = random_packet(&grid, config.partner_envelope, &mut rng, annulus(config.partner_block))?;
            bilinear_statistic(&f, &g, alpha, &window, n_time)
        })?;
        for (j, q) in qs.iter().enumerate() {
            report.push_row(vec![
                num(rho),
                grid.n().to_string(),
                num(grid.box_length()),
                num(window.half_width()),
                n_time.to_string(),
                j.to_string(),
                num(*q),
            ]);
        }
        means.push((rho, mean(&qs), stderr(&qs)));
    }

    let bound = (config.dim as f64 - 1.0) / 2.0;
    let tol = config.slope_tolerance;
    let x: Vec<f64> = means.iter().map(|m| m.0.ln()).collect();
    let y: Vec<f64> = means.iter().map(|m| m.1.ln()).collect();
    match fit_line(&x, &y) {
        Some(line) => {
            report.fits.push(Fit::slope("rho_slope", &line));
            report.verdicts.push(Verdict::check(
                "rho_slope",
                line.slope <= bound + tol,
                format!("slope {:.4}, bound {bound:.4} + {tol}", line.slope),
            ));
        }
        None => report.verdicts.push(Verdict::new(
            "rho_slope",
            super::Status::Inconclusive,
            "need at least two distinct radii",
        )),
    }
    report.series.push(Series {
        name: "mean_q".into(),
        x: means.iter().map(|m| m.0).collect(),
        y: means.iter().map(|m| m.1).collect(),
    });
    report.series.push(Series {
        name: "mean_q_stderr".into(),
        x: means.iter().map(|m| m.0).collect(),
        y: means.iter().map(|m| m.2).collect(),
    });
    Ok(report)
}

