//! Sobolev, mixed Lebesgue and Bourgain norms, time windows and sharp
//! Littlewood–Paley projections.
//!
//! Every norm here is a declared quadrature: Riemann sums in space,
//! trapezoidal sums in time, and Plancherel-normalized sums
//! `(2π)^{-d} Σ |f̂|² (2π/L)^d` in frequency, so that `H^0 = L²` and
//! `X^{0,0} = L²_{t,x}` hold to roundoff.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, spacetime_transform, Field, SpaceTimeField, Spectrum};
use crate::grid::Grid;
use crate::propagator::Order;

fn smooth_step_core(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// The cutoff `η`: 1 on `[-1, 1]`, 0 outside `(-2, 2)`, smooth in between.
pub fn eta(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let up = smooth_step_core(2.0 - a);
        up / (up + smooth_step_core(a - 1.0))
    }
}

/// `η_T(t) = η(t/T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    half_width: f64,
}

impl TimeWindow {
    pub fn new(half_width: f64) -> Result<Self> {
        if half_width.is_finite() && half_width > 0.0 {
            Ok(TimeWindow { half_width })
        } else {
            Err(Error::param("T", format!("window half-width must be positive, got {half_width}")))
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn eval(&self, t: f64) -> f64 {
        eta(t / self.half_width)
    }

    /// Whether `supp η_T = [-2T, 2T]` lies inside the sampled interval of `u`.
    pub fn check_fits(&self, u: &SpaceTimeField) -> Result<()> {
        let slack = 1e-9 * u.grid().dt();
        let (start, end) = (u.t0(), u.t_end());
        if start > -2.0 * self.half_width + slack || end < 2.0 * self.half_width - slack {
            return Err(Error::WindowOutOfRange {
                half_width: self.half_width,
                start,
                end,
            });
        }
        Ok(())
    }

    /// A symmetric time axis `[-2T, 2T]` with `n_time` samples on `grid`'s space.
    pub fn sampling_grid(&self, grid: &Grid, n_time: usize) -> Result<(Grid, f64)> {
        if n_time < 2 {
            return Err(Error::param("n_time", "need at least two samples to cover the window"));
        }
        let dt = 4.0 * self.half_width / (n_time - 1) as f64;
        Ok((grid.with_time(n_time, dt)?, -2.0 * self.half_width))
    }
}

/// Lebesgue exponent in `[1, ∞]`.
pub fn check_exponent(name: &'static str, p: f64) -> Result<()> {
    if p >= 1.0 && !p.is_nan() {
        Ok(())
    } else {
        Err(Error::param(name, format!("Lebesgue exponent must be >= 1, got {p}")))
    }
}

fn lp_of_slice(values: &[Complex64], cell: f64, p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    } else if p == 2.0 {
        (values.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell).sqrt()
    } else {
        (values.iter().map(|z| z.norm().powf(p)).sum::<f64>() * cell).powf(1.0 / p)
    }
}

/// `‖f‖_{L^p}` by the Riemann sum; `p = ∞` is the grid maximum.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    Ok(lp_of_slice(f.values(), f.grid().cell_volume(), p))
}

/// `‖⟨∇⟩^s f‖_{L²}` with `⟨ξ⟩ = 1 + |ξ|`.
pub fn sobolev_norm(f: &Field, s: f64) -> Result<f64> {
    Ok(sobolev_norm_spectrum(&forward_transform(f)?, s))
}

pub fn sobolev_norm_spectrum(spec: &Spectrum, s: f64) -> f64 {
    spec.weighted_norm_sqr(|k| (1.0 + k).powf(2.0 * s)).sqrt()
}

/// `‖|∇|^s f‖_{L²}`, zero mode excluded.
pub fn homogeneous_sobolev_norm(f: &Field, s: f64) -> Result<f64> {
    let spec = forward_transform(f)?;
    Ok(spec
        .weighted_norm_sqr(|k| if k == 0.0 { 0.0 } else { k.powf(2.0 * s) })
        .sqrt())
}

/// `‖u‖_{L^q_t L^r_x}` over the sampled interval: trapezoidal in `t`,
/// Riemann in `x`; infinite exponents are maxima over samples.
pub fn mixed_norm(u: &SpaceTimeField, q: f64, r: f64) -> Result<f64> {
    check_exponent("q", q)?;
    check_exponent("r", r)?;
    let grid = u.grid();
    let cell = grid.cell_volume();
    let slices: Vec<f64> = (0..grid.n_time()).map(|j| lp_of_slice(u.slice(j), cell, r)).collect();
    Ok(time_norm(&slices, grid.dt(), q))
}

/// `(∫ g(t)^q dt)^{1/q}` by the trapezoidal rule on uniform samples.
pub(crate) fn time_norm(samples: &[f64], dt: f64, q: f64) -> f64 {
    if q.is_infinite() {
        return samples.iter().copied().fold(0.0, f64::max);
    }
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = samples[1..n - 1].iter().map(|g| g.powf(q)).sum();
    let ends = 0.5 * (samples[0].powf(q) + samples[n - 1].powf(q));
    ((inner + ends) * dt).powf(1.0 / q)
}

/// `‖η_T u‖_{X^{s,b}}` = `‖(1+|ξ|)^s (1+|τ-|ξ|^α|)^b (η_T u)~‖_{L²}` with
/// the Plancherel normalization `(2π)^{-(d+1)} dτ dξ`.
pub fn xsb_norm(u: &SpaceTimeField, s: f64, b: f64, alpha: f64, window: &TimeWindow) -> Result<f64> {
    let alpha = Order::new(alpha)?;
    window.check_fits(u)?;
    let windowed = u.windowed(|t| window.eval(t));
    let spec = spacetime_transform(&windowed)?;
    let a = alpha.get();
    Ok(spec
        .weighted_norm_sqr(|tau, k| (1.0 + k).powf(2.0 * s) * (1.0 + (tau - k.powf(a)).abs()).powf(2.0 * b))
        .sqrt())
}

/// Fraction of `‖η_T u‖²_{X^{s,b}}` lying within `band` of the surface `τ = |ξ|^α`.
pub fn xsb_concentration(u: &SpaceTimeField, s: f64, b: f64, alpha: f64, window: &TimeWindow, band: f64) -> Result<f64> {
    let alpha = Order::new(alpha)?.get();
    window.check_fits(u)?;
    let spec = spacetime_transform(&u.windowed(|t| window.eval(t)))?;
    let weight = |tau: f64, k: f64| (1.0 + k).powf(2.0 * s) * (1.0 + (tau - k.powf(alpha)).abs()).powf(2.0 * b);
    let total = spec.weighted_norm_sqr(weight);
    let near = spec.weighted_norm_sqr(|tau, k| {
        if (tau - k.powf(alpha)).abs() <= band {
            weight(tau, k)
        } else {
            0.0
        }
    });
    Ok(if total == 0.0 { 1.0 } else { near / total })
}

/// Whether `|ξ|` lies in the dyadic block `A(N)`: `N/2 ≤ |ξ| < N`, or `|ξ| < 1` for `N = 1`.
pub fn in_dyadic_block(k: f64, n_block: u32) -> bool {
    let n = n_block as f64;
    if n_block == 1 {
        k < 1.0
    } else {
        k >= 0.5 * n && k < n
    }
}

fn check_dyadic(n_block: u32) -> Result<()> {
    if n_block == 0 || !n_block.is_power_of_two() {
        return Err(Error::param("N", format!("dyadic block must be a power of two, got {n_block}")));
    }
    Ok(())
}

/// Sharp projection of a spectrum onto `A(N)`, in place.
pub fn dyadic_project_spectrum(spec: &mut Spectrum, n_block: u32) -> Result<()> {
    check_dyadic(n_block)?;
    let grid = *spec.grid();
    let corner = grid.nyquist() * (grid.dim() as f64).sqrt();
    if n_block > 1 && 0.5 * n_block as f64 > corner {
        log::warn!(
            "dyadic block A({n_block}) lies beyond the largest grid frequency {corner:.3}; projection is empty"
        );
    }
    spec.apply_radial(|k| {
        if in_dyadic_block(k, n_block) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    });
    Ok(())
}

/// `P_N f`: sharp spectral cutoff to `A(N)`.
pub fn dyadic_project(f: &Field, n_block: u32) -> Result<Field> {
    let mut spec = forward_transform(f)?;
    dyadic_project_spectrum(&mut spec, n_block)?;
    inverse_transform(&spec)
}

/// Sharp projection of a spectrum onto the ball `|ξ - ξ₀| < ρ`, in place.
pub fn ball_project_spectrum(spec: &mut Spectrum, center: &[f64], radius: f64) -> Result<()> {
    let d = spec.grid().dim();
    if center.len() != d {
        return Err(Error::param("center", format!("expected {d} coordinates, got {}", center.len())));
    }
    if !(radius >= 0.0) {
        return Err(Error::param("radius", format!("must be non-negative, got {radius}")));
    }
    spec.apply(|xi| {
        let dist2: f64 = xi[..d].iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
        if dist2.sqrt() < radius {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    });
    Ok(())
}

/// Sharp spectral cutoff to the ball `B(ξ₀, ρ)`.
pub fn ball_project(f: &Field, center: &[f64], radius: f64) -> Result<Field> {
    let mut spec = forward_transform(f)?;
    ball_project_spectrum(&mut spec, center, radius)?;
    inverse_transform(&spec)
}

/// A norm selector with canonical text form, e.g. `sobolev:s=0.75`,
/// `mixed:q=4,r=4`, `xsb:s=0,b=0.6,alpha=1.5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSpec {
    Sobolev { s: f64 },
    Mixed { q: f64, r: f64 },
    Xsb { s: f64, b: f64, alpha: f64 },
}

fn fmt_exponent(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NormSpec::Sobolev { s } => write!(f, "sobolev:s={s}"),
            NormSpec::Mixed { q, r } => write!(f, "mixed:q={},r={}", fmt_exponent(q), fmt_exponent(r)),
            NormSpec::Xsb { s, b, alpha } => write!(f, "xsb:s={s},b={b},alpha={alpha}"),
        }
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |reason: String| Error::Format { what: "norm spec", reason };
        let (kind, rest) = text
            .split_once(':')
            .ok_or_else(|| bad(format!("`{text}` lacks a `kind:` prefix")))?;
        let mut pairs = Vec::new();
        for item in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| bad(format!("`{item}` is not key=value")))?;
            let value = match v.trim() {
                "inf" | "∞" => f64::INFINITY,
                other => other.parse::<f64>().map_err(|_| bad(format!("`{other}` is not a number")))?,
            };
            pairs.push((k.trim().to_string(), value));
        }
        let mut take = |key: &str| -> Result<f64> {
            let idx = pairs
                .iter()
                .position(|(k, _)| k == key)
                .ok_or_else(|| bad(format!("missing `{key}`")))?;
            Ok(pairs.remove(idx).1)
        };
        let spec = match kind.trim() {
            "sobolev" => NormSpec::Sobolev { s: take("s")? },
            "mixed" => NormSpec::Mixed {
                q: take("q")?,
                r: take("r")?,
            },
            "xsb" => NormSpec::Xsb {
                s: take("s")?,
                b: take("b")?,
                alpha: take("alpha")?,
            },
            other => return Err(bad(format!("unknown norm kind `{other}`"))),
        };
        if let Some((k, _)) = pairs.first() {
            return Err(bad(format!("unexpected key `{k}`")));
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NormSpec::Sobolev { s } if !s.is_finite() => Err(Error::param("s", "must be finite")),
            NormSpec::Mixed { q, r } => {
                for (name, v) in [("q", q), ("r", r)] {
                    if !(v >= 2.0) {
                        return Err(Error::param(name, format!("mixed-norm exponents must lie in [2, ∞], got {v}")));
                    }
                }
                Ok(())
            }
            NormSpec::Xsb { s, b, alpha } => {
                Order::new(alpha)?;
                if !(s.is_finite() && b.is_finite()) {
                    return Err(Error::param("s/b", "must be finite"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl Serialize for NormSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NormSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_profile() {
        assert_eq!(eta(0.0), 1.0);
        assert_eq!(eta(-1.0), 1.0);
        assert_eq!(eta(2.0), 0.0);
        assert_eq!(eta(-2.5), 0.0);
        let mid = eta(1.5);
        assert!((mid - 0.5).abs() < 1e-12);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = eta(1.0 + i as f64 / 100.0);
            assert!((0.0..=1.0).contains(&v) && v <= prev);
            prev = v;
        }
    }

    #[test]
    fn norm_spec_text_form() {
        for text in ["sobolev:s=0.75", "mixed:q=4,r=4", "xsb:s=0,b=0.6,alpha=1.5", "mixed:q=inf,r=2"] {
            let spec: NormSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert!("mixed:q=1,r=4".parse::<NormSpec>().is_err());
        assert!("mixed:q=4".parse::<NormSpec>().is_err());
        assert!("sobolev:s=1,t=2".parse::<NormSpec>().is_err());
        assert!("holder:s=1".parse::<NormSpec>().is_err());
        assert!("xsb:s=0,b=0.6,alpha=3".parse::<NormSpec>().is_err());
    }

    #[test]
    fn dyadic_blocks_tile_the_half_line() {
        for i in 0..2000 {
            let k = i as f64 * 0.01;
            let hits = (0..8).filter(|&e| in_dyadic_block(k, 1 << e)).count();
            assert_eq!(hits, 1, "k = {k}");
        }
        assert!(in_dyadic_block(3.0, 4));
        assert!(!in_dyadic_block(3.0, 2));
        assert!(dyadic_project(&Field::zeros(Grid::spatial(1, 8, 1.0).unwrap()), 3).is_err());
    }

    #[test]
    fn window_must_fit() {
        let grid = Grid::new(1, 8, 1.0, 5, 0.25).unwrap();
        let u = SpaceTimeField::from_fn(grid, -0.5, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        assert!(TimeWindow::new(0.25).unwrap().check_fits(&u).is_ok());
        assert!(matches!(
            TimeWindow::new(0.3).unwrap().check_fits(&u),
            Err(Error::WindowOutOfRange { .. })
        ));
        assert!(xsb_norm(&u, 0.0, 0.5, 1.5, &TimeWindow::new(1.0).unwrap()).is_err());
    }
}
