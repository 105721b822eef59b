//! The linear flow `U(t) = e^{-it|∇|^α}` and the derivative multipliers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, Field, Spectrum};
use crate::grid::Grid;

/// Dispersion order `α ∈ (1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Order(f64);

impl Order {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 1.0 && alpha <= 2.0 {
            Ok(Order(alpha))
        } else {
            Err(Error::param("alpha", format!("dispersion order must lie in (1, 2], got {alpha}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Order {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Order::new(v)
    }
}

impl From<Order> for f64 {
    fn from(o: Order) -> f64 {
        o.0
    }
}

/// Precomputed symbol `|ξ|^α` on one grid, for repeated propagation.
#[derive(Debug, Clone)]
pub struct LinearFlow {
    grid: Grid,
    symbol: Vec<f64>,
}

impl LinearFlow {
    pub fn new(grid: &Grid, alpha: Order) -> Self {
        let a = alpha.get();
        LinearFlow {
            grid: *grid,
            symbol: grid.wavenumbers().into_iter().map(|k| k.powf(a)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `|ξ|^α` in storage order.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// Multiplier table `e^{-it|ξ|^α}`.
    pub fn phases(&self, t: f64) -> Vec<Complex64> {
        self.symbol.iter().map(|&w| Complex64::from_polar(1.0, -t * w)).collect()
    }

    pub fn apply(&self, spectrum: &mut Spectrum, t: f64) {
        for (v, &w) in spectrum.values_mut().iter_mut().zip(&self.symbol) {
            *v *= Complex64::from_polar(1.0, -t * w);
        }
    }

    /// `U(t)` applied to a spectrum, returned as a field.
    pub fn evaluate(&self, spectrum: &Spectrum, t: f64) -> Result<Field> {
        let mut s = spectrum.clone();
        self.apply(&mut s, t);
        inverse_transform(&s)
    }
}

/// `U(t) f = F^{-1} e^{-it|ξ|^α} F f`.
pub fn linear_propagate(f: &Field, t: f64, alpha: f64) -> Result<Field> {
    let alpha = Order::new(alpha)?;
    if !t.is_finite() {
        return Err(Error::param("t", "time must be finite"));
    }
    let mut s = forward_transform(f)?;
    LinearFlow::new(f.grid(), alpha).apply(&mut s, t);
    inverse_transform(&s)
}

/// Multiplier of `|∇|^s`; the zero mode maps to zero for every `s`.
pub fn riesz_symbol(k: f64, s: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k.powf(s)
    }
}

/// Multiplier of `⟨∇⟩^s` with `⟨ξ⟩ = 1 + |ξ|`.
pub fn bessel_symbol(k: f64, s: f64) -> f64 {
    (1.0 + k).powf(s)
}

pub fn riesz_spectrum(spectrum: &mut Spectrum, s: f64) {
    spectrum.apply_radial(|k| Complex64::new(riesz_symbol(k, s), 0.0));
}

pub fn bessel_spectrum(spectrum: &mut Spectrum, s: f64) {
    spectrum.apply_radial(|k| Complex64::new(bessel_symbol(k, s), 0.0));
}

/// `|∇|^s f`, zero mode removed.
pub fn riesz_derivative(f: &Field, s: f64) -> Result<Field> {
    if !s.is_finite() {
        return Err(Error::param("s", "order must be finite"));
    }
    let mut spec = forward_transform(f)?;
    riesz_spectrum(&mut spec, s);
    inverse_transform(&spec)
}

/// `⟨∇⟩^s f = F^{-1} (1 + |ξ|)^s F f`.
pub fn bessel_derivative(f: &Field, s: f64) -> Result<Field> {
    if !s.is_finite() {
        return Err(Error::param("s", "order must be finite"));
    }
    let mut spec = forward_transform(f)?;
    bessel_spectrum(&mut spec, s);
    inverse_transform(&spec)
}
