//! Complex field storage and the continuum-normalized Fourier transforms.
//!
//! The transforms are quadratures of
//!
//! ```text
//! f̂(ξ) = ∫ e^{-ix·ξ} f(x) dx,        f(x) = (2π)^{-d} ∫ e^{ix·ξ} f̂(ξ) dξ
//! ```
//!
//! on the periodic box, with weights `(L/n)^d` in space and `(2π/L)^d` in
//! frequency. The space-time transform uses `e^{+itτ}` in time, so a linear
//! solution `e^{i(x·ξ - t|ξ|^α)}` lives on the surface `τ = |ξ|^α`.

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{Coords, Grid};

fn check_finite(values: &[Complex64], context: &'static str) -> Result<()> {
    match values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        Some(index) => Err(Error::NonFinite { index, context }),
        None => Ok(()),
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!("expected {expected} values, got {got}")))
    }
}

/// Samples `u(x_j)` on the spatial lattice, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        check_len(grid.len(), values.len())?;
        check_finite(&values, "field")?;
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![Complex64::default(); grid.len()],
        }
    }

    /// Samples a function of position. Fails if it returns a non-finite value.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> Complex64) -> Result<Self> {
        let d = grid.dim();
        let values = (0..grid.len()).map(|j| f(&grid.position(j)[..d])).collect();
        Field::new(grid, values)
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Field> {
        Field::new(self.grid, self.values.iter().map(|&z| f(z)).collect())
    }

    pub fn scaled(&self, factor: Complex64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&z| z * factor).collect())
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &Field, b: Complex64) -> Result<Field> {
        self.grid.check_same_space(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Ok(Field::from_raw(self.grid, values))
    }

    pub fn difference(&self, other: &Field) -> Result<Field> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// Pointwise product.
    pub fn product(&self, other: &Field) -> Result<Field> {
        self.grid.check_same_space(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&x, &y)| x * y).collect();
        Ok(Field::from_raw(self.grid, values))
    }

    /// `∫ |u|^2 dx` by the Riemann sum.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩ = ∫ conj(self) other dx`.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.grid.check_same_space(&other.grid)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// Largest `|u(x_j)|`.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Samples of `f̂(ξ_k)`, stored in transform order; use logical indices to address them.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        check_len(grid.len(), values.len())?;
        check_finite(&values, "spectrum")?;
        Ok(Spectrum { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Spectrum {
            grid,
            values: vec![Complex64::default(); grid.len()],
        }
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<Complex64>) -> Self {
        Spectrum { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Raw storage (transform order). Pair with [`Grid::mode`] to interpret.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Value at the logical index `k ∈ [-n/2, n/2)^d`.
    pub fn at(&self, mode: &[i64]) -> Option<Complex64> {
        self.grid.flat_index(mode).map(|j| self.values[j])
    }

    pub fn set(&mut self, mode: &[i64], value: Complex64) -> Result<()> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFinite { index: 0, context: "spectrum entry" });
        }
        let j = self
            .grid
            .flat_index(mode)
            .ok_or_else(|| Error::param("mode", format!("{mode:?} outside the frequency box")))?;
        self.values[j] = value;
        Ok(())
    }

    /// Multiplies every mode by `m(ξ)`.
    pub fn apply(&mut self, m: impl Fn(&Coords) -> Complex64) {
        for (j, v) in self.values.iter_mut().enumerate() {
            *v *= m(&self.grid.wavevector(j));
        }
    }

    /// Multiplies every mode by a radial multiplier `m(|ξ|)`.
    pub fn apply_radial(&mut self, m: impl Fn(f64) -> Complex64) {
        let norms = self.grid.wavenumbers();
        for (v, k) in self.values.iter_mut().zip(norms) {
            *v *= m(k);
        }
    }

    /// Same as [`Spectrum::apply_radial`] with precomputed `|ξ|`.
    pub fn apply_radial_with(&mut self, norms: &[f64], m: impl Fn(f64) -> Complex64) {
        for (v, &k) in self.values.iter_mut().zip(norms) {
            *v *= m(k);
        }
    }

    /// Multiplies by a precomputed table, storage order.
    pub fn apply_table(&mut self, table: &[Complex64]) {
        for (v, m) in self.values.iter_mut().zip(table) {
            *v *= m;
        }
    }

    /// `(2π)^{-d} ∫ |f̂|^2 dξ`, the Plancherel side of `‖f‖²_{L²}`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.grid.volume()
    }

    /// `(2π)^{-d} ∫ w(ξ) |f̂|^2 dξ` for a radial weight.
    pub fn weighted_norm_sqr(&self, w: impl Fn(f64) -> f64) -> f64 {
        let norms = self.grid.wavenumbers();
        self.values
            .iter()
            .zip(norms)
            .map(|(z, k)| w(k) * z.norm_sqr())
            .sum::<f64>()
            / self.grid.volume()
    }
}

/// `f ↦ f̂` with quadrature weight `(L/n)^d`.
pub fn forward_transform(f: &Field) -> Result<Spectrum> {
    check_finite(&f.values, "forward transform input")?;
    let grid = f.grid;
    let mut values = f.values.clone();
    fft::transform(&mut values, &grid.shape(), FftDirection::Forward);
    let w = grid.cell_volume();
    for (v, s) in values.iter_mut().zip(grid.centring_signs()) {
        *v *= w * s;
    }
    Ok(Spectrum::from_raw(grid, values))
}

/// Exact inverse of [`forward_transform`].
pub fn inverse_transform(fhat: &Spectrum) -> Result<Field> {
    check_finite(&fhat.values, "inverse transform input")?;
    let grid = fhat.grid;
    let mut values = fhat.values.clone();
    let w = 1.0 / grid.volume();
    for (v, s) in values.iter_mut().zip(grid.centring_signs()) {
        *v *= w * s;
    }
    fft::transform(&mut values, &grid.shape(), FftDirection::Inverse);
    Ok(Field::from_raw(grid, values))
}

/// Samples `u(t_j, x)` for `t_j = t0 + j dt`, time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid,
    t0: f64,
    values: Vec<Complex64>,
}

impl SpaceTimeField {
    pub fn new(grid: Grid, t0: f64, values: Vec<Complex64>) -> Result<Self> {
        check_len(grid.len() * grid.n_time(), values.len())?;
        check_finite(&values, "space-time field")?;
        if !t0.is_finite() {
            return Err(Error::param("t0", "time origin must be finite"));
        }
        Ok(SpaceTimeField { grid, t0, values })
    }

    /// Stacks snapshots taken at `t0, t0 + dt, ...`.
    pub fn from_snapshots(t0: f64, dt: f64, snapshots: &[Field]) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| Error::param("snapshots", "need at least one snapshot"))?;
        let grid = first.grid.with_time(snapshots.len(), dt)?;
        let mut values = Vec::with_capacity(grid.len() * snapshots.len());
        for s in snapshots {
            grid.check_same_space(&s.grid)?;
            values.extend_from_slice(&s.values);
        }
        SpaceTimeField::new(grid, t0, values)
    }

    /// Samples a function of `(t, x)`.
    pub fn from_fn(grid: Grid, t0: f64, mut f: impl FnMut(f64, &[f64]) -> Complex64) -> Result<Self> {
        let d = grid.dim();
        let mut values = Vec::with_capacity(grid.len() * grid.n_time());
        for t in grid.times(t0) {
            for j in 0..grid.len() {
                values.push(f(t, &grid.position(j)[..d]));
            }
        }
        SpaceTimeField::new(grid, t0, values)
    }

    pub(crate) fn from_raw(grid: Grid, t0: f64, values: Vec<Complex64>) -> Self {
        SpaceTimeField { grid, t0, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + (self.grid.n_time() - 1) as f64 * self.grid.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times(self.t0)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn n_time(&self) -> usize {
        self.grid.n_time()
    }

    /// Spatial slice at time index `j`.
    pub fn slice(&self, j: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.values[j * len..(j + 1) * len]
    }

    pub fn snapshot(&self, j: usize) -> Field {
        Field::from_raw(self.grid.with_time(1, 1.0).expect("valid grid"), self.slice(j).to_vec())
    }

    /// Multiplies each time slice by `w(t)`.
    pub fn windowed(&self, w: impl Fn(f64) -> f64) -> SpaceTimeField {
        let len = self.grid.len();
        let mut values = self.values.clone();
        for (j, t) in self.times().into_iter().enumerate() {
            let c = w(t);
            for v in &mut values[j * len..(j + 1) * len] {
                *v *= c;
            }
        }
        SpaceTimeField::from_raw(self.grid, self.t0, values)
    }

    pub fn scaled(&self, factor: Complex64) -> SpaceTimeField {
        SpaceTimeField::from_raw(self.grid, self.t0, self.values.iter().map(|&z| z * factor).collect())
    }

    /// Riemann sum `∫∫ |u|^2 dx dt` (rectangle rule in time).
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume() * self.grid.dt()
    }
}

/// Samples of `ũ(τ_m, ξ_k)`, time-frequency major, both axes in transform order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeSpectrum {
    grid: Grid,
    t0: f64,
    values: Vec<Complex64>,
}

impl SpaceTimeSpectrum {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Angular time frequencies in storage order.
    pub fn taus(&self) -> Vec<f64> {
        self.grid.temporal_frequencies()
    }

    /// Value at time-frequency slot `m` (storage order) and logical spatial index.
    pub fn at(&self, m: usize, mode: &[i64]) -> Option<Complex64> {
        let j = self.grid.flat_index(mode)?;
        self.values.get(m * self.grid.len() + j).copied()
    }

    /// `(2π)^{-(d+1)} ∫∫ w(τ, |ξ|) |ũ|^2 dτ dξ`.
    pub fn weighted_norm_sqr(&self, w: impl Fn(f64, f64) -> f64) -> f64 {
        let len = self.grid.len();
        let norms = self.grid.wavenumbers();
        let mut total = 0.0;
        for (m, tau) in self.taus().into_iter().enumerate() {
            let slice = &self.values[m * len..(m + 1) * len];
            total += slice
                .iter()
                .zip(&norms)
                .map(|(z, &k)| w(tau, k) * z.norm_sqr())
                .sum::<f64>();
        }
        total / (self.grid.volume() * self.grid.n_time() as f64 * self.grid.dt())
    }
}

/// `u(t, x) ↦ ũ(τ, ξ) = ∫∫ e^{-ix·ξ + itτ} u dx dt` with weights `dt (L/n)^d`.
pub fn spacetime_transform(u: &SpaceTimeField) -> Result<SpaceTimeSpectrum> {
    check_finite(&u.values, "space-time transform input")?;
    let grid = u.grid;
    let len = grid.len();
    let mut values = u.values.clone();
    let mut shape = grid.shape();
    for chunk in values.chunks_exact_mut(len) {
        fft::transform(chunk, &shape, FftDirection::Forward);
    }
    shape.insert(0, grid.n_time());
    fft::transform_axis(&mut values, &shape, 0, FftDirection::Inverse);
    let w = grid.cell_volume() * grid.dt();
    let signs = grid.centring_signs();
    for (m, tau) in grid.temporal_frequencies().into_iter().enumerate() {
        let phase = Complex64::from_polar(w, tau * u.t0);
        for (v, s) in values[m * len..(m + 1) * len].iter_mut().zip(&signs) {
            *v *= phase * s;
        }
    }
    Ok(SpaceTimeSpectrum {
        grid,
        t0: u.t0,
        values,
    })
}

/// Exact inverse of [`spacetime_transform`].
pub fn inverse_spacetime_transform(uhat: &SpaceTimeSpectrum) -> Result<SpaceTimeField> {
    check_finite(&uhat.values, "inverse space-time transform input")?;
    let grid = uhat.grid;
    let len = grid.len();
    let mut values = uhat.values.clone();
    let w = 1.0 / (grid.volume() * grid.n_time() as f64 * grid.dt());
    let signs = grid.centring_signs();
    for (m, tau) in grid.temporal_frequencies().into_iter().enumerate() {
        let phase = Complex64::from_polar(w, -tau * uhat.t0);
        for (v, s) in values[m * len..(m + 1) * len].iter_mut().zip(&signs) {
            *v *= phase * s;
        }
    }
    let mut shape = grid.shape();
    shape.insert(0, grid.n_time());
    fft::transform_axis(&mut values, &shape, 0, FftDirection::Forward);
    shape.remove(0);
    for chunk in values.chunks_exact_mut(len) {
        fft::transform(chunk, &shape, FftDirection::Inverse);
    }
    Ok(SpaceTimeField::from_raw(grid, uhat.t0, values))
}
