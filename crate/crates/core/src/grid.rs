//! Discretization of a periodic box standing in for the whole space.
//!
//! A [`Grid`] describes `n^d` equispaced points on `[-L/2, L/2)^d` plus an
//! optional uniform time axis. Sample points are `x_j = -L/2 + j L / n`, and
//! the dual lattice is `ξ_k = 2π k / L` with logical indices
//! `k ∈ [-n/2, n/2)` along every axis.
//!
//! Spectral arrays are stored in transform order (non-negative indices first,
//! then the negative ones), which is an implementation detail: all code that
//! needs a frequency goes through [`Grid::mode`], [`Grid::wavevector`],
//! [`Grid::flat_index`] or the iterator helpers, which speak logical indices.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 5;

/// A fixed-size coordinate tuple; only the first `dim` entries are used.
pub type Coords = [f64; MAX_DIM];

/// Logical lattice index `k ∈ [-n/2, n/2)^d`, first `dim` entries used.
pub type ModeIndex = [i64; MAX_DIM];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    box_length: f64,
    n_time: usize,
    dt: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, box_length: f64, n_time: usize, dt: f64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::param("d", format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::param("n", format!("points per dimension must be a power of two >= 8, got {n}")));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::param("box_length", format!("must be positive and finite, got {box_length}")));
        }
        if n_time == 0 {
            return Err(Error::param("n_time", "need at least one time sample"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", format!("must be positive and finite, got {dt}")));
        }
        n.checked_pow(dim as u32)
            .and_then(|len| len.checked_mul(n_time))
            .ok_or_else(|| Error::param("n", "grid too large"))?;
        Ok(Grid {
            dim,
            n,
            box_length,
            n_time,
            dt,
        })
    }

    /// A purely spatial grid (one time sample, unit step).
    pub fn spatial(dim: usize, n: usize, box_length: f64) -> Result<Self> {
        Grid::new(dim, n, box_length, 1, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn n_time(&self) -> usize {
        self.n_time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of spatial points, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spatial shape, one entry per axis.
    pub fn shape(&self) -> Vec<usize> {
        vec![self.n; self.dim]
    }

    pub fn dx(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Quadrature weight of one spatial cell, `(L/n)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Box volume `L^d`.
    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.dim as i32)
    }

    /// Spacing of the frequency lattice, `2π/L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    /// Largest representable frequency per axis, `π n / L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.n as f64 / self.box_length
    }

    /// Same box and time axis at a different spatial resolution.
    pub fn with_resolution(&self, n: usize) -> Result<Self> {
        Grid::new(self.dim, n, self.box_length, self.n_time, self.dt)
    }

    /// Same space at a different time axis.
    pub fn with_time(&self, n_time: usize, dt: f64) -> Result<Self> {
        Grid::new(self.dim, self.n, self.box_length, n_time, dt)
    }

    /// True when two grids describe the same spatial lattice.
    pub fn same_space(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.n == other.n && self.box_length == other.box_length
    }

    pub(crate) fn check_same_space(&self, other: &Grid) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(d={}, n={}, L={}) vs (d={}, n={}, L={})",
                self.dim, self.n, self.box_length, other.dim, other.n, other.box_length
            )))
        }
    }

    /// Sample point of the flat (row-major) index.
    pub fn position(&self, flat: usize) -> Coords {
        let mut x = [0.0; MAX_DIM];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            let j = rem % self.n;
            rem /= self.n;
            x[axis] = -0.5 * self.box_length + j as f64 * self.dx();
        }
        x
    }

    /// Logical lattice index of a storage slot in a spectral array.
    pub fn mode(&self, flat: usize) -> ModeIndex {
        let mut k = [0i64; MAX_DIM];
        let mut rem = flat;
        let half = (self.n / 2) as i64;
        for axis in (0..self.dim).rev() {
            let j = (rem % self.n) as i64;
            rem /= self.n;
            k[axis] = if j < half { j } else { j - self.n as i64 };
        }
        k
    }

    /// Storage slot of a logical lattice index, `None` outside `[-n/2, n/2)^d`.
    pub fn flat_index(&self, mode: &[i64]) -> Option<usize> {
        if mode.len() != self.dim {
            return None;
        }
        let half = (self.n / 2) as i64;
        let mut flat = 0usize;
        for &k in mode {
            if k < -half || k >= half {
                return None;
            }
            let j = if k >= 0 { k } else { k + self.n as i64 } as usize;
            flat = flat * self.n + j;
        }
        Some(flat)
    }

    /// Frequency `ξ = 2π k / L` of a storage slot.
    pub fn wavevector(&self, flat: usize) -> Coords {
        let k = self.mode(flat);
        let mut xi = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            xi[axis] = k[axis] as f64 * self.dk();
        }
        xi
    }

    /// `|ξ|` for every storage slot, in storage order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = self.dk();
        (0..self.len())
            .map(|flat| {
                let k = self.mode(flat);
                let s: i64 = k[..self.dim].iter().map(|&v| v * v).sum();
                (s as f64).sqrt() * dk
            })
            .collect()
    }

    /// Sign `(-1)^{Σ k}` relating the raw DFT to the centred-box transform.
    pub(crate) fn centring_signs(&self) -> Vec<f64> {
        (0..self.len())
            .map(|flat| {
                let k = self.mode(flat);
                if k[..self.dim].iter().sum::<i64>().rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect()
    }

    /// Time stamps `t0 + j dt`.
    pub fn times(&self, t0: f64) -> Vec<f64> {
        (0..self.n_time).map(|j| t0 + j as f64 * self.dt).collect()
    }

    /// Angular frequencies of the time transform, `2π m / (n_time dt)`, storage order.
    pub fn temporal_frequencies(&self) -> Vec<f64> {
        let nt = self.n_time as i64;
        let d_tau = 2.0 * PI / (self.n_time as f64 * self.dt);
        (0..nt)
            .map(|j| {
                let m = if j < (nt + 1) / 2 { j } else { j - nt };
                m as f64 * d_tau
            })
            .collect()
    }
}
