//! Wiener decomposition and randomization of initial data.
//!
//! The window is `ψ(ξ) = Π_i ψ₁(ξ_i)` with `ψ₁(x) = φ(x) / Σ_m φ(x - m)` and
//! `φ(x) = exp(-1/(1-x²))` on `(-1, 1)`. Hence `supp ψ ⊂ [-1, 1]^d`,
//! `0 ≤ ψ ≤ 1` and `Σ_n ψ(ξ - n) = 1` identically. A randomized datum is
//!
//! ```text
//! f^ω = Σ_n g_n(ω) ψ(D - n) f
//! ```
//!
//! assembled in one spectral pass. Coefficients are drawn from a generator
//! keyed by `(seed, sample index, n)`, so any member of an ensemble can be
//! regenerated alone and in any order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, Field, Spectrum};
use crate::grid::{Grid, MAX_DIM};

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// The one-dimensional normalized window `ψ₁`.
pub fn window_1d(x: f64) -> f64 {
    let base = x.floor();
    let denom: f64 = (-1..=2).map(|m| bump(x - (base + m as f64))).sum();
    bump(x) / denom
}

/// Lattice translates `n` with `ψ₁(x - n) ≠ 0`, with their weights.
fn neighbours_1d(x: f64) -> [(i64, f64); 2] {
    let lo = x.floor();
    [(lo as i64, window_1d(x - lo)), (lo as i64 + 1, window_1d(x - lo - 1.0))]
}

/// The tensor-product partition of unity on unit frequency cubes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSystem {
    dim: usize,
}

impl WindowSystem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `ψ(ξ)`.
    pub fn psi(&self, xi: &[f64]) -> f64 {
        xi[..self.dim].iter().map(|&x| window_1d(x)).product()
    }

    /// `ψ(ξ - n)`.
    pub fn psi_shifted(&self, xi: &[f64], n: &[i64]) -> f64 {
        xi[..self.dim]
            .iter()
            .zip(n)
            .map(|(&x, &m)| window_1d(x - m as f64))
            .product()
    }

    /// Half-width `M` of the lattice box `[-M, M]^d` that covers a grid's
    /// frequencies padded by one cube.
    pub fn lattice_radius(&self, grid: &Grid) -> i64 {
        grid.nyquist().ceil() as i64 + 1
    }

    /// All lattice points `n` in the padded box, lexicographic order.
    pub fn lattice(&self, grid: &Grid) -> Vec<Vec<i64>> {
        let m = self.lattice_radius(grid);
        let side = (2 * m + 1) as usize;
        let count = side.pow(self.dim as u32);
        (0..count)
            .map(|mut id| {
                let mut n = vec![0i64; self.dim];
                for axis in (0..self.dim).rev() {
                    n[axis] = (id % side) as i64 - m;
                    id /= side;
                }
                n
            })
            .collect()
    }
}

pub fn build_window(dim: usize) -> Result<WindowSystem> {
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(Error::param("d", format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
    }
    Ok(WindowSystem { dim })
}

/// `ψ(D - n) f`.
pub fn wiener_project(f: &Field, n: &[i64], window: &WindowSystem) -> Result<Field> {
    let grid = f.grid();
    if n.len() != grid.dim() || window.dim() != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "lattice point of length {} for a {}-dimensional grid",
            n.len(),
            grid.dim()
        )));
    }
    let m = window.lattice_radius(grid);
    if n.iter().any(|&v| v.abs() > m) {
        return Err(Error::param("n", format!("{n:?} lies outside the padded frequency box [-{m}, {m}]^d")));
    }
    let mut spec = forward_transform(f)?;
    spec.apply(|xi| Complex64::new(window.psi_shifted(xi, n), 0.0));
    inverse_transform(&spec)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for the key `(seed, stream, counter)`.
pub fn keyed_rng(seed: u64, stream: u64, counter: u64) -> ChaCha8Rng {
    let k = splitmix(seed ^ splitmix(stream ^ splitmix(counter)));
    ChaCha8Rng::seed_from_u64(k)
}

/// Folds a lattice point into one counter word.
pub fn lattice_key(n: &[i64]) -> u64 {
    n.iter()
        .fold(0x51_7cc1_b727_220a, |h, &v| splitmix(h ^ (v as u64).wrapping_add(0x2545_f491_4f6c_dd1d)))
}

/// Streams separating the different consumers of randomness.
pub mod streams {
    pub const COEFFICIENTS: u64 = 0x636f_6566;
    pub const BASE_PHASES: u64 = 0x7068_6173;
    pub const KHINTCHINE: u64 = 0x6b68_696e;
    pub const BILINEAR: u64 = 0x6269_6c69;
    pub const PERTURBATION: u64 = 0x7065_7274;
}

/// Built-in coefficient laws. The real and imaginary parts of `g_n` are
/// independent copies of a unit-variance real law `X`, scaled so that
/// `g_n = (X + iY)/√2` and `E|g_n|² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    #[serde(alias = "complex-gaussian", alias = "gaussian")]
    ComplexGaussian,
    Rademacher,
    #[serde(alias = "uniform-symmetric", alias = "uniform")]
    UniformSymmetric,
}

impl Law {
    pub const ALL: [Law; 3] = [Law::ComplexGaussian, Law::Rademacher, Law::UniformSymmetric];

    pub fn name(&self) -> &'static str {
        match self {
            Law::ComplexGaussian => "complex_gaussian",
            Law::Rademacher => "rademacher",
            Law::UniformSymmetric => "uniform_symmetric",
        }
    }

    /// One draw of the unit-variance real law.
    pub fn sample_component<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Law::ComplexGaussian => StandardNormal.sample(rng),
            Law::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Law::UniformSymmetric => 3f64.sqrt() * (2.0 * rng.gen::<f64>() - 1.0),
        }
    }

    /// One complex coefficient `(X + iY)/√2`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Complex64 {
        let re = self.sample_component(rng);
        let im = self.sample_component(rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Moment generating function `E e^{γX}` of the unit-variance real law.
    pub fn component_mgf(&self, gamma: f64) -> f64 {
        match self {
            Law::ComplexGaussian => (0.5 * gamma * gamma).exp(),
            Law::Rademacher => gamma.cosh(),
            Law::UniformSymmetric => {
                let a = 3f64.sqrt() * gamma;
                if a.abs() < 1e-8 {
                    1.0 + a * a / 6.0
                } else {
                    a.sinh() / a
                }
            }
        }
    }
}

/// Smallest `c` with `M(γ) ≤ e^{cγ²}` on every grid point.
///
/// Fails when the grid does not span `[-4, 4]` or when no `c ≤ 10` works.
pub fn certify_subgaussian(mgf: impl Fn(f64) -> f64, gamma_grid: &[f64]) -> Result<f64> {
    let lo = gamma_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gamma_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo <= -4.0 && hi >= 4.0) {
        return Err(Error::param("gamma_grid", format!("must span [-4, 4], spans [{lo}, {hi}]")));
    }
    let mut c: f64 = 0.0;
    for &g in gamma_grid.iter().filter(|g| **g != 0.0) {
        let m = mgf(g);
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::param("law", format!("moment generating function is not finite at γ = {g}")));
        }
        c = c.max(m.ln() / (g * g));
    }
    if c > 10.0 {
        return Err(Error::param(
            "law",
            format!("not subgaussian with c ≤ 10 on the grid (needs c = {c:.3})"),
        ));
    }
    Ok(c)
}

/// Uniform grid on `[-4, 4]` used for certification by default.
pub fn default_gamma_grid() -> Vec<f64> {
    (0..=160).map(|i| -4.0 + 0.05 * i as f64).collect()
}

/// A built-in law together with its certified constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomDistribution {
    pub law: Law,
    /// Constant of the unit-variance component law `X`.
    pub component_c: f64,
}

impl RandomDistribution {
    pub fn new(law: Law) -> Result<Self> {
        let component_c = certify_subgaussian(|g| law.component_mgf(g), &default_gamma_grid())?;
        Ok(RandomDistribution { law, component_c })
    }

    /// Constant for the real and imaginary parts of `g_n` themselves (`X/√2`).
    pub fn coefficient_c(&self) -> f64 {
        0.5 * self.component_c
    }
}

/// Provenance of one ensemble member; the realized field is regenerated, never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedDatum {
    pub seed: u64,
    pub index: u64,
    pub law: Law,
    /// Path of the base datum file, when it came from disk.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
}

impl RandomizedDatum {
    pub fn realize(&self, base: &Field) -> Result<Field> {
        Randomizer::new(base, self.law)?.realize(self.seed, self.index)
    }
}

/// Precomputed Wiener decomposition of one base datum.
#[derive(Debug, Clone)]
pub struct Randomizer {
    distribution: RandomDistribution,
    window: WindowSystem,
    spectrum: Spectrum,
    lattice: Vec<Vec<i64>>,
    /// Per mode: `(lattice id, ψ(ξ - n))` for the at most `2^d` touching cubes.
    offsets: Vec<usize>,
    entries: Vec<(u32, f64)>,
}

impl Randomizer {
    pub fn new(base: &Field, law: Law) -> Result<Self> {
        Randomizer::from_spectrum(forward_transform(base)?, law)
    }

    pub fn from_spectrum(spectrum: Spectrum, law: Law) -> Result<Self> {
        let grid = *spectrum.grid();
        let window = build_window(grid.dim())?;
        let lattice = window.lattice(&grid);
        let m = window.lattice_radius(&grid);
        let side = (2 * m + 1) as usize;
        let d = grid.dim();
        let mut offsets = Vec::with_capacity(grid.len() + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for flat in 0..grid.len() {
            let xi = grid.wavevector(flat);
            let per_axis: Vec<[(i64, f64); 2]> = xi[..d].iter().map(|&x| neighbours_1d(x)).collect();
            for corner in 0..(1usize << d) {
                let mut w = 1.0;
                let mut id = 0usize;
                for (axis, nb) in per_axis.iter().enumerate() {
                    let (n, wi) = nb[(corner >> axis) & 1];
                    w *= wi;
                    id = id * side + (n + m) as usize;
                }
                if w > 0.0 {
                    entries.push((id as u32, w));
                }
            }
            offsets.push(entries.len());
        }
        Ok(Randomizer {
            distribution: RandomDistribution::new(law)?,
            window,
            spectrum,
            lattice,
            offsets,
            entries,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.spectrum.grid()
    }

    pub fn distribution(&self) -> &RandomDistribution {
        &self.distribution
    }

    pub fn window(&self) -> &WindowSystem {
        &self.window
    }

    pub fn base_spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Lattice points covered, in the order used for coefficient tables.
    pub fn lattice(&self) -> &[Vec<i64>] {
        &self.lattice
    }

    /// `g_n` for every lattice point, drawn from `(seed, index, n)`.
    pub fn coefficients(&self, seed: u64, index: u64) -> Vec<Complex64> {
        let law = self.distribution.law;
        self.lattice
            .iter()
            .map(|n| {
                let mut rng = keyed_rng(seed ^ splitmix(index), streams::COEFFICIENTS, lattice_key(n));
                law.sample(&mut rng)
            })
            .collect()
    }

    /// `Σ_n c_n ψ(ξ - n) f̂(ξ)` for an explicit coefficient table.
    pub fn realize_spectrum_with(&self, coefficients: &[Complex64]) -> Spectrum {
        let mut out = self.spectrum.clone();
        for (flat, v) in out.values_mut().iter_mut().enumerate() {
            let m: Complex64 = self.entries[self.offsets[flat]..self.offsets[flat + 1]]
                .iter()
                .map(|&(id, w)| coefficients[id as usize] * w)
                .sum();
            *v *= m;
        }
        out
    }

    pub fn realize_spectrum(&self, seed: u64, index: u64) -> Spectrum {
        self.realize_spectrum_with(&self.coefficients(seed, index))
    }

    pub fn realize(&self, seed: u64, index: u64) -> Result<Field> {
        inverse_transform(&self.realize_spectrum(seed, index))
    }

    /// `Σ_n ‖ψ(D - n) f‖²_{L²}` computed in spectral space.
    pub fn projection_energy(&self) -> f64 {
        let mut total = 0.0;
        for (flat, v) in self.spectrum.values().iter().enumerate() {
            let w2: f64 = self.entries[self.offsets[flat]..self.offsets[flat + 1]]
                .iter()
                .map(|&(_, w)| w * w)
                .sum();
            total += w2 * v.norm_sqr();
        }
        total / self.grid().volume()
    }
}

/// Draws `f^ω` for ensemble member `index`.
pub fn sample(f: &Field, law: Law, seed: u64, index: u64) -> Result<(RandomizedDatum, Field)> {
    let field = Randomizer::new(f, law)?.realize(seed, index)?;
    Ok((
        RandomizedDatum {
            seed,
            index,
            law,
            base: None,
        },
        field,
    ))
}
