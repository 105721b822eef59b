//! Base data used by the experiments.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, Field, Spectrum};
use crate::grid::Grid;
use crate::randomize::{keyed_rng, lattice_key, streams};

/// A deterministic base datum `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BaseDatum {
    /// `amplitude · exp(-|x|²/(2 width²) + i momentum·x)`.
    Gaussian {
        width: f64,
        amplitude: f64,
        #[serde(default)]
        momentum: Vec<f64>,
    },
    /// Spectrum `amplitude · (1+|ξ|)^{-decay} e^{iθ_k}`, zero mean, with phases
    /// keyed by the mode so refinements of the same box extend the datum.
    PowerLaw { decay: f64, amplitude: f64, phase_seed: u64 },
}

impl BaseDatum {
    pub fn build(&self, grid: &Grid) -> Result<Field> {
        match self {
            BaseDatum::Gaussian {
                width,
                amplitude,
                momentum,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::param("width", "must be positive"));
                }
                if !momentum.is_empty() && momentum.len() != grid.dim() {
                    return Err(Error::param("momentum", "length must equal the dimension"));
                }
                gaussian(grid, *width, *amplitude, momentum)
            }
            BaseDatum::PowerLaw {
                decay,
                amplitude,
                phase_seed,
            } => inverse_transform(&power_law_spectrum(grid, *decay, *amplitude, *phase_seed)),
        }
    }
}

pub fn gaussian(grid: &Grid, width: f64, amplitude: f64, momentum: &[f64]) -> Result<Field> {
    Field::from_fn(*grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let phase: f64 = x.iter().zip(momentum).map(|(a, b)| a * b).sum();
        Complex64::from_polar(amplitude * (-0.5 * r2 / (width * width)).exp(), phase)
    })
}

/// Random-phase power-law spectrum; the zero mode is left empty.
pub fn power_law_spectrum(grid: &Grid, decay: f64, amplitude: f64, phase_seed: u64) -> Spectrum {
    let mut spec = Spectrum::zeros(*grid);
    let d = grid.dim();
    let norms = grid.wavenumbers();
    for (i, (v, &k)) in spec.values_mut().iter_mut().zip(&norms).enumerate() {
        if k == 0.0 {
            continue;
        }
        let mode = grid.mode(i);
        let theta: f64 = keyed_rng(phase_seed, streams::BASE_PHASES, lattice_key(&mode[..d])).gen::<f64>();
        *v = Complex64::from_polar(amplitude * (1.0 + k).powf(-decay), std::f64::consts::TAU * theta);
    }
    spec
}

/// Localized random packet: complex white noise under a gaussian envelope of
/// radius `envelope` centred at the origin, then a sharp spectral cut by
/// `keep`, normalized to unit `L²`.
pub fn random_packet<R: Rng>(grid: &Grid, envelope: f64, rng: &mut R, keep: impl Fn(&[f64]) -> bool) -> Result<Field> {
    let d = grid.dim();
    let inv = 0.5 / (envelope * envelope);
    let noise = Field::from_fn(*grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * (-r2 * inv).exp()
    })?;
    let mut spec = forward_transform(&noise)?;
    spec.apply(|xi| if keep(&xi[..d]) { Complex64::new(1.0, 0.0) } else { Complex64::default() });
    let norm = spec.norm_sqr().sqrt();
    if norm == 0.0 {
        return Err(Error::param("packet", "spectral cut removed every mode"));
    }
    let f = inverse_transform(&spec)?;
    Ok(f.scaled(Complex64::new(1.0 / norm, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_extends_consistently() {
        let coarse = Grid::spatial(2, 8, 6.0).unwrap();
        let fine = coarse.with_resolution(16).unwrap();
        let a = power_law_spectrum(&coarse, 1.5, 1.0, 7);
        let b = power_law_spectrum(&fine, 1.5, 1.0, 7);
        for k0 in -4..4 {
            for k1 in -4..4 {
                assert_eq!(a.at(&[k0, k1]), b.at(&[k0, k1]));
            }
        }
        assert_eq!(a.at(&[0, 0]), Some(Complex64::default()));
    }
}
