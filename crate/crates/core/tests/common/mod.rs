#![allow(dead_code)]

use fracnls::randomize::keyed_rng;
use fracnls::{Complex64, Field, Grid, Spectrum};
use rand::Rng;
use rand_distr::StandardNormal;

/// Grids exercised by the spectral checks.
pub fn supported_grids() -> Vec<Grid> {
    [
        (1, 8, 5.0),
        (1, 64, 12.0),
        (1, 512, 40.0),
        (2, 8, 3.0),
        (2, 64, 20.0),
        (3, 16, 4.0 * std::f64::consts::PI),
        (3, 32, 9.0),
        (4, 8, 6.0),
        (5, 8, 7.0),
    ]
    .into_iter()
    .map(|(d, n, l)| Grid::spatial(d, n, l).unwrap())
    .collect()
}

pub fn random_values(len: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = keyed_rng(seed, 0x7465_7374, 0);
    (0..len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

pub fn random_field(grid: &Grid, seed: u64) -> Field {
    Field::new(*grid, random_values(grid.len(), seed)).unwrap()
}

pub fn random_spectrum(grid: &Grid, seed: u64) -> Spectrum {
    Spectrum::new(*grid, random_values(grid.len(), seed)).unwrap()
}

/// Smooth, localized random field: random gaussian bumps.
pub fn smooth_field(grid: &Grid, seed: u64, amplitude: f64) -> Field {
    let mut rng = keyed_rng(seed, 0x736d_6f6f, 0);
    let d = grid.dim();
    let l = grid.box_length();
    let bumps: Vec<(Vec<f64>, Complex64, f64)> = (0..3)
        .map(|_| {
            let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.1 * l..0.1 * l)).collect();
            let a = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * amplitude;
            (c, a, rng.gen_range(0.06 * l..0.1 * l))
        })
        .collect();
    Field::from_fn(*grid, |x| {
        bumps
            .iter()
            .map(|(c, a, w)| {
                let r2: f64 = x.iter().zip(c).map(|(p, q)| (p - q).powi(2)).sum();
                a * (-0.5 * r2 / (w * w)).exp()
            })
            .sum()
    })
    .unwrap()
}

/// Relative `L²` distance.
pub fn rel_diff(a: &Field, b: &Field) -> f64 {
    a.difference(b).unwrap().l2_norm() / b.l2_norm().max(f64::MIN_POSITIVE)
}

pub fn plane_wave(grid: &Grid, mode: &[i64], amplitude: Complex64) -> Field {
    let xi: Vec<f64> = mode.iter().map(|&k| k as f64 * grid.dk()).collect();
    Field::from_fn(*grid, |x| {
        let phase: f64 = x.iter().zip(&xi).map(|(a, b)| a * b).sum();
        amplitude * Complex64::from_polar(1.0, phase)
    })
    .unwrap()
}
