mod common;

use std::f64::consts::PI;

use common::*;
use fracnls::experiments::data::gaussian;
use fracnls::randomize::{
    build_window, certify_subgaussian, default_gamma_grid, sample, wiener_project, window_1d, RandomizedDatum,
};
use fracnls::{forward_transform, Complex64, Field, Grid, Law, RandomDistribution, Randomizer};
use rayon::prelude::*;

fn base_grid() -> Grid {
    Grid::spatial(2, 32, 16.0 * PI).unwrap()
}

fn base_datum() -> Field {
    gaussian(&base_grid(), 1.5, 1.0, &[0.3, -0.2]).unwrap()
}

#[test]
fn window_partition_of_unity_on_lattice_frequencies() {
    for grid in supported_grids() {
        // supp ψ ⊆ [-1, 1]^d, so only the 3^d cubes around ⌊ξ⌉ can contribute
        let d = grid.dim();
        let w = build_window(d).unwrap();
        let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
            .map(|c| (0..d).map(|i| (c / 3usize.pow(i as u32) % 3) as i64 - 1).collect())
            .collect();
        let mut worst: f64 = 0.0;
        for i in 0..grid.len() {
            let xi = &grid.wavevector(i)[..d];
            let total: f64 = offsets
                .iter()
                .map(|o| {
                    let n: Vec<i64> = xi.iter().zip(o).map(|(x, k)| x.round() as i64 + k).collect();
                    w.psi_shifted(xi, &n)
                })
                .sum();
            worst = worst.max((total - 1.0).abs());
        }
        assert!(worst <= 1e-10, "{grid:?}: {worst}");
    }
}

#[test]
fn window_support_and_integer_points() {
    let w = build_window(3).unwrap();
    for xi in [[1.0, 0.0, 0.0], [0.2, -1.0, 0.5], [0.0, 0.0, 1.7], [-3.0, 0.1, 0.1]] {
        assert_eq!(w.psi(&xi), 0.0);
    }
    let xi = [2.0, -1.0, 0.0];
    for n in [[2, -1, 0], [1, -1, 0], [2, 0, 0], [3, -1, 1]] {
        let v = w.psi_shifted(&xi, &n);
        let expected = if n == [2, -1, 0] { 1.0 } else { 0.0 };
        assert!((v - expected).abs() <= 1e-14);
    }
    for i in 0..=400 {
        let x = -2.0 + 0.01 * i as f64;
        let v = window_1d(x);
        assert!((0.0..=1.0).contains(&v));
    }
}

#[test]
fn wiener_pieces_reconstruct_the_field() {
    let f = base_datum();
    let w = build_window(2).unwrap();
    let lattice = w.lattice(f.grid());
    let mut acc = Field::zeros(*f.grid());
    for n in &lattice {
        let piece = wiener_project(&f, n, &w).unwrap();
        assert!(piece.l2_norm() <= f.l2_norm() * (1.0 + 1e-12));
        acc = acc.combine(Complex64::new(1.0, 0.0), &piece, Complex64::new(1.0, 0.0)).unwrap();
    }
    assert!(rel_diff(&acc, &f) <= 1e-10);
}

#[test]
fn plane_wave_touches_only_neighbouring_cubes() {
    let grid = base_grid();
    let f = plane_wave(&grid, &[5, -3], Complex64::new(1.0, 0.0));
    let xi = [5.0 * grid.dk(), -3.0 * grid.dk()];
    let w = build_window(2).unwrap();
    for n in w.lattice(&grid) {
        let norm = wiener_project(&f, &n, &w).unwrap().l2_norm();
        let far = (xi[0] - n[0] as f64).abs() >= 1.0 || (xi[1] - n[1] as f64).abs() >= 1.0;
        if far {
            assert!(norm <= 1e-12, "n = {n:?}");
        }
    }
}

#[test]
fn unit_coefficients_reproduce_the_base() {
    let f = base_datum();
    let r = Randomizer::new(&f, Law::Rademacher).unwrap();
    let ones = vec![Complex64::new(1.0, 0.0); r.lattice().len()];
    let back = fracnls::inverse_transform(&r.realize_spectrum_with(&ones)).unwrap();
    assert!(rel_diff(&back, &f) <= 1e-10);
}

#[test]
fn ensemble_mean_vanishes_and_second_moment_matches_projections() {
    let f = base_datum();
    let grid = *f.grid();
    let w = build_window(2).unwrap();
    // independent oracle: Σ_n ‖ψ(D−n)f‖² by explicit projections
    let oracle: f64 = w
        .lattice(&grid)
        .iter()
        .map(|n| wiener_project(&f, n, &w).unwrap().norm_sqr())
        .sum();
    for law in Law::ALL {
        let r = Randomizer::new(&f, law).unwrap();
        assert!((r.projection_energy() / oracle - 1.0).abs() <= 1e-10);
        let n_draws = 2000;
        let draws: Vec<Field> = (0..n_draws).map(|i| r.realize(42, i).unwrap()).collect();
        let masses: Vec<f64> = draws.iter().map(Field::norm_sqr).collect();
        let mean = masses.iter().sum::<f64>() / n_draws as f64;
        let var = masses.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n_draws - 1) as f64;
        let se = (var / n_draws as f64).sqrt();
        assert!((mean - oracle).abs() <= 3.0 * se, "{law:?}: {mean} vs {oracle} (se {se})");

        // coordinatewise mean: about 0.3% of components exceed 3 standard errors by chance
        let mut exceed = 0usize;
        let mut worst: f64 = 0.0;
        for i in 0..grid.len() {
            for part in [|z: Complex64| z.re, |z: Complex64| z.im] {
                let xs: Vec<f64> = draws.iter().map(|d| part(d.values()[i])).collect();
                let m = xs.iter().sum::<f64>() / n_draws as f64;
                let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n_draws - 1) as f64;
                let z = m.abs() / (v / n_draws as f64).sqrt().max(1e-300);
                worst = worst.max(z);
                exceed += (z > 3.0) as usize;
            }
        }
        assert!(exceed as f64 <= 0.015 * (2 * grid.len()) as f64, "{law:?}: {exceed} components beyond 3 SE");
        assert!(worst < 5.5, "{law:?}: worst z = {worst}");
    }
}

#[test]
fn subgaussian_certificates() {
    let grid = default_gamma_grid();
    let rad = certify_subgaussian(|g: f64| g.cosh(), &grid).unwrap();
    assert!(rad <= 0.5 && rad > 0.49);
    let gauss = certify_subgaussian(|g: f64| (0.5 * g * g).exp(), &grid).unwrap();
    assert!((gauss - 0.5).abs() <= 1e-12);

    // uniform on [-√3, √3]: MGF by Simpson quadrature of the density
    let a = 3f64.sqrt();
    let quad_mgf = |g: f64| {
        let m = 2000;
        let h = 2.0 * a / m as f64;
        let f = |x: f64| (g * x).exp() / (2.0 * a);
        let mut acc = f(-a) + f(a);
        for j in 1..m {
            acc += f(-a + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    let quad = certify_subgaussian(quad_mgf, &grid).unwrap();
    let built = RandomDistribution::new(Law::UniformSymmetric).unwrap().component_c;
    assert!((quad - built).abs() <= 1e-8, "{quad} vs {built}");
    assert!(built < 0.5);

    assert!(certify_subgaussian(|g: f64| g.cosh(), &[-1.0, 0.5, 1.0]).is_err());
    assert!(certify_subgaussian(|g: f64| (11.0 * g * g).exp(), &grid).is_err());
    assert!(certify_subgaussian(|_| f64::INFINITY, &grid).is_err());
}

#[test]
fn draws_are_bit_identical_regardless_of_execution_order() {
    let f = base_datum();
    let r = Randomizer::new(&f, Law::ComplexGaussian).unwrap();
    let sequential: Vec<Field> = (0..32).map(|i| r.realize(7, i).unwrap()).collect();
    let mut parallel: Vec<Field> = (0..32u64).into_par_iter().map(|i| r.realize(7, 31 - i).unwrap()).collect();
    parallel.reverse();
    assert_eq!(sequential, parallel);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let pooled: Vec<Field> = pool.install(|| (0..32u64).into_par_iter().map(|i| r.realize(7, i).unwrap()).collect());
    assert_eq!(sequential, pooled);
    assert_ne!(sequential[0], sequential[1]);
    assert_ne!(r.realize(8, 0).unwrap(), sequential[0]);
}

#[test]
fn provenance_regenerates_the_draw() {
    let f = base_datum();
    let (datum, field) = sample(&f, Law::UniformSymmetric, 99, 5).unwrap();
    assert_eq!(datum.realize(&f).unwrap(), field);
    let json = serde_json::to_string(&datum).unwrap();
    let back: RandomizedDatum = serde_json::from_str(&json).unwrap();
    assert_eq!(back, datum);
    assert_eq!(back.realize(&f).unwrap(), field);
}

#[test]
fn randomization_only_reweights_spectral_support() {
    let f = base_datum();
    let (_, field) = sample(&f, Law::Rademacher, 1, 0).unwrap();
    let base = forward_transform(&f).unwrap();
    let rand = forward_transform(&field).unwrap();
    for (b, r) in base.values().iter().zip(rand.values()) {
        if b.norm() == 0.0 {
            assert!(r.norm() <= 1e-12);
        }
    }
}
