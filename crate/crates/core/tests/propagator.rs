mod common;

use common::*;
use fracnls::propagator::{bessel_derivative, riesz_derivative};
use fracnls::{linear_propagate, Complex64, Field, Grid, LinearFlow, Order};

#[test]
fn unitarity_and_group_law_on_supported_grids() {
    for (g, grid) in supported_grids().into_iter().enumerate() {
        let flow = LinearFlow::new(&grid, Order::new(1.5).unwrap());
        for i in 0..100 {
            let f = random_field(&grid, (7000 + g * 100 + i) as u64);
            let spec = fracnls::forward_transform(&f).unwrap();
            let (t, s) = (0.37 + 0.01 * i as f64, -0.21);
            let ut = flow.evaluate(&spec, t).unwrap();
            assert!((ut.l2_norm() / f.l2_norm() - 1.0).abs() <= 1e-12);
            let mut two_steps = spec.clone();
            flow.apply(&mut two_steps, s);
            flow.apply(&mut two_steps, t);
            let joint = flow.evaluate(&spec, t + s).unwrap();
            assert!(rel_diff(&fracnls::inverse_transform(&two_steps).unwrap(), &joint) <= 1e-12);
        }
    }
}

#[test]
fn plane_wave_picks_up_a_phase() {
    let grid = Grid::spatial(2, 16, 6.0).unwrap();
    let mode = [3, -5];
    let f = plane_wave(&grid, &mode, Complex64::new(0.5, 0.2));
    let k = 34f64.sqrt() * grid.dk();
    let (t, alpha) = (0.8, 1.3);
    let out = linear_propagate(&f, t, alpha).unwrap();
    let expected = f.scaled(Complex64::from_polar(1.0, -t * k.powf(alpha)));
    assert!(rel_diff(&out, &expected) <= 1e-12);
}

#[test]
fn zero_time_is_identity() {
    let grid = Grid::spatial(3, 8, 4.0).unwrap();
    let f = random_field(&grid, 1);
    assert!(rel_diff(&linear_propagate(&f, 0.0, 1.7).unwrap(), &f) <= 1e-14);
}

/// Free Schrödinger evolution of `e^{-x²/2 + i k₀ x}` in closed form.
fn schrodinger_packet(x: f64, t: f64, k0: f64) -> Complex64 {
    let a = Complex64::new(1.0, 2.0 * t);
    let y = x - 2.0 * k0 * t;
    (-(y * y) / (2.0 * a) + Complex64::new(0.0, k0 * x - k0 * k0 * t)).exp() / a.sqrt()
}

#[test]
fn quadratic_dispersion_matches_closed_form_gaussian() {
    let grid = Grid::spatial(1, 512, 40.0).unwrap();
    for k0 in [0.0, 1.5] {
        let f = Field::from_fn(grid, |x| schrodinger_packet(x[0], 0.0, k0)).unwrap();
        let out = linear_propagate(&f, 0.5, 2.0).unwrap();
        for (i, v) in out.values().iter().enumerate() {
            let x = grid.position(i)[0];
            assert!((v - schrodinger_packet(x, 0.5, k0)).norm() <= 1e-8, "x = {x}, k0 = {k0}");
        }
    }
}

#[test]
fn propagator_commutes_with_derivatives() {
    let grid = Grid::spatial(2, 32, 7.0).unwrap();
    let f = random_field(&grid, 5);
    let (t, a) = (1.1, 1.4);
    let lhs = linear_propagate(&riesz_derivative(&f, -0.3).unwrap(), t, a).unwrap();
    let rhs = riesz_derivative(&linear_propagate(&f, t, a).unwrap(), -0.3).unwrap();
    assert!(rel_diff(&lhs, &rhs) <= 1e-12);
    let lhs = linear_propagate(&bessel_derivative(&f, 0.7).unwrap(), t, a).unwrap();
    let rhs = bessel_derivative(&linear_propagate(&f, t, a).unwrap(), 0.7).unwrap();
    assert!(rel_diff(&lhs, &rhs) <= 1e-12);
}

#[test]
fn derivative_multipliers() {
    let grid = Grid::spatial(2, 16, 5.0).unwrap();
    let mode = [2, 1];
    let k = 5f64.sqrt() * grid.dk();
    let f = plane_wave(&grid, &mode, Complex64::new(1.0, -1.0));
    let d = riesz_derivative(&f, 0.6).unwrap();
    assert!(rel_diff(&d, &f.scaled(Complex64::new(k.powf(0.6), 0.0))) <= 1e-12);
    let b = bessel_derivative(&f, -0.4).unwrap();
    assert!(rel_diff(&b, &f.scaled(Complex64::new((1.0 + k).powf(-0.4), 0.0))) <= 1e-12);

    // zero mode is killed by |∇|^s and kept by ⟨∇⟩^s
    let c = Field::from_fn(grid, |_| Complex64::new(2.0, 0.0)).unwrap();
    assert!(riesz_derivative(&c, 0.0).unwrap().max_abs() <= 1e-14);
    assert!(rel_diff(&bessel_derivative(&c, 3.0).unwrap(), &c) <= 1e-14);

    let mut g = random_field(&grid, 2);
    let mean = g.values().iter().sum::<Complex64>() / grid.len() as f64;
    g = g.map(|z| z - mean).unwrap();
    assert!(rel_diff(&riesz_derivative(&g, 0.0).unwrap(), &g) <= 1e-12);
    let ab = riesz_derivative(&riesz_derivative(&g, 0.4).unwrap(), -1.1).unwrap();
    assert!(rel_diff(&ab, &riesz_derivative(&g, -0.7).unwrap()) <= 1e-10);
    assert!(rel_diff(&bessel_derivative(&g, 0.0).unwrap(), &g) <= 1e-12);
}

#[test]
fn rescaled_datum_evolves_on_rescaled_time() {
    // g(x) = f(2x) sampled on the half box has the same values as f on the full box,
    // and U(t)g(x) = (U(2^α t) f)(2x).
    let (alpha, t) = (1.5, 0.3);
    let coarse = Grid::spatial(2, 32, 12.0).unwrap();
    let half = Grid::spatial(2, 32, 6.0).unwrap();
    let f = smooth_field(&coarse, 11, 1.0);
    let g = Field::new(half, f.values().to_vec()).unwrap();
    let lhs = linear_propagate(&g, t, alpha).unwrap();
    let rhs = linear_propagate(&f, 2f64.powf(alpha) * t, alpha).unwrap();
    let err = lhs.values().iter().zip(rhs.values()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    assert!(err <= 1e-8 * rhs.values().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
}

#[test]
fn order_is_validated() {
    for bad in [1.0, 0.5, 2.01, f64::NAN] {
        assert!(Order::new(bad).is_err());
        assert!(linear_propagate(&Field::zeros(Grid::spatial(1, 8, 1.0).unwrap()), 1.0, bad).is_err());
    }
    assert!(linear_propagate(&Field::zeros(Grid::spatial(1, 8, 1.0).unwrap()), f64::INFINITY, 1.5).is_err());
}
