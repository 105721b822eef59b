mod common;

use common::*;
use fracnls::experiments::stats::{ccdf, fit_line};
use fracnls::hartree::{hartree_force, mass};
use fracnls::norms::{dyadic_project, mixed_norm, sobolev_norm, NormSpec};
use fracnls::solver::strang_step;
use fracnls::{
    forward_transform, inverse_transform, linear_propagate, Complex64, Field, Grid, HartreeParams, Law, Randomizer,
    SpaceTimeField,
};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (1usize..=3, prop_oneof![Just(8usize), Just(16)], 0.5f64..30.0)
        .prop_map(|(d, n, l)| Grid::spatial(d, n, l).unwrap())
}

fn field_strategy() -> impl Strategy<Value = Field> {
    (grid_strategy(), any::<u64>()).prop_map(|(g, seed)| random_field(&g, seed))
}

fn hartree_field() -> impl Strategy<Value = Field> {
    (any::<u64>(), 2.0f64..20.0).prop_map(|(seed, l)| smooth_field(&Grid::spatial(3, 8, l).unwrap(), seed, 1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trip(f in field_strategy()) {
        let spec = forward_transform(&f).unwrap();
        prop_assert!(rel_diff(&inverse_transform(&spec).unwrap(), &f) <= 1e-12);
        prop_assert!((spec.norm_sqr() / f.norm_sqr() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn free_flow_is_a_unitary_group(f in field_strategy(), t in -5.0f64..5.0, s in -5.0f64..5.0, alpha in 1.01f64..=2.0) {
        let ut = linear_propagate(&f, t, alpha).unwrap();
        prop_assert!((ut.l2_norm() / f.l2_norm() - 1.0).abs() <= 1e-12);
        let composed = linear_propagate(&ut, s, alpha).unwrap();
        prop_assert!(rel_diff(&composed, &linear_propagate(&f, t + s, alpha).unwrap()) <= 1e-11);
    }

    #[test]
    fn split_step_conserves_mass(u in hartree_field(), dt in 1e-4f64..0.2, mu in -3.0f64..3.0, alpha in 1.01f64..1.49) {
        prop_assume!(mu != 0.0);
        let p = HartreeParams::new(alpha, mu, 3).unwrap();
        let next = strang_step(&u, dt, &p).unwrap();
        prop_assert!((mass(&next) / mass(&u) - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn force_is_gauge_covariant_and_cubic(u in hartree_field(), theta in 0.0f64..6.3, lambda in 0.1f64..3.0) {
        let p = HartreeParams::new(1.25, 1.0, 3).unwrap();
        let f = hartree_force(&u, &p).unwrap();
        let z = Complex64::from_polar(lambda, theta);
        let g = hartree_force(&u.scaled(z), &p).unwrap();
        let expected = f.scaled(z * lambda * lambda);
        prop_assert!(rel_diff(&g, &expected) <= 1e-12);
    }

    #[test]
    fn sobolev_norm_is_monotone_in_s(f in field_strategy(), s in -2.0f64..2.0, ds in 0.0f64..1.0) {
        prop_assert!(sobolev_norm(&f, s).unwrap() <= sobolev_norm(&f, s + ds).unwrap() * (1.0 + 1e-14));
    }

    #[test]
    fn dyadic_pieces_tile(f in field_strategy()) {
        let mut acc = Field::zeros(*f.grid());
        for n in [1u32, 2, 4, 8, 16, 32, 64, 128, 256] {
            acc = acc
                .combine(Complex64::new(1.0, 0.0), &dyadic_project(&f, n).unwrap(), Complex64::new(1.0, 0.0))
                .unwrap();
        }
        prop_assert!(rel_diff(&acc, &f) <= 1e-12);
    }

    #[test]
    fn mixed_norm_homogeneity(seed in any::<u64>(), q in 2.0f64..10.0, r in 2.0f64..10.0, c in -4.0f64..4.0) {
        let grid = Grid::new(2, 8, 3.0, 5, 0.1).unwrap();
        let u = SpaceTimeField::new(grid, 0.0, random_values(grid.len() * 5, seed)).unwrap();
        let a = mixed_norm(&u, q, r).unwrap();
        let b = mixed_norm(&u.scaled(Complex64::new(c, 0.0)), q, r).unwrap();
        prop_assert!((b - c.abs() * a).abs() <= 1e-12 * a.max(1e-300) * (1.0 + c.abs()));
    }

    #[test]
    fn norm_spec_text_round_trip(kind in 0usize..3, a in -3.0f64..3.0, q in 2.0f64..50.0, r in 2.0f64..50.0, inf in any::<bool>()) {
        let spec = match kind {
            0 => NormSpec::Sobolev { s: a },
            1 => NormSpec::Mixed { q: if inf { f64::INFINITY } else { q }, r },
            _ => NormSpec::Xsb { s: a, b: r / 50.0, alpha: 1.0 + q / 50.0 },
        };
        prop_assert_eq!(spec.to_string().parse::<NormSpec>().unwrap(), spec);
    }

    #[test]
    fn draws_are_reproducible(seed in any::<u64>(), index in 0u64..1000) {
        let grid = Grid::spatial(2, 8, 20.0).unwrap();
        let base = smooth_field(&grid, 1, 1.0);
        let r = Randomizer::new(&base, Law::UniformSymmetric).unwrap();
        prop_assert_eq!(r.realize(seed, index).unwrap(), r.realize(seed, index).unwrap());
    }

    #[test]
    fn ccdf_is_nonincreasing(samples in prop::collection::vec(0.0f64..10.0, 1..200), mut lambdas in prop::collection::vec(-1.0f64..11.0, 1..40)) {
        lambdas.sort_by(f64::total_cmp);
        let p = ccdf(&samples, &lambdas);
        prop_assert!(p.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn exact_lines_are_recovered(a in -5.0f64..5.0, b in -5.0f64..5.0, n in 3usize..30) {
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.7 - 2.0).collect();
        let y: Vec<f64> = x.iter().map(|v| a + b * v).collect();
        let line = fit_line(&x, &y).unwrap();
        prop_assert!((line.slope - b).abs() <= 1e-10 && (line.intercept - a).abs() <= 1e-10);
    }
}
