//! Pseudospectral toolkit for the fractional Hartree equation
//! `i∂_t u = |∇|^α u + μ (|x|^{-2α} ∗ |u|²) u` on a periodic box,
//! with Wiener-randomized initial data and the norms needed to study it.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod fft;
pub mod field;
pub mod grid;
pub mod hartree;
pub mod io;
pub mod norms;
pub mod propagator;
pub mod randomize;
pub mod solver;

pub use error::{Error, Result};
pub use field::{
    forward_transform, inverse_spacetime_transform, inverse_transform, spacetime_transform, Field, SpaceTimeField,
    SpaceTimeSpectrum, Spectrum,
};
pub use grid::Grid;
pub use hartree::{HartreeParams, RieszKernel};
pub use num_complex::Complex64;
pub use propagator::{linear_propagate, LinearFlow, Order};
pub use randomize::{Law, RandomDistribution, Randomizer};
pub use solver::{evolve, Method, Trajectory};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/linear-flow.md")]
    mod linear_flow {}
    #[doc = include_str!("../../../book/src/hartree.md")]
    mod hartree {}
    #[doc = include_str!("../../../book/src/randomization.md")]
    mod randomization {}
    #[doc = include_str!("../../../book/src/norms.md")]
    mod norms {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
