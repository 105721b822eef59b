//! Hartree nonlinearity `F(u) = μ (|x|^{-2α} ∗ |u|²) u` and the conserved functionals.
//!
//! The Riesz kernel acts as the Fourier multiplier
//! `c_{d,2α} |ξ|^{-(d-2α)}` with
//! `c_{d,β} = 2^{d-β} π^{d/2} Γ((d-β)/2) / Γ(β/2)`. On the periodic box the
//! zero mode is dropped: the potential is shifted by its mean, which only
//! rotates `u` by a global time-dependent phase.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, Field, Spectrum};
use crate::grid::Grid;
use crate::norms::lp_norm;
use crate::propagator::Order;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HartreeParams {
    alpha: Order,
    mu: f64,
    dim: usize,
}

impl HartreeParams {
    /// Parameters of the nonlinear problem; requires `μ ≠ 0` and `d > 2α`.
    pub fn new(alpha: f64, mu: f64, dim: usize) -> Result<Self> {
        let alpha = Order::new(alpha)?;
        if !mu.is_finite() || mu == 0.0 {
            return Err(Error::param(
                "mu",
                format!("coupling must be finite and nonzero, got {mu} (use HartreeParams::linear for the free flow)"),
            ));
        }
        check_kernel_dimension(dim, alpha)?;
        Ok(HartreeParams { alpha, mu, dim })
    }

    /// The free flow (`μ = 0`), used as the linear reference by the solvers.
    pub fn linear(alpha: f64, dim: usize) -> Result<Self> {
        Ok(HartreeParams {
            alpha: Order::new(alpha)?,
            mu: 0.0,
            dim,
        })
    }

    /// `new` for `μ ≠ 0`, `linear` for `μ = 0`.
    pub fn with_coupling(alpha: f64, mu: f64, dim: usize) -> Result<Self> {
        if mu == 0.0 {
            HartreeParams::linear(alpha, dim)
        } else {
            HartreeParams::new(alpha, mu, dim)
        }
    }

    pub fn alpha(&self) -> Order {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_linear(&self) -> bool {
        self.mu == 0.0
    }

    pub(crate) fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch(format!(
                "parameters are for d = {}, field lives in d = {}",
                self.dim,
                grid.dim()
            )));
        }
        Ok(())
    }
}

fn check_kernel_dimension(dim: usize, alpha: Order) -> Result<()> {
    if (dim as f64) <= 2.0 * alpha.get() {
        return Err(Error::param(
            "d",
            format!(
                "the kernel |x|^(-2α) with α = {} is not locally integrable in d = {dim}; \
                 the Hardy-Littlewood-Sobolev range needs d > 2α",
                alpha.get()
            ),
        ));
    }
    Ok(())
}

/// `c_{d,β}` such that the transform of `|x|^{-β}` is `c_{d,β} |ξ|^{β-d}`.
pub fn riesz_constant(dim: usize, beta: f64) -> f64 {
    let d = dim as f64;
    2f64.powf(d - beta) * PI.powf(0.5 * d) * gamma(0.5 * (d - beta)) / gamma(0.5 * beta)
}

/// Multiplier table of `|x|^{-2α} ∗` on one grid.
#[derive(Debug, Clone)]
pub struct RieszKernel {
    grid: Grid,
    table: Vec<f64>,
}

impl RieszKernel {
    pub fn new(grid: &Grid, alpha: Order) -> Result<Self> {
        check_kernel_dimension(grid.dim(), alpha)?;
        let beta = 2.0 * alpha.get();
        let c = riesz_constant(grid.dim(), beta);
        let p = grid.dim() as f64 - beta;
        let table = grid
            .wavenumbers()
            .into_iter()
            .map(|k| if k == 0.0 { 0.0 } else { c * k.powf(-p) })
            .collect();
        Ok(RieszKernel { grid: *grid, table })
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn convolve_spectrum(&self, spectrum: &mut Spectrum) {
        for (v, &m) in spectrum.values_mut().iter_mut().zip(&self.table) {
            *v *= m;
        }
    }

    pub fn convolve(&self, g: &Field) -> Result<Field> {
        self.grid.check_same_space(g.grid())?;
        let mut s = forward_transform(g)?;
        self.convolve_spectrum(&mut s);
        inverse_transform(&s)
    }

    /// `|x|^{-2α} ∗ |u|²`, real part.
    pub fn potential(&self, u: &Field) -> Result<Vec<f64>> {
        let density = density(u);
        Ok(self.convolve(&density)?.values().iter().map(|z| z.re).collect())
    }
}

fn density(u: &Field) -> Field {
    Field::from_raw(
        *u.grid(),
        u.values().iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect(),
    )
}

/// `|x|^{-2α} ∗ g` with the zero mode removed.
pub fn riesz_potential_convolve(g: &Field, alpha: f64) -> Result<Field> {
    RieszKernel::new(g.grid(), Order::new(alpha)?)?.convolve(g)
}

/// `F(u) = μ (|x|^{-2α} ∗ |u|²) u`.
pub fn hartree_force(u: &Field, p: &HartreeParams) -> Result<Field> {
    p.check_grid(u.grid())?;
    if p.is_linear() {
        return Ok(Field::zeros(*u.grid()));
    }
    let conv = riesz_potential_convolve(&density(u), p.alpha.get())?;
    let values = conv
        .values()
        .iter()
        .zip(u.values())
        .map(|(&v, &z)| p.mu * v * z)
        .collect();
    Ok(Field::from_raw(*u.grid(), values))
}

/// `m(u) = ‖u‖²_{L²}`.
pub fn mass(u: &Field) -> f64 {
    u.norm_sqr()
}

/// Kinetic, potential and total energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

/// `K(u) = ½ ⟨u, |∇|^α u⟩` by spectral quadrature.
pub fn kinetic_energy(u: &Field, alpha: Order) -> Result<f64> {
    let s = forward_transform(u)?;
    let a = alpha.get();
    Ok(0.5 * s.weighted_norm_sqr(|k| k.powf(a)))
}

/// `⟨u, F(u)⟩` evaluated in full complex arithmetic; real in exact arithmetic.
pub fn interaction_pairing(u: &Field, p: &HartreeParams) -> Result<Complex64> {
    u.inner(&hartree_force(u, p)?)
}

/// `(K, P, E)` with `P(u) = ¼ ⟨u, F(u)⟩`.
pub fn energy(u: &Field, p: &HartreeParams) -> Result<Energy> {
    p.check_grid(u.grid())?;
    let kinetic = kinetic_energy(u, p.alpha)?;
    let potential = if p.is_linear() {
        0.0
    } else {
        0.25 * interaction_pairing(u, p)?.re
    };
    Ok(Energy {
        kinetic,
        potential,
        total: kinetic + potential,
    })
}

/// `‖|x|^{-2α} ∗ |u|²‖_{L∞} / (‖u‖_{L^{p₁}} ‖u‖_{L^{p₂}})` with
/// `p₁ = 2d/(d-2α-ε₁)`, `p₂ = 2d/(d-2α+ε₁)`, for `0 < ε₁ < d - 2α`.
pub fn sup_potential_ratio(u: &Field, alpha: f64, eps1: f64) -> Result<f64> {
    let alpha = Order::new(alpha)?;
    let d = u.grid().dim() as f64;
    let gap = d - 2.0 * alpha.get();
    if !(eps1 > 0.0 && eps1 < gap) {
        return Err(Error::param("eps1", format!("must lie in (0, d - 2α) = (0, {gap}), got {eps1}")));
    }
    let kernel = RieszKernel::new(u.grid(), alpha)?;
    let sup = kernel.potential(u)?.into_iter().map(f64::abs).fold(0.0, f64::max);
    let p1 = 2.0 * d / (gap - eps1);
    let p2 = 2.0 * d / (gap + eps1);
    let denom = lp_norm(u, p1)? * lp_norm(u, p2)?;
    if denom == 0.0 {
        return Err(Error::param("u", "ratio undefined for the zero field"));
    }
    Ok(sup / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_validation() {
        assert!(HartreeParams::new(1.25, 0.0, 3).is_err());
        assert!(HartreeParams::new(1.25, f64::NAN, 3).is_err());
        assert!(HartreeParams::new(1.5, 1.0, 3).is_err());
        assert!(HartreeParams::new(2.0, 1.0, 4).is_err());
        assert!(HartreeParams::new(2.0, -1.0, 5).is_ok());
        assert!(HartreeParams::new(1.25, 1.0, 3).is_ok());
        assert!(HartreeParams::linear(1.5, 3).unwrap().is_linear());
    }

    #[test]
    fn convolution_rejects_non_integrable_kernel() {
        let g = Field::zeros(Grid::spatial(3, 8, 1.0).unwrap());
        let err = riesz_potential_convolve(&g, 1.5).unwrap_err();
        assert!(err.to_string().contains("d > 2α"));
    }

    #[test]
    fn riesz_constant_at_newtonian_case() {
        // |x|^{-1} in d = 3 has transform 4π/|ξ|².
        assert!((riesz_constant(3, 1.0) - 4.0 * PI).abs() < 1e-12);
    }
}
