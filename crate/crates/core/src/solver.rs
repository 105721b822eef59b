//! Nonlinear evolution: Strang split-step and Picard iteration of the Duhamel map.
//!
//! Both solve `i∂_t u = |∇|^α u + μ (|x|^{-2α} ∗ |u|²) u` on the periodic box.
//! The Strang nonlinear substep is the exact phase flow
//! `u ↦ e^{-iτ μ V[u]} u`, exact because `|u|` (hence `V`) is frozen under it.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, Field, SpaceTimeField, Spectrum};
use crate::grid::Grid;
use crate::hartree::{HartreeParams, RieszKernel};
use crate::io::write_spacetime;
use crate::propagator::LinearFlow;
use crate::randomize::RandomizedDatum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Strang,
    Picard,
}

/// Where the initial datum came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DatumProvenance {
    Plain,
    Randomized(RandomizedDatum),
}

/// Split-step integrator with precomputed multipliers for one step size.
#[derive(Debug, Clone)]
pub struct SplitStep {
    params: HartreeParams,
    dt: f64,
    half: Vec<Complex64>,
    kernel: Option<RieszKernel>,
}

impl SplitStep {
    pub fn new(grid: &Grid, params: &HartreeParams, dt: f64) -> Result<Self> {
        params.check_grid(grid)?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", format!("step must be positive, got {dt}")));
        }
        let flow = LinearFlow::new(grid, params.alpha());
        let kernel = if params.is_linear() {
            None
        } else {
            Some(RieszKernel::new(grid, params.alpha())?)
        };
        Ok(SplitStep {
            params: *params,
            dt,
            half: flow.phases(0.5 * dt),
            kernel,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances a spectrum by one step, in place.
    pub fn advance(&self, spec: &mut Spectrum) -> Result<()> {
        spec.apply_table(&self.half);
        if let Some(kernel) = &self.kernel {
            let mut u = inverse_transform(spec)?;
            let density = Field::from_raw(
                *u.grid(),
                u.values().iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect(),
            );
            let mut v = forward_transform(&density)?;
            kernel.convolve_spectrum(&mut v);
            let potential = inverse_transform(&v)?;
            let scale = -self.dt * self.params.mu();
            for (z, p) in u.values_mut().iter_mut().zip(potential.values()) {
                *z *= Complex64::from_polar(1.0, scale * p.re);
            }
            *spec = forward_transform(&u)?;
        }
        spec.apply_table(&self.half);
        Ok(())
    }
}

/// One Strang step `U(dt/2) ∘ N(dt) ∘ U(dt/2)`.
pub fn strang_step(u: &Field, dt: f64, params: &HartreeParams) -> Result<Field> {
    let stepper = SplitStep::new(u.grid(), params, dt)?;
    let mut spec = forward_transform(u)?;
    stepper.advance(&mut spec)?;
    inverse_transform(&spec)
}

/// Knobs for [`evolve_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Strang steps between consecutive snapshots.
    pub substeps: usize,
    /// Picard stopping threshold in discrete `L^∞_t L²_x`.
    pub picard_tol: f64,
    pub picard_max_iter: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            substeps: 1,
            picard_tol: 1e-10,
            picard_max_iter: 50,
        }
    }
}

/// Snapshots `u(t_j)`, `t_j = j T/(n_time-1)`, of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: HartreeParams,
    pub method: Method,
    pub provenance: DatumProvenance,
    /// Picard iterations used (`None` for Strang).
    pub iterations: Option<usize>,
    /// Last Picard increment in `L^∞_t L²_x` (`None` for Strang).
    pub residual: Option<f64>,
    field: SpaceTimeField,
}

impl Trajectory {
    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn times(&self) -> Vec<f64> {
        self.field.times()
    }

    pub fn n_time(&self) -> usize {
        self.field.n_time()
    }

    pub fn snapshot(&self, j: usize) -> Field {
        self.field.snapshot(j)
    }

    pub fn final_state(&self) -> Field {
        self.field.snapshot(self.n_time() - 1)
    }

    pub fn spacetime(&self) -> &SpaceTimeField {
        &self.field
    }

    /// Writes the snapshots to the binary container plus a JSON sidecar manifest.
    pub fn save(&self, data_path: &Path, manifest_path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(data_path)?);
        write_spacetime(&mut w, &self.field)?;
        w.flush()?;
        let manifest = TrajectoryManifest {
            data_file: data_path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
            grid: *self.field.grid(),
            t0: self.field.t0(),
            params: self.params,
            method: self.method,
            provenance: self.provenance.clone(),
            iterations: self.iterations,
            residual: self.residual,
        };
        let mut m = BufWriter::new(File::create(manifest_path)?);
        serde_json::to_writer_pretty(&mut m, &manifest)?;
        m.flush()?;
        Ok(())
    }
}

/// Sidecar describing a saved trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub data_file: String,
    pub grid: Grid,
    pub t0: f64,
    pub params: HartreeParams,
    pub method: Method,
    pub provenance: DatumProvenance,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
}

pub fn evolve(datum: &Field, t_final: f64, n_time: usize, params: &HartreeParams, method: Method) -> Result<Trajectory> {
    evolve_with(datum, t_final, n_time, params, method, &EvolveOptions::default())
}

pub fn evolve_with(
    datum: &Field,
    t_final: f64,
    n_time: usize,
    params: &HartreeParams,
    method: Method,
    options: &EvolveOptions,
) -> Result<Trajectory> {
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::param("T", format!("final time must be positive, got {t_final}")));
    }
    if n_time < 2 {
        return Err(Error::param("n_time", "need at least two snapshots"));
    }
    if options.substeps == 0 {
        return Err(Error::param("substeps", "need at least one step per snapshot"));
    }
    params.check_grid(datum.grid())?;
    let h = t_final / (n_time - 1) as f64;
    let grid = datum.grid().with_time(n_time, h)?;
    match method {
        Method::Strang => strang_run(datum, grid, params, options.substeps),
        // overflow inside the iteration is the same failure as a growing residual
        Method::Picard => picard_run(datum, grid, params, options).map_err(|e| match e {
            Error::NonFinite { .. } => Error::PicardDiverged {
                streak: 0,
                residual: f64::INFINITY,
            },
            e => e,
        }),
    }
}

fn strang_run(datum: &Field, grid: Grid, params: &HartreeParams, substeps: usize) -> Result<Trajectory> {
    let stepper = SplitStep::new(&grid, params, grid.dt() / substeps as f64)?;
    let mut values = Vec::with_capacity(grid.len() * grid.n_time());
    values.extend_from_slice(datum.values());
    let mut spec = forward_transform(datum)?;
    for j in 1..grid.n_time() {
        for _ in 0..substeps {
            stepper.advance(&mut spec)?;
        }
        let u = inverse_transform(&spec)?;
        if u.values().iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Unstable { time: j as f64 * grid.dt() });
        }
        values.extend_from_slice(u.values());
    }
    Ok(Trajectory {
        params: *params,
        method: Method::Strang,
        provenance: DatumProvenance::Plain,
        iterations: None,
        residual: None,
        field: SpaceTimeField::from_raw(grid, 0.0, values),
    })
}

fn picard_run(datum: &Field, grid: Grid, params: &HartreeParams, options: &EvolveOptions) -> Result<Trajectory> {
    let flow = LinearFlow::new(&grid, params.alpha());
    let kernel = if params.is_linear() {
        None
    } else {
        Some(RieszKernel::new(&grid, params.alpha())?)
    };
    let nt = grid.n_time();
    let h = grid.dt();
    let times = grid.times(0.0);
    let datum_spec = forward_transform(datum)?;

    let evaluate = |profiles: &[Spectrum]| -> Result<Vec<Field>> {
        profiles
            .iter()
            .zip(&times)
            .enumerate()
            .map(|(j, (w, &t))| if j == 0 { Ok(datum.clone()) } else { flow.evaluate(w, t) })
            .collect()
    };

    // Interaction picture: w(t) = U(-t) u(t) = φ - i ∫_0^t U(-t') F(u(t')) dt'.
    let mut profiles = vec![datum_spec.clone(); nt];
    let mut states = evaluate(&profiles)?;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut growth_streak = 0;

    if let Some(kernel) = &kernel {
        for iter in 1..=options.picard_max_iter {
            iterations = iter;
            let mut integrands = Vec::with_capacity(nt);
            for (u, &t) in states.iter().zip(&times) {
                let potential = kernel.potential(u)?;
                let force = Field::from_raw(
                    *u.grid(),
                    u.values()
                        .iter()
                        .zip(&potential)
                        .map(|(&z, &p)| params.mu() * p * z)
                        .collect(),
                );
                let mut g = forward_transform(&force)?;
                flow.apply(&mut g, -t);
                integrands.push(g);
            }
            let mut next = Vec::with_capacity(nt);
            next.push(datum_spec.clone());
            let mut acc = vec![Complex64::default(); grid.len()];
            for j in 1..nt {
                for ((a, l), r) in acc.iter_mut().zip(integrands[j - 1].values()).zip(integrands[j].values()) {
                    *a += 0.5 * h * (l + r);
                }
                let mut w = datum_spec.clone();
                for (v, a) in w.values_mut().iter_mut().zip(&acc) {
                    *v += Complex64::new(0.0, -1.0) * a;
                }
                next.push(w);
            }
            let new_states = evaluate(&next)?;
            let increment = new_states
                .iter()
                .zip(&states)
                .map(|(a, b)| a.difference(b).map(|d| d.l2_norm()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            growth_streak = if increment > residual || !increment.is_finite() {
                growth_streak + 1
            } else {
                0
            };
            if !increment.is_finite() {
                return Err(Error::PicardDiverged {
                    streak: growth_streak,
                    residual: increment,
                });
            }
            residual = increment;
            profiles = next;
            states = new_states;
            if growth_streak >= 5 {
                return Err(Error::PicardDiverged {
                    streak: growth_streak,
                    residual,
                });
            }
            if residual < options.picard_tol {
                break;
            }
        }
        if residual >= options.picard_tol {
            log::warn!(
                "Picard iteration stopped after {iterations} iterations with increment {residual:.3e} (tolerance {:.1e})",
                options.picard_tol
            );
        }
    } else {
        residual = 0.0;
    }
    drop(profiles);

    let mut values = Vec::with_capacity(grid.len() * nt);
    for s in &states {
        values.extend_from_slice(s.values());
    }
    Ok(Trajectory {
        params: *params,
        method: Method::Picard,
        provenance: DatumProvenance::Plain,
        iterations: Some(iterations),
        residual: Some(residual),
        field: SpaceTimeField::from_raw(grid, 0.0, values),
    })
}

/// `v(t_j) = u(t_j) - U(t_j) φ` for every stored snapshot; identically zero when `μ = 0`.
pub fn duhamel_part(traj: &Trajectory, datum: &Field) -> Result<SpaceTimeField> {
    let first = traj.snapshot(0);
    let scale = datum.l2_norm().max(f64::MIN_POSITIVE);
    if !first.grid().same_space(datum.grid()) || first.difference(datum)?.l2_norm() > 1e-12 * scale {
        return Err(Error::param("datum", "trajectory was not produced from this datum"));
    }
    let grid = *traj.grid();
    if traj.params.is_linear() {
        return Ok(SpaceTimeField::from_raw(
            grid,
            0.0,
            vec![Complex64::default(); grid.len() * grid.n_time()],
        ));
    }
    let flow = LinearFlow::new(traj.grid(), traj.params.alpha());
    let spec = forward_transform(datum)?;
    let mut values = Vec::with_capacity(grid.len() * grid.n_time());
    for (j, t) in traj.times().into_iter().enumerate() {
        let u = traj.snapshot(j);
        if j == 0 {
            values.extend(u.values().iter().zip(datum.values()).map(|(a, b)| a - b));
        } else {
            let lin = flow.evaluate(&spec, t)?;
            values.extend(u.values().iter().zip(lin.values()).map(|(a, b)| a - b));
        }
    }
    Ok(SpaceTimeField::from_raw(grid, 0.0, values))
}
