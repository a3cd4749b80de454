//! Energy-monotone explicit gradient flow for node-local energies with an
//! isotropic quadratic gradient penalty `κ |∇u|²`.
//!
//! The discrete energy weights nodes and edges with the trapezoid rule, so the
//! derivative with respect to an interior node is exactly `−V (2κ Δₕu − ∇f)`
//! with `Δₕ` the 7-point Laplacian and `V` the cell volume.

use rayon::prelude::*;

use super::lattice::{Field, Grid3, SiteValue};
use super::{SolveReport, SolverError};

/// Density `f(u)`, its gradient, and the stiffness `κ` of `κ |∇u|²`.
pub trait LocalEnergy<V: SiteValue>: Sync {
    fn density(&self, v: &V) -> f64;
    fn gradient(&self, v: &V) -> V;
    fn stiffness(&self) -> f64;
}

/// Zero bulk term, unit stiffness: the discrete Dirichlet energy.
pub struct Harmonic;

impl<V: SiteValue> LocalEnergy<V> for Harmonic {
    fn density(&self, _: &V) -> f64 {
        0.0
    }
    fn gradient(&self, _: &V) -> V {
        V::zero()
    }
    fn stiffness(&self) -> f64 {
        1.0
    }
}

#[derive(Clone, Debug)]
pub struct Evaluation<V> {
    pub energy: f64,
    /// Sum of absolute values of every energy contribution.
    pub magnitude: f64,
    pub residual: Vec<V>,
    pub max_residual: f64,
}

fn trapezoid(idx: usize, n: usize) -> f64 {
    if idx == 0 || idx + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// Energy, residual `2κΔₕu − ∇f` at interior nodes (zero on the boundary) and
/// the residual max-norm, in one pass. Planes `x = const` are processed in
/// parallel and reduced in plane order.
pub fn evaluate<V: SiteValue, E: LocalEnergy<V>>(field: &Field<V>, energy: &E) -> Evaluation<V> {
    let g = field.grid;
    let mut residual = vec![V::zero(); g.len()];
    let partials: Vec<(f64, f64, f64)> = residual
        .par_chunks_mut(g.plane_len())
        .enumerate()
        .map(|(i, plane)| plane_pass(&g, &field.values, energy, i, plane))
        .collect();
    let mut total = 0.0;
    let mut magnitude = 0.0;
    let mut max_residual = 0.0f64;
    for (e, m, r) in partials {
        total += e;
        magnitude += m;
        max_residual = max_residual.max(r);
    }
    Evaluation { energy: total, magnitude, residual, max_residual }
}

fn plane_pass<V: SiteValue, E: LocalEnergy<V>>(g: &Grid3, u: &[V], energy: &E, i: usize, out: &mut [V]) -> (f64, f64, f64) {
    let kappa = energy.stiffness();
    let vol = g.cell_volume();
    let (ix2, iy2, iz2) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy), 1.0 / (g.hz * g.hz));
    let (sx, sy) = (g.ny * g.nz, g.nz);
    let wx = trapezoid(i, g.nx);
    let mut total = 0.0;
    let mut magnitude = 0.0;
    let mut max_residual = 0.0f64;
    for j in 0..g.ny {
        let wy = trapezoid(j, g.ny);
        for k in 0..g.nz {
            let wz = trapezoid(k, g.nz);
            let idx = g.index(i, j, k);
            let v = u[idx];

            let f = energy.density(&v) * wx * wy * wz * vol;
            total += f;
            magnitude += f.abs();
            if i + 1 < g.nx {
                let t = kappa * (u[idx + sx] - v).norm2() * ix2 * wy * wz * vol;
                total += t;
                magnitude += t;
            }
            if j + 1 < g.ny {
                let t = kappa * (u[idx + sy] - v).norm2() * iy2 * wx * wz * vol;
                total += t;
                magnitude += t;
            }
            if k + 1 < g.nz {
                let t = kappa * (u[idx + 1] - v).norm2() * iz2 * wx * wy * vol;
                total += t;
                magnitude += t;
            }

            if !g.is_boundary(i, j, k) {
                let lap = (u[idx + sx] + u[idx - sx] - v * 2.0) * ix2
                    + (u[idx + sy] + u[idx - sy] - v * 2.0) * iy2
                    + (u[idx + 1] + u[idx - 1] - v * 2.0) * iz2;
                let r = lap * (2.0 * kappa) - energy.gradient(&v);
                max_residual = max_residual.max(r.norm());
                out[j * g.nz + k] = r;
            }
        }
    }
    (total, magnitude, max_residual)
}

/// Frobenius norm of the finite-difference Jacobian of `∇f`, maximized over
/// the nodes of `field`.
pub fn hessian_bound<V: SiteValue, E: LocalEnergy<V>>(field: &Field<V>, energy: &E) -> f64 {
    field
        .values
        .par_iter()
        .map(|v| {
            let delta = 1e-6 * (1.0 + v.norm());
            let mut frob2 = 0.0;
            for c in 0..V::DIM {
                let mut p = *v;
                let mut m = *v;
                *p.component_mut(c) += delta;
                *m.component_mut(c) -= delta;
                let col = (energy.gradient(&p) - energy.gradient(&m)) * (0.5 / delta);
                frob2 += col.norm2();
            }
            frob2.sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

/// `0.9 h²_min / (12κ + h²_min Λ)`.
pub fn auto_dt<V: SiteValue, E: LocalEnergy<V>>(field: &Field<V>, energy: &E) -> f64 {
    let h2 = field.grid.h_min().powi(2);
    0.9 * h2 / (12.0 * energy.stiffness() + h2 * hessian_bound(field, energy))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub dt: Option<f64>,
}

const NOISE_FLOOR: f64 = 1e-13;
const STALL_FACTOR: f64 = 1e-20;
const REGROW_AFTER: usize = 20;

/// Explicit flow `u ← u + dt · residual` on interior nodes. A step that
/// raises the energy beyond rounding is rejected and `dt` halved; every
/// attempted step counts toward `max_iters`.
pub fn run_flow<V: SiteValue, E: LocalEnergy<V>>(
    initial: &Field<V>,
    energy: &E,
    opts: &FlowOptions,
) -> Result<(Field<V>, SolveReport), SolverError> {
    let grid = initial.grid;
    if !initial.is_finite() {
        return Err(SolverError::Grid("initial field has non-finite values".into()));
    }
    let dt0 = match opts.dt {
        Some(dt) => dt,
        None => auto_dt(initial, energy),
    };
    let mask = grid.boundary_mask();
    let mut u = initial.clone();
    let mut eval = evaluate(&u, energy);
    if !eval.energy.is_finite() {
        return Err(SolverError::Divergence { iteration: 0, energy: eval.energy });
    }

    let mut dt = dt0;
    let mut report = SolveReport {
        iterations: 0,
        rejected_steps: 0,
        final_energy: eval.energy,
        final_residual_maxnorm: eval.max_residual,
        converged: eval.max_residual <= opts.tol,
        energy_history_monotone: true,
        dt_initial: dt0,
        dt_final: dt0,
        seed: None,
        restart: 0,
    };
    let mut attempts = 0;
    let mut streak = 0;
    let mut candidate = u.clone();

    while !report.converged && attempts < opts.max_iters {
        attempts += 1;
        candidate
            .values
            .par_iter_mut()
            .zip(u.values.par_iter())
            .zip(eval.residual.par_iter())
            .zip(mask.par_iter())
            .for_each(|(((c, &v), &r), &boundary)| *c = if boundary { v } else { v + r * dt });
        let next = evaluate(&candidate, energy);
        if !next.energy.is_finite() {
            return Err(SolverError::Divergence { iteration: report.iterations, energy: next.energy });
        }
        if next.energy <= eval.energy + NOISE_FLOOR * eval.magnitude {
            report.energy_history_monotone &= next.energy <= eval.energy + NOISE_FLOOR * eval.magnitude;
            std::mem::swap(&mut u, &mut candidate);
            eval = next;
            report.iterations += 1;
            report.converged = eval.max_residual <= opts.tol;
            streak += 1;
            if streak >= REGROW_AFTER && dt < dt0 {
                dt = (2.0 * dt).min(dt0);
                streak = 0;
            }
        } else {
            report.rejected_steps += 1;
            dt *= 0.5;
            streak = 0;
            if dt < STALL_FACTOR * dt0 {
                break;
            }
        }
    }
    report.final_energy = eval.energy;
    report.final_residual_maxnorm = eval.max_residual;
    report.dt_final = dt;
    Ok((u, report))
}
