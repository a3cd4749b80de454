//! Finite-difference Landau–de Gennes energy on a box with Dirichlet data,
//! minimized by gradient flow.
//!
//! The energy density is `f_B(Q) + L |∇Q|²`. Inputs are taken in whatever
//! consistent units the caller uses.

pub mod flow;
pub mod io;
pub mod lattice;
pub mod uniaxial;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bulk::{BulkError, BulkFunctional};
use crate::qtensor::QTensor;
pub use flow::{evaluate, run_flow, FlowOptions, Harmonic, LocalEnergy};
pub use lattice::{Field, Grid3, QField, ScalarField, SiteValue};
pub use uniaxial::{minimize_uniaxial_fixed_director, UniaxialEnergy, UniaxialReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("grid: {0}")]
    Grid(String),
    #[error("solver configuration: {0}")]
    Config(String),
    #[error("diverged after {iteration} accepted steps (energy {energy})")]
    Divergence { iteration: usize, energy: f64 },
    #[error(transparent)]
    Bulk(#[from] BulkError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub functional: BulkFunctional,
    pub elastic_l: f64,
    /// `None` selects the automatic stable step.
    pub dt_init: Option<f64>,
    pub tol_residual: f64,
    pub max_iters: usize,
    /// Multiplicative slack for bound audits.
    pub slack: f64,
    /// Perturbed restarts on top of the harmonic start.
    pub restarts: usize,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(functional: BulkFunctional, elastic_l: f64) -> Self {
        SolverConfig {
            functional,
            elastic_l,
            dt_init: None,
            tol_residual: 1e-8,
            max_iters: 200_000,
            slack: 1e-3,
            restarts: 0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(SolverError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("elastic_l", self.elastic_l)?;
        positive("tol_residual", self.tol_residual)?;
        if let Some(dt) = self.dt_init {
            positive("dt_init", dt)?;
        }
        if !(self.slack.is_finite() && self.slack >= 0.0) {
            return Err(SolverError::Config(format!("slack must be nonnegative, got {}", self.slack)));
        }
        Ok(())
    }

    fn flow_options(&self) -> FlowOptions {
        FlowOptions { tol: self.tol_residual, max_iters: self.max_iters, dt: self.dt_init }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    /// Accepted steps.
    pub iterations: usize,
    pub rejected_steps: usize,
    pub final_energy: f64,
    pub final_residual_maxnorm: f64,
    pub converged: bool,
    pub energy_history_monotone: bool,
    pub dt_initial: f64,
    pub dt_final: f64,
    pub seed: Option<u64>,
    /// 0 for the unperturbed start.
    pub restart: usize,
}

/// The full tensor energy `f_B(Q) + L|∇Q|²`.
pub struct TensorEnergy<'a> {
    pub functional: &'a BulkFunctional,
    pub elastic_l: f64,
}

impl LocalEnergy<QTensor> for TensorEnergy<'_> {
    fn density(&self, v: &QTensor) -> f64 {
        self.functional.density(v)
    }
    fn gradient(&self, v: &QTensor) -> QTensor {
        self.functional.gradient(v)
    }
    fn stiffness(&self) -> f64 {
        self.elastic_l
    }
}

fn tensor_energy(cfg: &SolverConfig) -> TensorEnergy<'_> {
    TensorEnergy { functional: &cfg.functional, elastic_l: cfg.elastic_l }
}

pub fn discrete_energy(field: &QField, cfg: &SolverConfig) -> f64 {
    evaluate(field, &tensor_energy(cfg)).energy
}

/// `2L ΔₕQ − ∇f_B(Q)` at interior nodes, zero on the boundary.
pub fn el_residual(field: &QField, cfg: &SolverConfig) -> QField {
    Field { grid: field.grid, values: evaluate(field, &tensor_energy(cfg)).residual }
}

pub fn minimize(initial: &QField, cfg: &SolverConfig) -> Result<(QField, SolveReport), SolverError> {
    cfg.validate()?;
    run_flow(initial, &tensor_energy(cfg), &cfg.flow_options())
}

/// Discrete harmonic extension of the boundary values of `field`.
pub fn harmonic_extension<V: SiteValue>(field: &Field<V>) -> Field<V> {
    let g = field.grid;
    let (bmax, _) = field.max_boundary_norm();
    let boundary: Vec<V> = (0..g.len()).filter(|&i| g.is_boundary_index(i)).map(|i| field.values[i]).collect();
    let mean = boundary.iter().fold(V::zero(), |acc, &v| acc + v) * (1.0 / boundary.len() as f64);
    let start = if boundary.iter().all(|&v| v == boundary[0]) {
        field.with_interior(boundary[0])
    } else {
        field.with_interior(mean)
    };
    if bmax == 0.0 {
        return start;
    }
    let n = g.nx.max(g.ny).max(g.nz);
    let opts = FlowOptions { tol: 1e-10 * bmax / g.h_min().powi(2), max_iters: 100 * n * n, dt: None };
    match run_flow(&start, &Harmonic, &opts) {
        Ok((u, _)) => u,
        Err(_) => start,
    }
}

/// Amplitude of perturbations used for random restarts.
pub fn restart_amplitude(boundary: &QField, functional: &BulkFunctional) -> f64 {
    let low_temp_scale = functional.landau().and_then(|l| l.s_plus()).map(|s| (2.0f64 / 3.0).sqrt() * s);
    0.1 * low_temp_scale.unwrap_or_else(|| boundary.max_boundary_norm().0)
}

/// Interior perturbed by independent uniform noise in `[−amp, amp]` per coefficient.
pub fn perturbed(field: &QField, amp: f64, seed: u64) -> QField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = field.clone();
    for (idx, v) in out.values.iter_mut().enumerate() {
        if !field.grid.is_boundary_index(idx) {
            for c in v.0.iter_mut() {
                *c += amp * rng.gen_range(-1.0..=1.0);
            }
        }
    }
    out
}

/// Harmonic start plus `cfg.restarts` perturbed starts; keeps the lowest
/// final energy, preferring converged runs.
pub fn minimize_multistart(boundary: &QField, cfg: &SolverConfig) -> Result<(QField, SolveReport), SolverError> {
    cfg.validate()?;
    let base = harmonic_extension(boundary);
    let amp = restart_amplitude(boundary, &cfg.functional);
    let mut best: Option<(QField, SolveReport)> = None;
    for run in 0..=cfg.restarts {
        let seed = cfg.seed.wrapping_add(run as u64);
        let start = if run == 0 { base.clone() } else { perturbed(&base, amp, seed) };
        let (field, mut report) = minimize(&start, cfg)?;
        report.seed = Some(seed);
        report.restart = run;
        let better = match &best {
            None => true,
            Some((_, b)) => {
                (report.converged && !b.converged)
                    || (report.converged == b.converged && report.final_energy < b.final_energy)
            }
        };
        if better {
            best = Some((field, report));
        }
    }
    Ok(best.expect("at least one run"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bulk::{Material, PolyTerm, PolynomialBulk};
    use crate::qtensor::{normalize3, rotation};

    const Z: [f64; 3] = [0.0, 0.0, 1.0];

    fn nondim() -> Material {
        Material::new(1.0, 6.0, 2.0, 0.0, 1.0).unwrap()
    }

    fn smooth_field(grid: Grid3, amp: f64) -> QField {
        Field::from_fn(grid, |i, j, k| {
            let [x, y, z] = grid.position(i, j, k);
            QTensor::from_coeffs([
                amp * (0.7 + 0.3 * (x + 0.5 * y).sin()),
                amp * 0.4 * (y - z).cos(),
                amp * 0.2 * (x * z).sin(),
                amp * 0.3 * (0.3 * x + y * z).cos(),
                amp * 0.1 * (x - y + z),
            ])
        })
    }

    #[test]
    fn constant_field_energy_is_volume_times_density() {
        let m = Material::MBBA;
        let cfg = SolverConfig::new(BulkFunctional::quartic(m, 44.0), m.elastic_l);
        let g = Grid3::new(5, 6, 7, 0.3, 0.2, 0.1).unwrap();
        let q0 = QTensor::uniaxial(0.4, &normalize3(&[1.0, 1.0, 0.0]));
        let field = Field::constant(g, q0);
        let e = discrete_energy(&field, &cfg);
        let want = g.volume() * cfg.functional.density(&q0);
        assert!((e - want).abs() <= 1e-12 * want.abs());
    }

    #[test]
    fn nematic_constant_field_has_negative_energy() {
        let m = Material::MBBA;
        let cfg = SolverConfig::new(BulkFunctional::quartic(m, 45.0), m.elastic_l);
        let s = cfg.functional.landau().unwrap().s_plus().unwrap();
        let field = Field::constant(Grid3::cube(5, 1e-7).unwrap(), QTensor::uniaxial(s, &Z));
        assert!(discrete_energy(&field, &cfg) < 0.0);
    }

    #[test]
    fn linear_field_elastic_energy() {
        // s(x) = s₀ x / Lx along a fixed director; |∇Q|² = (2/3)(s₀/Lx)²
        let cfg = SolverConfig::new(BulkFunctional::quartic(nondim(), 0.0), 0.7);
        let zero_bulk = Harmonic;
        let g = Grid3::new(9, 5, 6, 0.25, 0.5, 0.5).unwrap();
        let lx = g.extent()[0];
        let s0 = 0.6;
        let field = Field::from_fn(g, |i, j, k| QTensor::uniaxial(s0 * g.position(i, j, k)[0] / lx, &Z));
        let elastic = evaluate(&field, &TensorEnergy { functional: &cfg.functional, elastic_l: 0.7 }).energy
            - evaluate(&field, &BulkOnly(&cfg.functional)).energy;
        let want = 0.7 * (2.0 / 3.0) * (s0 / lx).powi(2) * g.volume();
        assert!((elastic - want).abs() <= 1e-12 * want);
        let harmonic = evaluate(&field, &zero_bulk).energy;
        assert!((harmonic * 0.7 - want).abs() <= 1e-12 * want);
    }

    struct BulkOnly<'a>(&'a BulkFunctional);
    impl LocalEnergy<QTensor> for BulkOnly<'_> {
        fn density(&self, v: &QTensor) -> f64 {
            self.0.density(v)
        }
        fn gradient(&self, v: &QTensor) -> QTensor {
            self.0.gradient(v)
        }
        fn stiffness(&self) -> f64 {
            0.0
        }
    }

    #[test]
    fn residual_of_constant_fields() {
        let m = Material::MBBA;
        let cfg = SolverConfig::new(BulkFunctional::quartic(m, 44.0), m.elastic_l);
        let l = cfg.functional.landau().unwrap();
        let g = Grid3::cube(5, 1e-7).unwrap();
        let stationary = Field::constant(g, QTensor::uniaxial(l.s_plus().unwrap(), &Z));
        let r = el_residual(&stationary, &cfg);
        let scale = m.b;
        assert!(r.values.iter().all(|v| v.norm() <= 1e-10 * scale));

        let q = QTensor::from_coeffs([0.1, 0.2, -0.1, 0.05, 0.3]);
        let r = el_residual(&Field::constant(g, q), &cfg);
        for (idx, v) in r.values.iter().enumerate() {
            if g.is_boundary_index(idx) {
                assert_eq!(*v, QTensor::ZERO);
            } else {
                assert_eq!(*v, -cfg.functional.gradient(&q));
            }
        }
    }

    fn check_gradient_consistency(cfg: &SolverConfig, field: &QField) {
        let g = field.grid;
        let r = el_residual(field, cfg);
        let vol = g.cell_volume();
        let mut checked = 0;
        for idx in (0..g.len()).filter(|&i| !g.is_boundary_index(i)) {
            for c in 0..5 {
                let h = 1e-5;
                let mut p = field.clone();
                let mut m = field.clone();
                p.values[idx].0[c] += h;
                m.values[idx].0[c] -= h;
                let fd = -(discrete_energy(&p, cfg) - discrete_energy(&m, cfg)) / (2.0 * h * vol);
                let want = r.values[idx].0[c];
                let scale = r.values[idx].norm().max(1e-2);
                assert!((fd - want).abs() <= 1e-6 * scale, "node {idx} comp {c}: {fd} vs {want}");
            }
            checked += 1;
        }
        assert!(checked >= 27);
    }

    #[test]
    fn residual_is_negative_energy_gradient() {
        let g = Grid3::new(5, 5, 5, 0.4, 0.5, 0.6).unwrap();
        let field = smooth_field(g, 0.5);
        let m = nondim();
        let poly = PolynomialBulk::new(-0.2, 1.0, 0.5, 6, vec![PolyTerm { m: 3, p: 0, coeff: 1.0 }]).unwrap();
        for fun in [
            BulkFunctional::quartic(m, -0.5),
            BulkFunctional::Polynomial(poly),
            BulkFunctional::gl(m, -0.5, 0.3).unwrap(),
        ] {
            check_gradient_consistency(&SolverConfig::new(fun, 0.8), &field);
        }
    }

    fn uniaxial_boundary(grid: Grid3, s: f64) -> QField {
        Field::constant(grid, QTensor::uniaxial(s, &Z))
    }

    #[test]
    fn stationary_start_needs_no_iterations() {
        let m = nondim();
        let cfg = SolverConfig::new(BulkFunctional::quartic(m, -0.5), 1.0);
        let s = cfg.functional.landau().unwrap().s_plus().unwrap();
        let start = uniaxial_boundary(Grid3::cube(7, 0.5).unwrap(), s);
        let (out, report) = minimize(&start, &cfg).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 0);
        assert_eq!(out, start);
    }

    #[test]
    fn zero_interior_relaxes_to_nematic_constant() {
        let m = nondim();
        let mut cfg = SolverConfig::new(BulkFunctional::quartic(m, -0.5), 1.0);
        cfg.tol_residual = 1e-9;
        let g = Grid3::cube(7, 0.5).unwrap();
        let s = cfg.functional.landau().unwrap().s_plus().unwrap();
        let boundary = uniaxial_boundary(g, s);
        let (out, report) = minimize(&boundary.with_interior(QTensor::ZERO), &cfg).unwrap();
        assert!(report.converged, "{report:?}");
        assert!(report.energy_history_monotone);
        let want = g.volume() * cfg.functional.density(&QTensor::uniaxial(s, &Z));
        assert!((report.final_energy - want).abs() <= 1e-6 * want.abs());
        for v in &out.values {
            assert!((*v - QTensor::uniaxial(s, &Z)).norm() < 1e-8);
        }
    }

    #[test]
    fn boundary_is_bit_identical() {
        let m = nondim();
        let mut cfg = SolverConfig::new(BulkFunctional::quartic(m, 1.0), 1.0);
        cfg.max_iters = 50;
        let g = Grid3::cube(6, 0.5).unwrap();
        let mut start = smooth_field(g, 0.3);
        start.values[0].0[2] = -0.0;
        let (out, _) = minimize(&start, &cfg).unwrap();
        for idx in (0..g.len()).filter(|&i| g.is_boundary_index(i)) {
            for c in 0..5 {
                assert_eq!(out.values[idx].0[c].to_bits(), start.values[idx].0[c].to_bits());
            }
        }
    }

    #[test]
    fn high_temperature_maximum_on_boundary() {
        let cfg = SolverConfig::new(BulkFunctional::quartic(nondim(), 2.0), 1.0);
        let g = Grid3::cube(9, 0.5).unwrap();
        let boundary = smooth_field(g, 0.3);
        let (out, report) = minimize_multistart(&boundary, &cfg).unwrap();
        assert!(report.converged);
        assert!(out.max_interior_norm().0 <= out.max_boundary_norm().0 + 1e-8);
    }

    #[test]
    fn frame_equivariance() {
        let mut cfg = SolverConfig::new(BulkFunctional::quartic(nondim(), -0.5), 1.0);
        cfg.tol_residual = 1e-10;
        let g = Grid3::cube(7, 0.5).unwrap();
        let boundary = smooth_field(g, 0.6);
        let rot = rotation(&normalize3(&[1.0, -2.0, 0.5]), 0.9);
        let rotated = boundary.map(|q| q.conjugated(&rot));
        let (a, ra) = minimize_multistart(&boundary, &cfg).unwrap();
        let (b, rb) = minimize_multistart(&rotated, &cfg).unwrap();
        assert!(ra.converged && rb.converged);
        assert!((ra.final_energy - rb.final_energy).abs() <= 1e-10 * ra.final_energy.abs());
        for (qa, qb) in a.values.iter().zip(&b.values) {
            assert!((qa.conjugated(&rot) - *qb).norm() < 1e-8);
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let mut cfg = SolverConfig::new(BulkFunctional::quartic(nondim(), -0.5), 1.0);
        cfg.restarts = 2;
        cfg.seed = 7;
        cfg.max_iters = 300;
        let boundary = smooth_field(Grid3::new(9, 7, 8, 0.5, 0.5, 0.5).unwrap(), 0.6);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| minimize_multistart(&boundary, &cfg).unwrap())
        };
        let (f1, r1) = run(1);
        let (f4, r4) = run(4);
        assert_eq!(r1, r4);
        assert!(f1.values.iter().zip(&f4.values).all(|(a, b)| a.0.map(f64::to_bits) == b.0.map(f64::to_bits)));
        assert_eq!(r1.seed, Some(7 + r1.restart as u64));
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = SolverConfig::new(BulkFunctional::quartic(nondim(), 0.0), 1.0);
        cfg.tol_residual = 0.0;
        let start = Field::constant(Grid3::cube(3, 1.0).unwrap(), QTensor::ZERO);
        assert!(matches!(minimize(&start, &cfg), Err(SolverError::Config(_))));
    }

    #[test]
    fn harmonic_extension_of_linear_data_is_linear() {
        let g = Grid3::new(6, 5, 7, 0.5, 0.4, 0.3).unwrap();
        let exact = Field::from_fn(g, |i, j, k| {
            let [x, y, z] = g.position(i, j, k);
            x - 2.0 * y + 0.5 * z + 1.0
        });
        let ext = harmonic_extension(&exact);
        for (a, b) in ext.values.iter().zip(&exact.values) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
