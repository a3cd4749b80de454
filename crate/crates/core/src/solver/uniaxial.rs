//! Restriction to `Q = s(x) (n⊗n − I/3)` with a constant director `n`.
//!
//! Since `|n⊗n − I/3|² = 2/3`, the energy becomes the scalar problem
//! `(2/3) L |∇s|² + f_B(s (n⊗n − I/3))`.

use serde::Serialize;

use super::flow::{run_flow, LocalEnergy};
use super::lattice::ScalarField;
use super::{harmonic_extension, SolveReport, SolverConfig, SolverError};
use crate::bulk::BulkFunctional;
use crate::qtensor::{norm3, normalize3, QTensor, Vec3};

pub struct UniaxialEnergy<'a> {
    pub functional: &'a BulkFunctional,
    pub shape: QTensor,
    pub elastic_l: f64,
}

impl<'a> UniaxialEnergy<'a> {
    pub fn new(functional: &'a BulkFunctional, director: &Vec3, elastic_l: f64) -> Self {
        UniaxialEnergy { functional, shape: QTensor::uniaxial_unit(&normalize3(director)), elastic_l }
    }
}

impl LocalEnergy<f64> for UniaxialEnergy<'_> {
    fn density(&self, s: &f64) -> f64 {
        self.functional.density(&(self.shape * *s))
    }
    fn gradient(&self, s: &f64) -> f64 {
        self.functional.gradient(&(self.shape * *s)).dot(&self.shape)
    }
    fn stiffness(&self) -> f64 {
        2.0 / 3.0 * self.elastic_l
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniaxialReport {
    pub solve: SolveReport,
    /// Boundary data strictly inside `(0, min{s₊, 1})`.
    pub hypothesis_met: bool,
    pub s_plus: Option<f64>,
    pub min_s: f64,
    pub max_s: f64,
}

/// Minimizes over scalar fields with the boundary values of `s_boundary`,
/// starting from their harmonic extension.
pub fn minimize_uniaxial_fixed_director(
    s_boundary: &ScalarField,
    director: &Vec3,
    cfg: &SolverConfig,
) -> Result<(ScalarField, UniaxialReport), SolverError> {
    cfg.validate()?;
    if norm3(director).is_nan() || norm3(director) <= 0.0 {
        return Err(SolverError::Config("director must be nonzero".into()));
    }
    let s_plus = cfg.functional.landau().and_then(|l| l.s_plus());
    let upper = s_plus.map(|s| s.min(1.0));
    let grid = s_boundary.grid;
    let hypothesis_met = upper.is_some_and(|up| {
        s_boundary
            .values
            .iter()
            .enumerate()
            .filter(|(idx, _)| grid.is_boundary_index(*idx))
            .all(|(_, &s)| s > 0.0 && s < up)
    });

    let energy = UniaxialEnergy::new(&cfg.functional, director, cfg.elastic_l);
    let start = harmonic_extension(s_boundary);
    let (field, solve) = run_flow(&start, &energy, &cfg.flow_options())?;
    let min_s = field.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max_s = field.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((field, UniaxialReport { solve, hypothesis_met, s_plus, min_s, max_s }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bulk::Material;
    use crate::solver::lattice::{Field, Grid3};
    use crate::solver::discrete_energy;

    fn nondim() -> Material {
        Material::new(1.0, 6.0, 2.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn scalar_energy_matches_tensor_energy() {
        let fun = BulkFunctional::quartic(nondim(), -0.5);
        let n = normalize3(&[1.0, 2.0, 2.0]);
        let cfg = SolverConfig::new(fun.clone(), 0.8);
        let g = Grid3::new(5, 6, 4, 0.3, 0.4, 0.5).unwrap();
        let s = Field::from_fn(g, |i, j, k| 0.1 * i as f64 - 0.05 * j as f64 + 0.02 * (k * k) as f64);
        let q = s.map(|&v| QTensor::uniaxial(v, &n));
        let es = crate::solver::evaluate(&s, &UniaxialEnergy::new(&fun, &n, 0.8)).energy;
        let eq = discrete_energy(&q, &cfg);
        assert!((es - eq).abs() <= 1e-12 * eq.abs());
    }

    #[test]
    fn scalar_gradient_is_slice_derivative() {
        let fun = BulkFunctional::quartic(nondim(), -0.5);
        let l = fun.landau().unwrap();
        let e = UniaxialEnergy::new(&fun, &[0.0, 1.0, 0.0], 1.0);
        for k in 0..20 {
            let s = -0.4 + 0.1 * k as f64;
            assert!((e.gradient(&s) - l.uniaxial_derivative(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_s_plus_is_fixed() {
        let fun = BulkFunctional::quartic(nondim(), -0.5);
        let s_plus = fun.landau().unwrap().s_plus().unwrap();
        let cfg = SolverConfig::new(fun, 1.0);
        let boundary = Field::constant(Grid3::cube(7, 0.5).unwrap(), s_plus);
        let (field, report) = minimize_uniaxial_fixed_director(&boundary, &[0.0, 0.0, 1.0], &cfg).unwrap();
        assert!(report.solve.converged);
        assert!(!report.hypothesis_met);
        assert!(field.values.iter().all(|&s| (s - s_plus).abs() < 1e-12));
    }

    #[test]
    fn scalar_solution_in_lemma_range() {
        let fun = BulkFunctional::quartic(nondim(), -0.5);
        let s_plus = fun.landau().unwrap().s_plus().unwrap();
        let cfg = SolverConfig::new(fun, 1.0);
        let g = Grid3::cube(9, 0.5).unwrap();
        let up = s_plus.min(1.0);
        let boundary = Field::from_fn(g, |i, _, _| up * (0.2 + 0.4 * i as f64 / 8.0));
        let (_, report) = minimize_uniaxial_fixed_director(&boundary, &[1.0, 0.0, 0.0], &cfg).unwrap();
        assert!(report.solve.converged);
        assert!(report.hypothesis_met);
        assert!(report.min_s >= -1e-6);
        assert!(report.max_s <= s_plus * (1.0 + 1e-3));
    }

    #[test]
    fn zero_director_rejected() {
        let cfg = SolverConfig::new(BulkFunctional::quartic(nondim(), -0.5), 1.0);
        let boundary = Field::constant(Grid3::cube(3, 1.0).unwrap(), 0.1);
        assert!(minimize_uniaxial_fixed_director(&boundary, &[0.0; 3], &cfg).is_err());
    }
}
