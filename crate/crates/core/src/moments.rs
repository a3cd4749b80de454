//! Second moments of orientation distributions on the unit sphere.
//!
//! A distribution is represented by its values at the nodes of a product
//! quadrature: Gauss–Legendre in `cos θ` times a uniform, half-offset grid in
//! `φ`. The node set is closed under `p ↦ −p`.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::qtensor::{in_physical_triangle, QTensor, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentsError {
    #[error("quadrature level must be at least 1, got {0}")]
    Level(usize),
    #[error("expected {expected} density values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("density value {value} at node {index} is negative")]
    Negative { index: usize, value: f64 },
    #[error("density value at node {0} is not finite")]
    NonFinite(usize),
    #[error("density has zero total mass")]
    ZeroMass,
    #[error("density is not normalized: total mass {0}")]
    Normalization(f64),
    #[error("no samples given")]
    NoSamples,
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphericalQuadrature {
    pub level: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub nodes: Vec<Vec3>,
    pub weights: Vec<f64>,
    /// `antipode[i]` is the index of `−nodes[i]`.
    pub antipode: Vec<usize>,
}

impl SphericalQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(&Vec3) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    /// Polar and azimuthal angles of node `i`.
    pub fn angles(&self, i: usize) -> (f64, f64) {
        let p = self.nodes[i];
        (p[2].clamp(-1.0, 1.0).acos(), p[1].atan2(p[0]).rem_euclid(2.0 * PI))
    }
}

/// `4·level` polar nodes and `8·level` azimuthal nodes.
pub fn build_quadrature(level: usize) -> Result<SphericalQuadrature, MomentsError> {
    if level == 0 {
        return Err(MomentsError::Level(level));
    }
    let n_theta = 4 * level;
    let n_phi = 8 * level;
    let (x, w) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    let mut antipode = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let z = x[i];
        let rho = (1.0 - z * z).max(0.0).sqrt();
        for k in 0..n_phi {
            let phi = (k as f64 + 0.5) * dphi;
            nodes.push([rho * phi.cos(), rho * phi.sin(), z]);
            weights.push(w[i] * dphi);
            antipode.push((n_theta - 1 - i) * n_phi + (k + n_phi / 2) % n_phi);
        }
    }
    // make the antipodal pairing exact in floating point
    for i in 0..nodes.len() {
        let j = antipode[i];
        if i < j {
            let p = nodes[i];
            let q = nodes[j];
            let avg = [0.5 * (p[0] - q[0]), 0.5 * (p[1] - q[1]), 0.5 * (p[2] - q[2])];
            nodes[i] = avg;
            nodes[j] = [-avg[0], -avg[1], -avg[2]];
        }
    }
    Ok(SphericalQuadrature { level, n_theta, n_phi, nodes, weights, antipode })
}

/// Nonnegative, antipodally symmetric nodal density with `Σ wᵢ ψᵢ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub values: Vec<f64>,
}

impl Distribution {
    /// Symmetrizes and normalizes `values`.
    pub fn new(values: Vec<f64>, quad: &SphericalQuadrature) -> Result<Self, MomentsError> {
        if values.len() != quad.len() {
            return Err(MomentsError::Length { expected: quad.len(), got: values.len() });
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(MomentsError::NonFinite(index));
            }
            if value < 0.0 {
                return Err(MomentsError::Negative { index, value });
            }
        }
        let sym: Vec<f64> = (0..values.len()).map(|i| 0.5 * (values[i] + values[quad.antipode[i]])).collect();
        let mass: f64 = sym.iter().zip(&quad.weights).map(|(v, w)| v * w).sum();
        if mass <= 0.0 {
            return Err(MomentsError::ZeroMass);
        }
        Ok(Distribution { values: sym.into_iter().map(|v| v / mass).collect() })
    }

    pub fn from_fn<F: Fn(&Vec3) -> f64>(quad: &SphericalQuadrature, f: F) -> Result<Self, MomentsError> {
        Self::new(quad.nodes.iter().map(f).collect(), quad)
    }

    pub fn uniform(quad: &SphericalQuadrature) -> Self {
        Distribution { values: vec![1.0 / (4.0 * PI); quad.len()] }
    }

    /// `∝ exp(κ (p·e)²)`, a bump pair at `±e`.
    pub fn watson(quad: &SphericalQuadrature, axis: &Vec3, kappa: f64) -> Result<Self, MomentsError> {
        let e = crate::qtensor::normalize3(axis);
        Self::from_fn(quad, |p| {
            let c = crate::qtensor::dot3(p, &e);
            (kappa * (c * c - 1.0)).exp()
        })
    }

    /// `∝ exp(−κ (p·ẑ)²)`, concentrated on the equator for large `κ`.
    pub fn equator_band(quad: &SphericalQuadrature, kappa: f64) -> Result<Self, MomentsError> {
        Self::from_fn(quad, |p| (-kappa * p[2] * p[2]).exp())
    }

    /// Nearest-node assignment of scattered `(θ, φ, value)` samples.
    pub fn from_samples(quad: &SphericalQuadrature, samples: &[(f64, f64, f64)]) -> Result<Self, MomentsError> {
        if samples.is_empty() {
            return Err(MomentsError::NoSamples);
        }
        let dirs: Vec<Vec3> = samples
            .iter()
            .map(|&(theta, phi, _)| [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
            .collect();
        let values = quad
            .nodes
            .iter()
            .map(|p| {
                let mut best = (f64::NEG_INFINITY, 0);
                for (idx, d) in dirs.iter().enumerate() {
                    let c = crate::qtensor::dot3(p, d);
                    if c > best.0 {
                        best = (c, idx);
                    }
                }
                samples[best.1].2
            })
            .collect();
        Self::new(values, quad)
    }

    pub fn mass(&self, quad: &SphericalQuadrature) -> f64 {
        self.values.iter().zip(&quad.weights).map(|(v, w)| v * w).sum()
    }
}

/// `Q = Σ wᵢ ψᵢ (pᵢ⊗pᵢ − I/3)`.
pub fn q_from_psi(psi: &Distribution, quad: &SphericalQuadrature) -> Result<QTensor, MomentsError> {
    if psi.values.len() != quad.len() {
        return Err(MomentsError::Length { expected: quad.len(), got: psi.values.len() });
    }
    let mass = psi.mass(quad);
    if (mass - 1.0).abs() > 1e-8 {
        return Err(MomentsError::Normalization(mass));
    }
    let mut m = [[0.0; 3]; 3];
    for ((p, w), v) in quad.nodes.iter().zip(&quad.weights).zip(&psi.values) {
        let wv = w * v;
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += wv * p[a] * p[b];
            }
        }
    }
    for (d, row) in m.iter_mut().enumerate() {
        row[d] -= mass / 3.0;
    }
    Ok(QTensor::from_matrix(&m))
}

/// Eigenvalues within `[−1/3 − tol, 2/3 + tol]`.
pub fn audit_eigen_bounds(q: &QTensor, tol: f64) -> bool {
    in_physical_triangle(q, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentSummary {
    pub coefficients: [f64; 5],
    pub eigenvalues: [f64; 3],
    pub s: f64,
    pub r: f64,
    pub in_physical_triangle: bool,
}

pub fn summarize(q: &QTensor) -> MomentSummary {
    let eig = crate::qtensor::eigensystem(q);
    let op = crate::qtensor::order_params(q);
    MomentSummary {
        coefficients: q.0,
        eigenvalues: eig.values,
        s: op.s,
        r: op.r,
        in_physical_triangle: audit_eigen_bounds(q, 1e-8),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qtensor::{eigensystem, make_biaxial, normalize3, rotation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1, 2, 3, 4, 7, 16, 40] {
            let (x, w) = gauss_legendre(n);
            for d in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let want = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "n = {n}, degree {d}");
            }
        }
    }

    #[test]
    fn quadrature_invariants() {
        for level in 1..=6 {
            let q = build_quadrature(level).unwrap();
            let total: f64 = q.weights.iter().sum();
            assert!((total - 4.0 * PI).abs() < 1e-10);
            for (i, &j) in q.antipode.iter().enumerate() {
                let (p, m) = (q.nodes[i], q.nodes[j]);
                assert_eq!([p[0], p[1], p[2]], [-m[0], -m[1], -m[2]]);
                assert_eq!(q.weights[i], q.weights[j]);
                assert_eq!(q.antipode[j], i);
            }
            for a in 0..3 {
                for b in 0..3 {
                    let got = q.integrate(|p| p[a] * p[b]);
                    let want = if a == b { 4.0 * PI / 3.0 } else { 0.0 };
                    assert!((got - want).abs() < 1e-12);
                }
            }
        }
        assert!(build_quadrature(0).is_err());
    }

    #[test]
    fn fourth_moment_at_level_eight() {
        let q = build_quadrature(8).unwrap();
        assert!((q.integrate(|p| p[2].powi(4)) - 4.0 * PI / 5.0).abs() < 1e-10);
    }

    #[test]
    fn isotropic_density_has_zero_q() {
        let quad = build_quadrature(4).unwrap();
        let q = q_from_psi(&Distribution::uniform(&quad), &quad).unwrap();
        assert!(q.norm() < 1e-10);
    }

    #[test]
    fn concentrated_bumps_approach_perfect_order() {
        let quad = build_quadrature(16).unwrap();
        let mut prev = 0.0;
        for kappa in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0] {
            let psi = Distribution::watson(&quad, &[0.0, 0.0, 1.0], kappa).unwrap();
            let lmax = eigensystem(&q_from_psi(&psi, &quad).unwrap()).values[0];
            assert!(lmax > prev && lmax < 2.0 / 3.0);
            prev = lmax;
        }
        assert!(prev > 2.0 / 3.0 - 0.01);
    }

    #[test]
    fn equator_band_is_oblate() {
        let quad = build_quadrature(16).unwrap();
        let psi = Distribution::equator_band(&quad, 400.0).unwrap();
        let q = q_from_psi(&psi, &quad).unwrap();
        let zz = q.to_matrix()[2][2];
        assert!((zz + 1.0 / 3.0).abs() < 0.01);
        let op = crate::qtensor::order_params(&q);
        assert!((op.s - 0.5).abs() < 0.01 && (op.r - 0.5).abs() < 0.01);
    }

    #[test]
    fn normalization_is_checked() {
        let quad = build_quadrature(2).unwrap();
        let raw = Distribution { values: vec![1.0; quad.len()] };
        assert!(matches!(q_from_psi(&raw, &quad), Err(MomentsError::Normalization(_))));
        let mut vals = vec![1.0; quad.len()];
        vals[3] = -0.1;
        assert!(matches!(Distribution::new(vals, &quad), Err(MomentsError::Negative { index: 3, .. })));
        assert!(matches!(Distribution::new(vec![0.0; quad.len()], &quad), Err(MomentsError::ZeroMass)));
        assert!(Distribution::new(vec![1.0; 3], &quad).is_err());
    }

    #[test]
    fn symmetrization_averages_antipodes() {
        let quad = build_quadrature(2).unwrap();
        let mut vals = vec![0.0; quad.len()];
        vals[0] = 1.0;
        let psi = Distribution::new(vals, &quad).unwrap();
        assert_eq!(psi.values[0], psi.values[quad.antipode[0]]);
        assert!(psi.values[0] > 0.0);
    }

    #[test]
    fn eigen_audit_examples() {
        let q = make_biaxial(1.2, 0.0, &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!(!audit_eigen_bounds(&q, 1e-8));
        assert!(audit_eigen_bounds(&QTensor::ZERO, 0.0));
    }

    #[test]
    fn random_densities_are_physical() {
        let quad = build_quadrature(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..2000 {
            let sparse = trial % 2 == 0;
            let vals: Vec<f64> = (0..quad.len())
                .map(|_| if sparse && rng.gen_bool(0.9) { 0.0 } else { rng.gen::<f64>() })
                .collect();
            let Ok(psi) = Distribution::new(vals, &quad) else { continue };
            let q = q_from_psi(&psi, &quad).unwrap();
            assert!(audit_eigen_bounds(&q, 1e-8));
        }
    }

    #[test]
    fn linearity() {
        let quad = build_quadrature(3).unwrap();
        let p1 = Distribution::watson(&quad, &[1.0, 0.0, 0.0], 3.0).unwrap();
        let p2 = Distribution::equator_band(&quad, 2.0).unwrap();
        let (q1, q2) = (q_from_psi(&p1, &quad).unwrap(), q_from_psi(&p2, &quad).unwrap());
        for alpha in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let mix = Distribution {
                values: p1.values.iter().zip(&p2.values).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect(),
            };
            let q = q_from_psi(&mix, &quad).unwrap();
            assert!((q - (q1 * alpha + q2 * (1.0 - alpha))).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_equivariance() {
        let quad = build_quadrature(12).unwrap();
        let axis = normalize3(&[0.3, -0.2, 0.9]);
        let rot = rotation(&normalize3(&[1.0, 1.0, -0.4]), 1.1);
        let rotated_axis = crate::qtensor::matvec(&rot, &axis);
        let q = q_from_psi(&Distribution::watson(&quad, &axis, 4.0).unwrap(), &quad).unwrap();
        let qr = q_from_psi(&Distribution::watson(&quad, &rotated_axis, 4.0).unwrap(), &quad).unwrap();
        assert!((q.conjugated(&rot) - qr).norm() < 1e-9);
    }

    #[test]
    fn samples_map_to_nearest_nodes() {
        let quad = build_quadrature(2).unwrap();
        let samples = [(0.0, 0.0, 5.0), (PI / 2.0, 0.0, 1.0), (PI, 0.0, 5.0)];
        let psi = Distribution::from_samples(&quad, &samples).unwrap();
        let near_pole = quad.nodes.iter().position(|p| p[2] > 0.9).unwrap();
        let near_equator = quad.nodes.iter().position(|p| p[2].abs() < 0.3).unwrap();
        assert!(psi.values[near_pole] > psi.values[near_equator]);
        assert!(Distribution::from_samples(&quad, &[]).is_err());
    }
}
