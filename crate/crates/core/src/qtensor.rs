//! Symmetric traceless 3×3 tensors.
//!
//! A [`QTensor`] is stored as five coordinates in an orthonormal basis of the
//! space of symmetric traceless matrices, so symmetry and tracelessness hold
//! by construction and `|Q|²` is a plain sum of squares:
//!
//! ```text
//! E1 = √(3/2) (ẑ⊗ẑ − I/3)      E2 = √(1/2) (x̂⊗x̂ − ŷ⊗ŷ)
//! E3 = √2 sym(x̂⊗ŷ)            E4 = √2 sym(x̂⊗ẑ)          E5 = √2 sym(ŷ⊗ẑ)
//! ```
//!
//! The module also carries the (s, r) order-parameter plane: the canonical
//! pair from sorted eigenvalues, the three-region partition used by the norm
//! sandwich, and the family of isosceles triangles `T_η` with vertices
//! `(η, 0), (0, η), (−η, −η)`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;
pub const INV_SQRT6: f64 = 0.408_248_290_463_863_f64;

/// Tolerance on unit length and orthogonality of a director frame.
pub const FRAME_TOL: f64 = 1e-12;

/// Lower and upper eigenvalue limits of a second moment of a probability
/// distribution on the sphere.
pub const EIGEN_MIN: f64 = -1.0 / 3.0;
pub const EIGEN_MAX: f64 = 2.0 / 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QTensorError {
    #[error("director frame is not orthonormal: |e1|-1 = {e1_defect:e}, |e2|-1 = {e2_defect:e}, e1·e2 = {dot:e}")]
    Frame { e1_defect: f64, e2_defect: f64, dot: f64 },
    #[error("biaxiality parameter is undefined for the zero tensor")]
    Undefined,
}

/// Symmetric traceless 3×3 tensor in the orthonormal five-coefficient basis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QTensor(pub [f64; 5]);

impl QTensor {
    pub const ZERO: QTensor = QTensor([0.0; 5]);

    pub const fn from_coeffs(coeffs: [f64; 5]) -> Self {
        QTensor(coeffs)
    }

    pub fn coeffs(&self) -> &[f64; 5] {
        &self.0
    }

    /// Orthogonal projection of an arbitrary 3×3 matrix onto its symmetric
    /// traceless part.
    pub fn from_matrix(m: &Mat3) -> Self {
        let tr = m[0][0] + m[1][1] + m[2][2];
        QTensor([
            (1.5f64).sqrt() * (m[2][2] - tr / 3.0),
            INV_SQRT2 * (m[0][0] - m[1][1]),
            INV_SQRT2 * (m[0][1] + m[1][0]),
            INV_SQRT2 * (m[0][2] + m[2][0]),
            INV_SQRT2 * (m[1][2] + m[2][1]),
        ])
    }

    pub fn to_matrix(&self) -> Mat3 {
        let [c1, c2, c3, c4, c5] = self.0;
        let xx = -c1 * INV_SQRT6 + c2 * INV_SQRT2;
        let yy = -c1 * INV_SQRT6 - c2 * INV_SQRT2;
        let zz = 2.0 * c1 * INV_SQRT6;
        let xy = c3 * INV_SQRT2;
        let xz = c4 * INV_SQRT2;
        let yz = c5 * INV_SQRT2;
        [[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]]
    }

    /// `n⊗n − I/3`.
    pub fn uniaxial_unit(n: &Vec3) -> Self {
        let mut m = outer(n, n);
        for (d, row) in m.iter_mut().enumerate() {
            row[d] -= 1.0 / 3.0;
        }
        QTensor::from_matrix(&m)
    }

    /// `s (n⊗n − I/3)` for a unit vector `n`.
    pub fn uniaxial(s: f64, n: &Vec3) -> Self {
        QTensor::uniaxial_unit(n) * s
    }

    pub fn dot(&self, other: &QTensor) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// `|Q|² = Q_{αβ}Q_{αβ} = tr Q²`.
    pub fn norm2(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    /// `tr Q³`, evaluated as `3 det Q` (exact identity for traceless Q).
    pub fn tr3(&self) -> f64 {
        3.0 * det(&self.to_matrix())
    }

    /// Traceless part of `Q²`, i.e. `Q² − (tr Q²/3) I`.
    pub fn square_traceless(&self) -> QTensor {
        let m = self.to_matrix();
        QTensor::from_matrix(&matmul(&m, &m))
    }

    /// `R Q Rᵀ`.
    pub fn conjugated(&self, rot: &Mat3) -> QTensor {
        let m = self.to_matrix();
        let rm = matmul(rot, &m);
        QTensor::from_matrix(&matmul(&rm, &transpose(rot)))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl Add for QTensor {
    type Output = QTensor;
    fn add(mut self, rhs: QTensor) -> QTensor {
        self += rhs;
        self
    }
}

impl AddAssign for QTensor {
    fn add_assign(&mut self, rhs: QTensor) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

impl Sub for QTensor {
    type Output = QTensor;
    fn sub(mut self, rhs: QTensor) -> QTensor {
        self -= rhs;
        self
    }
}

impl SubAssign for QTensor {
    fn sub_assign(&mut self, rhs: QTensor) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
    }
}

impl Mul<f64> for QTensor {
    type Output = QTensor;
    fn mul(mut self, rhs: f64) -> QTensor {
        for a in self.0.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl Neg for QTensor {
    type Output = QTensor;
    fn neg(self) -> QTensor {
        self * -1.0
    }
}

/// `s (e1⊗e1 − I/3) + r (e2⊗e2 − I/3)`.
pub fn make_biaxial(s: f64, r: f64, e1: &Vec3, e2: &Vec3) -> Result<QTensor, QTensorError> {
    let e1_defect = norm3(e1) - 1.0;
    let e2_defect = norm3(e2) - 1.0;
    let d = dot3(e1, e2);
    if e1_defect.abs() > FRAME_TOL || e2_defect.abs() > FRAME_TOL || d.abs() > FRAME_TOL {
        return Err(QTensorError::Frame { e1_defect, e2_defect, dot: d });
    }
    Ok(QTensor::uniaxial(s, e1) + QTensor::uniaxial(r, e2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub tr2: f64,
    pub tr3: f64,
    pub norm: f64,
}

pub fn invariants(q: &QTensor) -> Invariants {
    let tr2 = q.norm2();
    Invariants { tr2, tr3: q.tr3(), norm: tr2.sqrt() }
}

/// Eigenvalues sorted descending with matching orthonormal eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenSystem {
    pub values: [f64; 3],
    pub vectors: [Vec3; 3],
}

/// Cyclic Jacobi on the 3×3 matrix, then a stable descending sort and a
/// Gram–Schmidt pass over the sorted vectors. Each vector is signed so its
/// largest-magnitude component is positive.
pub fn eigensystem(q: &QTensor) -> EigenSystem {
    let (vals, vecs) = jacobi_eigen(q.to_matrix());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap_or(std::cmp::Ordering::Equal));

    let values = [vals[order[0]], vals[order[1]], vals[order[2]]];
    let mut vectors = [vecs[order[0]], vecs[order[1]], vecs[order[2]]];
    for i in 0..3 {
        let mut v = vectors[i];
        for u in vectors.iter().take(i) {
            let p = dot3(&v, u);
            for d in 0..3 {
                v[d] -= p * u[d];
            }
        }
        let n = norm3(&v);
        for x in v.iter_mut() {
            *x /= n;
        }
        vectors[i] = canonical_sign(v);
    }
    EigenSystem { values, vectors }
}

fn canonical_sign(v: Vec3) -> Vec3 {
    let mut lead = 0;
    for d in 1..3 {
        if v[d].abs() > v[lead].abs() {
            lead = d;
        }
    }
    if v[lead] < 0.0 {
        [-v[0], -v[1], -v[2]]
    } else {
        v
    }
}

/// Returns eigenvalues and eigenvectors (as rows) of a symmetric matrix.
fn jacobi_eigen(mut a: Mat3) -> ([f64; 3], [Vec3; 3]) {
    let mut v: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for sweep in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off == 0.0 {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            let g = 100.0 * apq.abs();
            if sweep > 3 && a[p][p].abs() + g == a[p][p].abs() && a[q][q].abs() + g == a[q][q].abs() {
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = if theta.abs() > 1e150 {
                0.5 / theta
            } else {
                theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
            };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            a[p][p] -= t * apq;
            a[q][q] += t * apq;
            a[p][q] = 0.0;
            a[q][p] = 0.0;
            let r = 3 - p - q;
            let arp = a[r][p];
            let arq = a[r][q];
            a[r][p] = c * arp - s * arq;
            a[p][r] = a[r][p];
            a[r][q] = s * arp + c * arq;
            a[q][r] = a[r][q];
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let vals = [a[0][0], a[1][1], a[2][2]];
    let vecs = [
        [v[0][0], v[1][0], v[2][0]],
        [v[0][1], v[1][1], v[2][1]],
        [v[0][2], v[1][2], v[2][2]],
    ];
    (vals, vecs)
}

/// Region of the (s, r)-plane partition used by the norm sandwich.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// `s ≥ 0, r ≥ 0`
    R1,
    /// `s ≤ 0, r ≥ s`
    R2,
    /// `r ≤ 0, r ≤ s`
    R3,
}

impl Region {
    pub fn classify(s: f64, r: f64) -> Region {
        if s >= 0.0 && r >= 0.0 {
            Region::R1
        } else if s <= 0.0 && r >= s {
            Region::R2
        } else {
            Region::R3
        }
    }

    /// The linear form whose square brackets `|Q|²` in this region.
    pub fn linear_form(self, s: f64, r: f64) -> f64 {
        match self {
            Region::R1 => s + r,
            Region::R2 => r - 2.0 * s,
            Region::R3 => s - 2.0 * r,
        }
    }

    /// Lower and upper bounds `(ℓ²/6, 2ℓ²/3)` on `|Q|²` in this region.
    pub fn sandwich(self, s: f64, r: f64) -> (f64, f64) {
        let l = self.linear_form(s, r);
        (l * l / 6.0, 2.0 * l * l / 3.0)
    }
}

/// Scalar order parameters `s = λ1 − λ3`, `r = λ2 − λ3` from descending
/// eigenvalues; always lands in the cone `0 ≤ r ≤ s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderParams {
    pub s: f64,
    pub r: f64,
}

impl OrderParams {
    pub fn from_eigenvalues(lambdas: &[f64; 3]) -> Self {
        OrderParams { s: lambdas[0] - lambdas[2], r: lambdas[1] - lambdas[2] }
    }

    pub fn region(&self) -> Region {
        Region::classify(self.s, self.r)
    }

    /// Membership in the fundamental domain `0 ≤ s ≤ 1, 0 ≤ r ≤ min{s, 1−s}`.
    pub fn in_fundamental_domain(&self, tol: f64) -> bool {
        self.s >= -tol && self.s <= 1.0 + tol && self.r >= -tol && self.r <= self.s.min(1.0 - self.s) + tol
    }
}

pub fn order_params(q: &QTensor) -> OrderParams {
    OrderParams::from_eigenvalues(&eigensystem(q).values)
}

/// `β = 1 − 6 (tr Q³)² / (tr Q²)³`.
pub fn biaxiality(q: &QTensor) -> Result<f64, QTensorError> {
    let tr2 = q.norm2();
    if tr2 < f64::MIN_POSITIVE {
        return Err(QTensorError::Undefined);
    }
    let tr3 = q.tr3();
    Ok(1.0 - 6.0 * tr3 * tr3 / (tr2 * tr2 * tr2))
}

/// True iff every eigenvalue lies in `[−1/3 − tol, 2/3 + tol]`.
///
/// The comparison carries a rounding floor of a few ulps of `1 + |Q|` so
/// that states built exactly on the boundary are accepted with `tol = 0`.
pub fn in_physical_triangle(q: &QTensor, tol: f64) -> bool {
    let eig = eigensystem(q);
    let floor = 16.0 * f64::EPSILON * (1.0 + q.norm());
    let slack = tol + floor;
    eig.values.iter().all(|&l| l >= EIGEN_MIN - slack && l <= EIGEN_MAX + slack)
}

/// `|Q|² = (2/3)(s² + r² − sr)` together with the region of `(s, r)`.
pub fn norm_and_region(s: f64, r: f64) -> (f64, Region) {
    (2.0 / 3.0 * (s * s + r * r - s * r), Region::classify(s, r))
}

/// Smallest `η ≥ 0` with `(s, r) ∈ T_η`.
///
/// `T_η = {s + r ≤ η, r − 2s ≤ η, s − 2r ≤ η}`; in each region the gauge
/// coincides with that region's linear form.
pub fn triangle_gauge(s: f64, r: f64) -> f64 {
    (s + r).max(r - 2.0 * s).max(s - 2.0 * r)
}

/// Isosceles triangle `T_η` with vertices `(η, 0), (0, η), (−η, −η)`.
/// `η = 0` is the degenerate triangle at the origin; the physical triangle is
/// `T_1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoTriangle {
    pub scale: f64,
}

impl IsoTriangle {
    pub const PHYSICAL: IsoTriangle = IsoTriangle { scale: 1.0 };

    pub fn new(scale: f64) -> Self {
        IsoTriangle { scale }
    }

    pub fn vertices(&self) -> Vec<(f64, f64)> {
        let e = self.scale;
        if e == 0.0 {
            vec![(0.0, 0.0)]
        } else {
            vec![(e, 0.0), (0.0, e), (-e, -e)]
        }
    }

    pub fn contains_point(&self, s: f64, r: f64) -> bool {
        triangle_gauge(s, r) <= self.scale
    }

    /// These triangles are nested by scale.
    pub fn contains(&self, other: &IsoTriangle) -> bool {
        other.scale <= self.scale
    }
}

pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn normalize3(a: &Vec3) -> Vec3 {
    let n = norm3(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

pub fn outer(a: &Vec3, b: &Vec3) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i] * b[j];
        }
    }
    m
}

pub fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    m
}

pub fn matvec(a: &Mat3, v: &Vec3) -> Vec3 {
    [dot3(&a[0], v), dot3(&a[1], v), dot3(&a[2], v)]
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[j][i];
        }
    }
    m
}

fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Rotation matrix about a unit axis by `angle` radians (Rodrigues).
pub fn rotation(axis: &Vec3, angle: f64) -> Mat3 {
    let [x, y, z] = normalize3(axis);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}
