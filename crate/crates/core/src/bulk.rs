//! Bulk energy densities and the scalar analysis of their stationary points.
//!
//! Temperatures are in °C. Only the difference `T − T*` enters, through the
//! linear law `a(T) = α (T − T*)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::Polynomial;
use crate::qtensor::{IsoTriangle, QTensor, INV_SQRT6};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BulkError {
    #[error("invalid material: {0}")]
    Material(String),
    #[error("invalid polynomial bulk energy: {0}")]
    Polynomial(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("outside the domain of the formula: {0}")]
    Domain(String),
}

/// Landau–de Gennes material constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// J/(m³·°C)
    pub alpha: f64,
    /// J/m³
    pub b: f64,
    /// J/m³
    pub c: f64,
    /// °C
    pub t_star: f64,
    /// J/m
    pub elastic_l: f64,
}

impl Material {
    /// MBBA. The elastic constant is a representative nematic value.
    pub const MBBA: Material = Material { alpha: 0.42e3, b: 0.64e4, c: 0.35e4, t_star: 45.0, elastic_l: 1e-11 };

    pub fn mbba() -> Self {
        Self::MBBA
    }

    pub fn new(alpha: f64, b: f64, c: f64, t_star: f64, elastic_l: f64) -> Result<Self, BulkError> {
        let m = Material { alpha, b, c, t_star, elastic_l };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), BulkError> {
        let named = [("alpha", self.alpha), ("b", self.b), ("c", self.c), ("elastic_l", self.elastic_l)];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(BulkError::Material(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.t_star.is_finite() {
            return Err(BulkError::Material(format!("t_star must be finite, got {}", self.t_star)));
        }
        Ok(())
    }

    pub fn a_at(&self, t: f64) -> f64 {
        a_of_temperature(self, t)
    }

    pub fn landau(&self, t: f64) -> Landau {
        Landau { a: self.a_at(t), b: self.b, c: self.c }
    }

    /// Temperature at which `a` takes the given value.
    pub fn temperature_for_a(&self, a: f64) -> f64 {
        self.t_star + a / self.alpha
    }

    /// `√(L/α)`, the correlation length at one degree above `T*`.
    pub fn correlation_length(&self) -> f64 {
        (self.elastic_l / self.alpha).sqrt()
    }
}

pub fn a_of_temperature(m: &Material, t: f64) -> f64 {
    m.alpha * (t - m.t_star)
}

/// Quartic coefficients at a fixed temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Landau {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Landau {
    pub fn density(&self, q: &QTensor) -> f64 {
        let tr2 = q.norm2();
        0.5 * self.a * tr2 - self.b / 3.0 * q.tr3() + 0.25 * self.c * tr2 * tr2
    }

    pub fn gradient(&self, q: &QTensor) -> QTensor {
        let tr2 = q.norm2();
        *q * (self.a + self.c * tr2) - q.square_traceless() * self.b
    }

    /// Density along the uniaxial slice `Q = s (n⊗n − I/3)`.
    pub fn uniaxial_density(&self, s: f64) -> f64 {
        let s2 = s * s;
        self.a * s2 / 3.0 - 2.0 * self.b * s2 * s / 27.0 + self.c * s2 * s2 / 9.0
    }

    pub fn uniaxial_derivative(&self, s: f64) -> f64 {
        (18.0 * self.a * s - 6.0 * self.b * s * s + 12.0 * self.c * s * s * s) / 27.0
    }

    pub fn superheating_a(&self) -> f64 {
        self.b * self.b / (24.0 * self.c)
    }

    pub fn transition_a(&self) -> f64 {
        self.b * self.b / (27.0 * self.c)
    }

    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 24.0 * self.a * self.c
    }

    pub fn s_plus(&self) -> Option<f64> {
        self.nematic_roots().map(|(p, _)| p)
    }

    pub fn s_minus(&self) -> Option<f64> {
        self.nematic_roots().map(|(_, m)| m)
    }

    fn nematic_roots(&self) -> Option<(f64, f64)> {
        if self.a > self.superheating_a() {
            return None;
        }
        let root = self.discriminant().max(0.0).sqrt();
        Some(((self.b + root) / (4.0 * self.c), (self.b - root) / (4.0 * self.c)))
    }

    /// `(s²/54)(9a − b s)`, the density at a stationary `s`.
    pub fn stationary_value(&self, s: f64) -> f64 {
        s * s / 54.0 * (9.0 * self.a - self.b * s)
    }
}

/// One monomial `coeff · (tr Q²)^m (tr Q³)^p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub m: u32,
    pub p: u32,
    pub coeff: f64,
}

impl PolyTerm {
    pub fn degree(&self) -> u32 {
        2 * self.m + 3 * self.p
    }
}

/// `a₂ trQ² − a₃ trQ³ + a₄ (trQ²)² + Σ a_{m,p} (trQ²)^m (trQ³)^p`
/// with every extra term of degree between 5 and `degree`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolynomialBulk {
    a2: f64,
    a3: f64,
    a4: f64,
    degree: u32,
    terms: Vec<PolyTerm>,
}

impl PolynomialBulk {
    pub fn new(a2: f64, a3: f64, a4: f64, degree: u32, terms: Vec<PolyTerm>) -> Result<Self, BulkError> {
        let bad = |msg: String| Err(BulkError::Polynomial(msg));
        if degree < 4 || !degree.is_multiple_of(2) {
            return bad(format!("degree must be even and at least 4, got {degree}"));
        }
        for (name, v) in [("a2", a2), ("a3", a3), ("a4", a4)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if a3 <= 0.0 || a4 <= 0.0 {
            return bad(format!("a3 and a4 must be positive, got a3 = {a3}, a4 = {a4}"));
        }
        for (idx, t) in terms.iter().enumerate() {
            if !t.coeff.is_finite() {
                return bad(format!("term {idx} has a non-finite coefficient"));
            }
            if t.degree() < 5 || t.degree() > degree {
                return bad(format!(
                    "term (m = {}, p = {}) has degree {}, allowed range is 5..={degree}",
                    t.m,
                    t.p,
                    t.degree()
                ));
            }
            if terms[..idx].iter().any(|u| u.m == t.m && u.p == t.p) {
                return bad(format!("term (m = {}, p = {}) listed twice", t.m, t.p));
            }
        }
        let bulk = PolynomialBulk { a2, a3, a4, degree, terms };
        let (lead, mixed) = bulk.top_degree_split();
        if lead <= mixed {
            return bad(format!(
                "leading coefficient {lead} of (trQ²)^{} must exceed the sum {mixed} of |a_mp| over top-degree mixed terms",
                degree / 2
            ));
        }
        Ok(bulk)
    }

    /// The quartic `(a/2)trQ² − (b/3)trQ³ + (c/4)(trQ²)²`.
    pub fn from_landau(l: &Landau) -> Result<Self, BulkError> {
        Self::new(0.5 * l.a, l.b / 3.0, 0.25 * l.c, 4, Vec::new())
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }
    pub fn a3(&self) -> f64 {
        self.a3
    }
    pub fn a4(&self) -> f64 {
        self.a4
    }
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn terms(&self) -> &[PolyTerm] {
        &self.terms
    }

    /// Same energy with a new temperature-dependent quadratic coefficient.
    pub fn with_a2(&self, a2: f64) -> Self {
        PolynomialBulk { a2, ..self.clone() }
    }

    /// `(a_{n/2,0}, Σ_{p≥1} |a_{m,p}|)` over the terms of top degree.
    fn top_degree_split(&self) -> (f64, f64) {
        let mut lead = if self.degree == 4 { self.a4 } else { 0.0 };
        let mut mixed = 0.0;
        for t in self.terms.iter().filter(|t| t.degree() == self.degree) {
            if t.p == 0 {
                lead += t.coeff;
            } else {
                mixed += t.coeff.abs();
            }
        }
        (lead, mixed)
    }

    pub fn density(&self, q: &QTensor) -> f64 {
        let tr2 = q.norm2();
        let tr3 = q.tr3();
        let mut f = self.a2 * tr2 - self.a3 * tr3 + self.a4 * tr2 * tr2;
        for t in &self.terms {
            f += t.coeff * tr2.powi(t.m as i32) * tr3.powi(t.p as i32);
        }
        f
    }

    pub fn gradient(&self, q: &QTensor) -> QTensor {
        let tr2 = q.norm2();
        let tr3 = q.tr3();
        // f = g(tr2, tr3); ∇f = 2 g₂ Q + 3 g₃ proj(Q²)
        let mut g2 = self.a2 + 2.0 * self.a4 * tr2;
        let mut g3 = -self.a3;
        for t in &self.terms {
            if t.m > 0 {
                g2 += t.coeff * t.m as f64 * tr2.powi(t.m as i32 - 1) * tr3.powi(t.p as i32);
            }
            if t.p > 0 {
                g3 += t.coeff * t.p as f64 * tr2.powi(t.m as i32) * tr3.powi(t.p as i32 - 1);
            }
        }
        *q * (2.0 * g2) + q.square_traceless() * (3.0 * g3)
    }

    /// Lower bound `K(u) ≤ ⟨∇f(Q), Q⟩` for `|Q| = u`, as a polynomial in `u`.
    pub fn k_polynomial(&self) -> Polynomial {
        let n = self.degree as usize;
        let mut k = vec![0.0; n + 1];
        k[2] += 2.0 * self.a2;
        k[3] -= 3.0 * self.a3 * INV_SQRT6;
        k[4] += 4.0 * self.a4;
        for t in &self.terms {
            let d = t.degree() as usize;
            if t.p == 0 {
                k[d] += d as f64 * t.coeff;
            } else {
                k[d] -= d as f64 * t.coeff.abs() * INV_SQRT6.powi(t.p as i32);
            }
        }
        Polynomial::new(k)
    }

    /// Largest positive root of `K`, or 0 when `K > 0` on `u > 0`.
    pub fn bound_c(&self) -> f64 {
        let k = self.k_polynomial();
        let reduced = Polynomial::new(k.coeffs()[2..].to_vec());
        if reduced.degree() == 0 {
            return 0.0;
        }
        let hi = reduced.cauchy_bound();
        reduced.real_roots_in(0.0, hi).into_iter().filter(|&u| u > 0.0).fold(0.0, f64::max)
    }
}

pub fn poly_bound_c(p: &PolynomialBulk) -> f64 {
    p.bound_c()
}

/// A bulk energy density, with temperature already fixed.
#[derive(Clone, Debug, PartialEq)]
pub enum BulkFunctional {
    Quartic { material: Material, temperature: f64 },
    Polynomial(PolynomialBulk),
    GlPenalized { material: Material, temperature: f64, eps: f64 },
}

impl BulkFunctional {
    pub fn quartic(material: Material, temperature: f64) -> Self {
        BulkFunctional::Quartic { material, temperature }
    }

    pub fn gl(material: Material, temperature: f64, eps: f64) -> Result<Self, BulkError> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(BulkError::Parameter(format!("eps must be positive, got {eps}")));
        }
        Ok(BulkFunctional::GlPenalized { material, temperature, eps })
    }

    /// Quartic coefficients, for the variants that carry them.
    pub fn landau(&self) -> Option<Landau> {
        match self {
            BulkFunctional::Quartic { material, temperature }
            | BulkFunctional::GlPenalized { material, temperature, .. } => Some(material.landau(*temperature)),
            BulkFunctional::Polynomial(_) => None,
        }
    }

    pub fn density(&self, q: &QTensor) -> f64 {
        match self {
            BulkFunctional::Quartic { material, temperature } => material.landau(*temperature).density(q),
            BulkFunctional::Polynomial(p) => p.density(q),
            BulkFunctional::GlPenalized { material, temperature, eps } => {
                material.landau(*temperature).density(q) + gl_penalty(q, *eps)
            }
        }
    }

    pub fn gradient(&self, q: &QTensor) -> QTensor {
        match self {
            BulkFunctional::Quartic { material, temperature } => material.landau(*temperature).gradient(q),
            BulkFunctional::Polynomial(p) => p.gradient(q),
            BulkFunctional::GlPenalized { material, temperature, eps } => {
                material.landau(*temperature).gradient(q) + gl_penalty_gradient(q, *eps)
            }
        }
    }
}

pub fn f_bulk(fun: &BulkFunctional, q: &QTensor) -> f64 {
    fun.density(q)
}

pub fn bulk_gradient(fun: &BulkFunctional, q: &QTensor) -> QTensor {
    fun.gradient(q)
}

const GL_THRESHOLD: f64 = 1.0 / 6.0;

/// `(1/ε²)(|Q|² − 1/6)²` outside the ball `|Q| ≤ 1/√6`, zero inside.
pub fn gl_penalty(q: &QTensor, eps: f64) -> f64 {
    let excess = q.norm2() - GL_THRESHOLD;
    if excess <= 0.0 {
        0.0
    } else {
        excess * excess / (eps * eps)
    }
}

pub fn gl_penalty_gradient(q: &QTensor, eps: f64) -> QTensor {
    let excess = q.norm2() - GL_THRESHOLD;
    if excess <= 0.0 {
        QTensor::ZERO
    } else {
        *q * (4.0 * excess / (eps * eps))
    }
}

/// Norm bound on minimizers of the penalized energy, field-independent part.
pub fn gl_bound(m: &Material, t: f64, eps: f64) -> Result<f64, BulkError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(BulkError::Parameter(format!("eps must be positive, got {eps}")));
    }
    let Landau { a, b, c } = m.landau(t);
    let e2 = eps * eps;
    let radicand = 64.0 + 16.0 * e2 * (c - 6.0 * a) + e2 * e2 * (b * b - 24.0 * a * c);
    if radicand < 0.0 {
        return Err(BulkError::Domain(format!("negative radicand {radicand} at eps = {eps}, T = {t}")));
    }
    let denom = 6f64.sqrt() * (8.0 + 2.0 * e2 * c);
    Ok(INV_SQRT6.max((b * e2 + radicand.sqrt()) / denom))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StationaryReport {
    pub s_zero_value: f64,
    pub s_plus: Option<f64>,
    pub s_minus: Option<f64>,
    pub f_at_plus: Option<f64>,
    pub f_at_minus: Option<f64>,
    pub global_min_is_nematic: bool,
}

pub fn stationary_scalars(m: &Material, t: f64) -> StationaryReport {
    let l = m.landau(t);
    let s_plus = l.s_plus();
    let s_minus = l.s_minus();
    let f_at_plus = s_plus.map(|s| l.stationary_value(s));
    StationaryReport {
        s_zero_value: 0.0,
        s_plus,
        s_minus,
        f_at_plus,
        f_at_minus: s_minus.map(|s| l.stationary_value(s)),
        global_min_is_nematic: f_at_plus.is_some_and(|f| f < 0.0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CharacteristicTemperatures {
    pub t_star: f64,
    pub t_ni: f64,
    pub t_superheat: f64,
    /// Temperatures where `0 ≤ s₊ ≤ 1`.
    pub physical_window: (f64, f64),
}

pub fn characteristic_temperatures(m: &Material) -> CharacteristicTemperatures {
    let l = m.landau(m.t_star);
    CharacteristicTemperatures {
        t_star: m.t_star,
        t_ni: m.temperature_for_a(l.transition_a()),
        t_superheat: m.temperature_for_a(l.superheating_a()),
        physical_window: (m.temperature_for_a((m.b - 2.0 * m.c) / 3.0), m.temperature_for_a(l.superheating_a())),
    }
}

/// Convex hull of the bulk stationary points in the `(s, r)` plane.
pub fn bulk_triangle(m: &Material, t: f64) -> Result<IsoTriangle, BulkError> {
    let l = m.landau(t);
    if l.a < -m.alpha * m.t_star {
        return Err(BulkError::Domain(format!("temperature {t} is below the absolute-zero equivalent")));
    }
    let scale = if l.a > l.superheating_a() {
        0.0
    } else if l.a < -l.b * l.b / (3.0 * l.c) {
        2.0 * l.s_minus().unwrap().abs()
    } else {
        l.s_plus().unwrap()
    };
    Ok(IsoTriangle::new(scale))
}
