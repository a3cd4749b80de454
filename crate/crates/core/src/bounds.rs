//! Explicit norm bounds on minimizers, triangle containment in the `(s, r)`
//! plane, and audits of computed fields against the bounds.

use serde::Serialize;
use thiserror::Error;

use crate::bulk::{bulk_triangle, gl_bound, BulkError, BulkFunctional, Material};
use crate::qtensor::{IsoTriangle, INV_SQRT6};
use crate::solver::QField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("low-temperature bound needs a <= b^2/24c, got a = {a}, b^2/24c = {limit}")]
    Regime { a: f64, limit: f64 },
    #[error("field has no interior nodes")]
    EmptyInterior,
    #[error("field contains non-finite values")]
    NonFinite,
    #[error(transparent)]
    Bulk(#[from] BulkError),
}

/// `Γ = (b + √(b² − 24ac)) / (2√6 c) = √(2/3) s₊`.
pub fn elastic_bound_gamma(m: &Material, t: f64) -> Result<f64, BoundsError> {
    let l = m.landau(t);
    if l.a > l.superheating_a() {
        return Err(BoundsError::Regime { a: l.a, limit: l.superheating_a() });
    }
    Ok((l.b + l.discriminant().max(0.0).sqrt()) / (2.0 * 6f64.sqrt() * l.c))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriangleReport {
    pub temperature: f64,
    pub a: f64,
    pub bulk_scale: f64,
    pub bulk_vertices: Vec<(f64, f64)>,
    /// `√6 Γ = 2 s₊`; zero when `Γ` is undefined.
    pub elastic_scale: f64,
    pub elastic_vertices: Vec<(f64, f64)>,
    pub gamma: Option<f64>,
    /// The physical triangle contains the elastic triangle. A degenerate
    /// elastic triangle counts as contained.
    pub t_psi_contains_elastic: bool,
    /// The ball `|Q| ≤ Γ` contains every physically meaningful tensor.
    pub elastic_contains_t_psi: bool,
    /// `(T where s₊ = 1, T where s₊ = 1/2)`.
    pub crossing_temps: (f64, f64),
}

/// Temperature at which `s₊` reaches `target`, or the superheating
/// temperature when `s₊` stays above `target` until it disappears.
fn crossing_for(m: &Material, target: f64) -> f64 {
    let l = m.landau(m.t_star);
    // s₊ = target  ⇔  a = target (b − 2c·target) / 3
    let a = if m.b <= 4.0 * m.c * target {
        target * (m.b - 2.0 * m.c * target) / 3.0
    } else {
        l.superheating_a()
    };
    m.temperature_for_a(a)
}

pub fn crossing_temperatures(m: &Material) -> (f64, f64) {
    (crossing_for(m, 1.0), crossing_for(m, 0.5))
}

pub fn triangle_report(m: &Material, t: f64) -> Result<TriangleReport, BoundsError> {
    let bulk = bulk_triangle(m, t)?;
    let gamma = elastic_bound_gamma(m, t).ok();
    let elastic = IsoTriangle::new(gamma.map_or(0.0, |g| 6f64.sqrt() * g));
    let max_physical_norm = (2.0f64 / 3.0).sqrt();
    Ok(TriangleReport {
        temperature: t,
        a: m.a_at(t),
        bulk_scale: bulk.scale,
        bulk_vertices: bulk.vertices(),
        elastic_scale: elastic.scale,
        elastic_vertices: elastic.vertices(),
        gamma,
        t_psi_contains_elastic: IsoTriangle::PHYSICAL.contains(&elastic),
        elastic_contains_t_psi: gamma.is_some_and(|g| g >= max_physical_norm),
        crossing_temps: crossing_temperatures(m),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    LowTemp,
    HighTemp,
    Polynomial,
    #[serde(rename = "GL")]
    Gl,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundAudit {
    pub regime: Regime,
    pub bound_value: f64,
    pub max_interior_norm: f64,
    pub max_boundary_norm: f64,
    pub satisfied: bool,
    pub worst_site: (usize, usize, usize),
    pub slack: f64,
    /// Boundary data strictly inside the ball the theorem assumes.
    pub hypothesis_met: bool,
}

/// Regime and field-independent part of the bound for `fun`.
pub fn regime_of(fun: &BulkFunctional) -> Result<(Regime, Option<f64>), BoundsError> {
    Ok(match fun {
        BulkFunctional::Quartic { material, temperature } => match elastic_bound_gamma(material, *temperature) {
            Ok(gamma) => (Regime::LowTemp, Some(gamma)),
            Err(_) => (Regime::HighTemp, None),
        },
        BulkFunctional::Polynomial(p) => (Regime::Polynomial, Some(p.bound_c())),
        BulkFunctional::GlPenalized { material, temperature, eps } => {
            (Regime::Gl, Some(gl_bound(material, *temperature, *eps)?))
        }
    })
}

pub fn audit_field(field: &QField, fun: &BulkFunctional, slack: f64) -> Result<BoundAudit, BoundsError> {
    let g = field.grid;
    if g.interior_len() == 0 {
        return Err(BoundsError::EmptyInterior);
    }
    if !field.is_finite() {
        return Err(BoundsError::NonFinite);
    }
    let (regime, intrinsic) = regime_of(fun)?;
    let (max_boundary_norm, _) = field.max_boundary_norm();
    let (max_interior_norm, worst) = field.max_interior_norm();
    let bound_value = match regime {
        Regime::LowTemp => intrinsic.unwrap(),
        Regime::HighTemp => max_boundary_norm,
        Regime::Polynomial | Regime::Gl => intrinsic.unwrap().max(max_boundary_norm),
    };
    let hypothesis_radius = match (regime, fun.landau().and_then(|l| l.s_plus())) {
        (Regime::LowTemp, Some(s_plus)) => (s_plus * INV_SQRT6).min(INV_SQRT6),
        _ => INV_SQRT6,
    };
    Ok(BoundAudit {
        regime,
        bound_value,
        max_interior_norm,
        max_boundary_norm,
        satisfied: max_interior_norm <= bound_value * (1.0 + slack),
        worst_site: g.coords(worst),
        slack,
        hypothesis_met: max_boundary_norm < hypothesis_radius,
    })
}
