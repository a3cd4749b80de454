//! Run configuration, read from TOML.
//!
//! ```toml
//! [material]
//! preset = "mbba"          # optional; any field below overrides it
//! alpha = 420.0
//!
//! [temperature]
//! value = 45.0             # or start / stop / step
//!
//! [functional]
//! kind = "quartic"         # "quartic" | "polynomial" | "gl"
//!
//! [grid]
//! n = 17                   # or nx / ny / nz
//! h = 7.7e-8               # or hx / hy / hz
//!
//! [boundary]
//! kind = "uniaxial"        # "uniaxial" | "biaxial" | "faces"
//! s0 = 0.9
//! director = [0.0, 0.0, 1.0]
//!
//! [solver]
//! tol = 1e-8
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ldg_core::bulk::{BulkError, BulkFunctional, Material, PolyTerm, PolynomialBulk};
use ldg_core::qtensor::{make_biaxial, QTensor, QTensorError, Vec3};
use ldg_core::solver::{Field, Grid3, QField, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config: missing [{0}] section")]
    Missing(&'static str),
    #[error("config [{section}]: {message}")]
    Invalid { section: &'static str, message: String },
    #[error("config [material]: {0}")]
    Material(BulkError),
    #[error("config [functional]: {0}")]
    Functional(BulkError),
    #[error("config [grid]: {0}")]
    Grid(SolverError),
    #[error("config [boundary]: {0}")]
    Boundary(QTensorError),
    #[error("config [solver]: {0}")]
    Solver(SolverError),
}

fn invalid(section: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { section, message: message.into() }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<MaterialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<TemperatureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<FunctionalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elastic_l: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionalKind {
    Quartic,
    Polynomial,
    Gl,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalSpec {
    pub kind: FunctionalKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Temperature-dependent by default: `a(T)/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a4: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<PolyTerm>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nz: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hz: Option<f64>,
}

/// A constant boundary tensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TensorSpec {
    Uniaxial { s0: f64, director: Vec3 },
    Biaxial { s: f64, r: f64, e1: Vec3, e2: Vec3 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BoundarySpec {
    Uniaxial {
        s0: f64,
        director: Vec3,
    },
    Biaxial {
        s: f64,
        r: f64,
        e1: Vec3,
        e2: Vec3,
    },
    /// Order `x_lo, x_hi, y_lo, y_hi, z_lo, z_hi`; on shared edges the
    /// earlier face wins.
    Faces {
        faces: Vec<TensorSpec>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn material(&self) -> Result<Material, ConfigError> {
        let spec = self.material.clone().unwrap_or_default();
        let base = match spec.preset.as_deref() {
            None | Some("mbba") => Material::MBBA,
            Some(other) => return Err(invalid("material", format!("unknown preset `{other}`"))),
        };
        let m = Material {
            alpha: spec.alpha.unwrap_or(base.alpha),
            b: spec.b.unwrap_or(base.b),
            c: spec.c.unwrap_or(base.c),
            t_star: spec.t_star.unwrap_or(base.t_star),
            elastic_l: spec.elastic_l.unwrap_or(base.elastic_l),
        };
        m.validate().map_err(ConfigError::Material)?;
        Ok(m)
    }

    /// Either the single value or `start + k·step` up to `stop`.
    pub fn temperatures(&self) -> Result<Vec<f64>, ConfigError> {
        let spec = self.temperature.as_ref().ok_or(ConfigError::Missing("temperature"))?;
        match (spec.value, spec.start, spec.stop, spec.step) {
            (Some(t), None, None, None) => {
                if !t.is_finite() {
                    return Err(invalid("temperature", "value must be finite"));
                }
                Ok(vec![t])
            }
            (None, Some(start), Some(stop), Some(step)) => {
                if !(step.is_finite() && step > 0.0) {
                    return Err(invalid("temperature", format!("step must be positive, got {step}")));
                }
                if !(start.is_finite() && stop.is_finite() && stop >= start) {
                    return Err(invalid("temperature", "need finite start <= stop"));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if count > 10_000_000 {
                    return Err(invalid("temperature", "sweep has too many points"));
                }
                Ok((0..count).map(|k| start + k as f64 * step).collect())
            }
            _ => Err(invalid("temperature", "give either `value` or all of `start`, `stop`, `step`")),
        }
    }

    pub fn single_temperature(&self) -> Result<f64, ConfigError> {
        let ts = self.temperatures()?;
        match ts.as_slice() {
            [t] if self.temperature.as_ref().is_some_and(|s| s.value.is_some()) => Ok(*t),
            _ => Err(invalid("temperature", "this command needs a single `value`")),
        }
    }

    pub fn functional(&self, m: &Material, t: f64) -> Result<BulkFunctional, ConfigError> {
        let spec = self.functional.clone().unwrap_or(FunctionalSpec {
            kind: FunctionalKind::Quartic,
            eps: None,
            a2: None,
            a3: None,
            a4: None,
            degree: None,
            terms: Vec::new(),
        });
        let extra_for = |kind: FunctionalKind| -> Result<(), ConfigError> {
            let poly_fields =
                spec.a2.is_some() || spec.a3.is_some() || spec.a4.is_some() || spec.degree.is_some() || !spec.terms.is_empty();
            if kind != FunctionalKind::Polynomial && poly_fields {
                return Err(invalid("functional", "a2, a3, a4, degree, terms only apply to kind = \"polynomial\""));
            }
            if kind != FunctionalKind::Gl && spec.eps.is_some() {
                return Err(invalid("functional", "eps only applies to kind = \"gl\""));
            }
            Ok(())
        };
        extra_for(spec.kind)?;
        match spec.kind {
            FunctionalKind::Quartic => Ok(BulkFunctional::quartic(*m, t)),
            FunctionalKind::Gl => {
                let eps = spec.eps.ok_or_else(|| invalid("functional", "kind = \"gl\" needs eps"))?;
                BulkFunctional::gl(*m, t, eps).map_err(ConfigError::Functional)
            }
            FunctionalKind::Polynomial => {
                let l = m.landau(t);
                let poly = PolynomialBulk::new(
                    spec.a2.unwrap_or(0.5 * l.a),
                    spec.a3.unwrap_or(l.b / 3.0),
                    spec.a4.unwrap_or(0.25 * l.c),
                    spec.degree.unwrap_or(4),
                    spec.terms.clone(),
                )
                .map_err(ConfigError::Functional)?;
                Ok(BulkFunctional::Polynomial(poly))
            }
        }
    }

    pub fn grid(&self) -> Result<Grid3, ConfigError> {
        let g = self.grid.as_ref().ok_or(ConfigError::Missing("grid"))?;
        let count = |axis: Option<usize>, name: &str| {
            axis.or(g.n).ok_or_else(|| invalid("grid", format!("need `{name}` or `n`")))
        };
        let spacing = |axis: Option<f64>, name: &str| {
            axis.or(g.h).ok_or_else(|| invalid("grid", format!("need `{name}` or `h`")))
        };
        Grid3::new(
            count(g.nx, "nx")?,
            count(g.ny, "ny")?,
            count(g.nz, "nz")?,
            spacing(g.hx, "hx")?,
            spacing(g.hy, "hy")?,
            spacing(g.hz, "hz")?,
        )
        .map_err(ConfigError::Grid)
    }

    /// Field holding the boundary data on the faces and zero inside.
    pub fn boundary_field(&self, grid: Grid3) -> Result<QField, ConfigError> {
        let spec = self.boundary.as_ref().ok_or(ConfigError::Missing("boundary"))?;
        let faces: Vec<QTensor> = match spec {
            BoundarySpec::Uniaxial { s0, director } => {
                vec![tensor(&TensorSpec::Uniaxial { s0: *s0, director: *director })?; 6]
            }
            BoundarySpec::Biaxial { s, r, e1, e2 } => {
                vec![tensor(&TensorSpec::Biaxial { s: *s, r: *r, e1: *e1, e2: *e2 })?; 6]
            }
            BoundarySpec::Faces { faces } => {
                if faces.len() != 6 {
                    return Err(invalid("boundary", format!("faces needs 6 entries, got {}", faces.len())));
                }
                faces.iter().map(tensor).collect::<Result<_, _>>()?
            }
        };
        Ok(Field::from_fn(grid, |i, j, k| {
            let on = [i == 0, i + 1 == grid.nx, j == 0, j + 1 == grid.ny, k == 0, k + 1 == grid.nz];
            on.iter().position(|&b| b).map_or(QTensor::ZERO, |f| faces[f])
        }))
    }

    pub fn solver(&self, functional: BulkFunctional, m: &Material) -> Result<SolverConfig, ConfigError> {
        let spec = self.solver.clone().unwrap_or_default();
        let mut cfg = SolverConfig::new(functional, m.elastic_l);
        if let Some(tol) = spec.tol {
            cfg.tol_residual = tol;
        }
        if let Some(n) = spec.max_iters {
            cfg.max_iters = n;
        }
        if let Some(n) = spec.restarts {
            cfg.restarts = n;
        }
        if let Some(seed) = spec.seed {
            cfg.seed = seed;
        }
        cfg.dt_init = spec.dt;
        if let Some(slack) = spec.slack {
            cfg.slack = slack;
        }
        cfg.validate().map_err(ConfigError::Solver)?;
        Ok(cfg)
    }
}

fn tensor(spec: &TensorSpec) -> Result<QTensor, ConfigError> {
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    match spec {
        TensorSpec::Uniaxial { s0, director } => {
            let n = ldg_core::qtensor::norm3(director);
            if !(finite(director) && s0.is_finite() && n > 0.0) {
                return Err(invalid("boundary", "uniaxial data needs finite s0 and a nonzero director"));
            }
            Ok(QTensor::uniaxial(*s0, &ldg_core::qtensor::normalize3(director)))
        }
        TensorSpec::Biaxial { s, r, e1, e2 } => {
            if !(finite(e1) && finite(e2) && s.is_finite() && r.is_finite()) {
                return Err(invalid("boundary", "biaxial data must be finite"));
            }
            make_biaxial(*s, *r, e1, e2).map_err(ConfigError::Boundary)
        }
    }
}
