//! Landau–de Gennes Q-tensor analysis.
//!
//! Symmetric traceless tensors and their `(s, r)` order parameters, bulk
//! energy densities, explicit norm bounds and audits, a gradient-flow
//! minimizer on rectangular grids, and second moments of orientation
//! distributions.

pub mod bounds;
pub mod bulk;
pub mod moments;
pub mod poly;
pub mod qtensor;
pub mod solver;

pub use bulk::{BulkFunctional, Material};
pub use qtensor::QTensor;
