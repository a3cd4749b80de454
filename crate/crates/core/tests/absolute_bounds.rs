//! End-to-end: solve, store, reload and audit against the norm bounds.

use ldg_core::bounds::{audit_field, regime_of, triangle_report, Regime};
use ldg_core::bulk::{BulkFunctional, Material, PolyTerm, PolynomialBulk};
use ldg_core::qtensor::{make_biaxial, normalize3, QTensor};
use ldg_core::solver::io::{read_field_str, write_field_string};
use ldg_core::solver::{minimize_multistart, Field, Grid3, QField, SolverConfig};

fn grid(n: usize) -> Grid3 {
    let m = Material::MBBA;
    Grid3::cube(n, 0.5 * (m.elastic_l / m.alpha).sqrt()).unwrap()
}

/// Six different constant faces, earlier faces winning on edges.
fn mixed_boundary(g: Grid3, scale: f64) -> QField {
    let faces = [
        QTensor::uniaxial(scale, &[1.0, 0.0, 0.0]),
        QTensor::uniaxial(scale, &[0.0, 1.0, 0.0]),
        QTensor::uniaxial(scale, &normalize3(&[1.0, 1.0, 1.0])),
        make_biaxial(scale, 0.3 * scale, &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap(),
        QTensor::uniaxial(0.5 * scale, &[0.0, 0.0, 1.0]),
        QTensor::uniaxial(-0.5 * scale, &[0.0, 0.0, 1.0]),
    ];
    Field::from_fn(g, |i, j, k| {
        let on = [i == 0, i + 1 == g.nx, j == 0, j + 1 == g.ny, k == 0, k + 1 == g.nz];
        on.iter().position(|&b| b).map_or(QTensor::ZERO, |f| faces[f])
    })
}

fn solve(fun: BulkFunctional, boundary: &QField) -> QField {
    let mut cfg = SolverConfig::new(fun, Material::MBBA.elastic_l);
    cfg.restarts = 1;
    cfg.seed = 3;
    let (field, report) = minimize_multistart(boundary, &cfg).unwrap();
    assert!(report.converged, "{report:?}");
    assert!(report.energy_history_monotone);
    field
}

#[test]
fn low_temperature_solution_survives_storage() {
    let fun = BulkFunctional::quartic(Material::MBBA, 44.0);
    let boundary = mixed_boundary(grid(9), 0.6);
    let field = solve(fun.clone(), &boundary);
    for idx in 0..field.values.len() {
        if field.grid.is_boundary_index(idx) {
            assert_eq!(field.values[idx], boundary.values[idx]);
        }
    }
    let audit = audit_field(&field, &fun, 1e-3).unwrap();
    assert_eq!(audit.regime, Regime::LowTemp);
    assert!(audit.satisfied, "{audit:?}");

    let reloaded = read_field_str(&write_field_string(&field)).unwrap();
    assert_eq!(reloaded, field);
    assert_eq!(audit_field(&reloaded, &fun, 1e-3).unwrap(), audit);

    let gamma = triangle_report(&Material::MBBA, 44.0).unwrap().gamma.unwrap();
    assert_eq!(audit.bound_value, gamma);
}

#[test]
fn high_temperature_solution_obeys_maximum_principle() {
    let fun = BulkFunctional::quartic(Material::MBBA, 50.0);
    let boundary = mixed_boundary(grid(9), 0.3);
    let field = solve(fun.clone(), &boundary);
    let audit = audit_field(&field, &fun, 0.0).unwrap();
    assert_eq!(audit.regime, Regime::HighTemp);
    assert!(audit.satisfied && audit.max_interior_norm <= audit.max_boundary_norm, "{audit:?}");
}

#[test]
fn polynomial_solution_obeys_root_bound() {
    let l = Material::MBBA.landau(44.0);
    let poly = PolynomialBulk::new(
        0.5 * l.a,
        l.b / 3.0,
        0.25 * l.c,
        6,
        vec![PolyTerm { m: 3, p: 0, coeff: 500.0 }, PolyTerm { m: 1, p: 1, coeff: 200.0 }],
    )
    .unwrap();
    let fun = BulkFunctional::Polynomial(poly);
    let (regime, bound) = regime_of(&fun).unwrap();
    assert_eq!(regime, Regime::Polynomial);
    let field = solve(fun.clone(), &mixed_boundary(grid(7), 0.5));
    let audit = audit_field(&field, &fun, 1e-3).unwrap();
    assert!(audit.satisfied, "{audit:?}");
    assert!(audit.bound_value >= bound.unwrap());
}
