use std::f64::consts::PI;

use fil::basis::{Basis, BasisTable, Parity, QuadParams};
use fil::bounds_lab::{analyticity_demo, basis_growth, circle_points};
use fil::error::FilError;
use fil::interpolate::TestFunction;
use fil::nodes::{EpsGenerator, NodePlan, Perturbation};
use fil::perturb_op::WeightScheme;
use fil::scalar::Precision;
use num_complex::Complex;

/// log sup_{|z|=r} |b_0^+(z)| for r = 1, 2, 3 over the 9-point quarter circle,
/// from an independent 40-digit quadrature of (1/4)∫ θ³(z) e^{iπx²z} dz along
/// the polyline −1 → −1+i → 1+i → 1.
const B0_LOG_MAX: [f64; 3] = [1.0986122886681098, 6.398157006695567, 17.890216062264745];

#[test]
fn b0_growth_matches_independent_quadrature() {
    let basis = Basis::new(2, Precision::Extended, QuadParams::default()).unwrap();
    let radii = [1.0, 2.0, 3.0];
    let table = BasisTable::tabulate(&basis, &[], &circle_points(&radii, 9), 0);
    let g = basis_growth(&table, 0, Parity::Plus, &radii, 9, 0).unwrap();
    for (got, want) in g.log_max.iter().zip(B0_LOG_MAX) {
        assert!((got - want).abs() < 1e-9 * want.abs(), "{got} vs {want}");
    }
    // Finite radii undershoot the limiting type; the ratio rises with r.
    let ratios: Vec<f64> = radii.iter().zip(&g.log_max).map(|(r, l)| l / (r * r)).collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]) && ratios[2] < PI, "{ratios:?}");
    assert!((g.type_estimate.unwrap() - 1.98780).abs() < 1e-4);
}

fn demo_setup(n: usize, eps: EpsGenerator) -> (NodePlan, BasisTable, Vec<Complex<f64>>) {
    let basis = Basis::new(n, Precision::Extended, QuadParams::default()).unwrap();
    let points: Vec<Complex<f64>> =
        (0..6).map(|j| Complex::from_polar(1.5, PI / 2.0 * j as f64 / 5.0)).chain([Complex::new(0.5, 0.5)]).collect();
    let plan = NodePlan::new(n, Perturbation::same(eps), WeightScheme::Exponential { c: 1.0 }).unwrap();
    let table = BasisTable::tabulate(&basis, &plan.all_nodes(), &points, 0);
    (plan, table, points)
}

#[test]
fn gaussian_extends_to_the_disk() {
    let (plan, table, points) = demo_setup(16, EpsGenerator::Exp { c: 1e-3, rate: 2.0 });
    let f = TestFunction::Gaussian { a: 1.0 };
    let rep = analyticity_demo(&f, PI, &plan, &table, None).unwrap();
    assert_eq!(rep.points.len(), points.len());
    assert!(rep.max_abs_error < 1e-4, "{}", rep.max_abs_error);
    assert!(rep.majorant.is_finite() && rep.majorant_tail < 1e-10);

    let zero = analyticity_demo(&TestFunction::Zero, PI, &plan, &table, None).unwrap();
    assert!(zero.values.iter().all(|v| v[0] == 0.0 && v[1] == 0.0));

    let err = analyticity_demo(&f, 0.5, &plan, &table, None).unwrap_err();
    assert!(matches!(err, FilError::DivergentMajorant(_)));
}
