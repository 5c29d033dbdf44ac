use std::f64::consts::PI;

use fil::basis::{Basis, BasisTable, Parity, QuadParams, SquareNode};
use fil::bounds_lab::{basis_growth, circle_points, growth_in_index};
use fil::scalar::Precision;

/// f̂(ξ) = ∫ f(x) e^{−2πixξ} dx equals ±f for b_n^±. The trapezoid sum over
/// the symmetric grid is spectrally accurate for these entire, exponentially
/// decaying functions.
#[test]
fn plus_and_minus_families_are_fourier_eigenfunctions() {
    let basis = Basis::new(6, Precision::Double, QuadParams::default()).unwrap();
    let h = 0.05;
    let xs: Vec<f64> = (0..=160).map(|i| i as f64 * h).collect();
    let vals: Vec<Vec<[f64; 2]>> = xs.iter().map(|x| basis.real_all(SquareNode::from_x(*x))).collect();
    for xi in [0.0, 0.37, 0.9, 1.45, 2.2] {
        let want = basis.real_all(SquareNode::from_x(xi));
        for n in 0..=6 {
            for sign in Parity::BOTH {
                let s = sign.index();
                let mut ft = vals[0][n][s];
                for (x, v) in xs.iter().zip(&vals).skip(1) {
                    ft += 2.0 * v[n][s] * (2.0 * PI * x * xi).cos();
                }
                ft *= h;
                let expect = sign.sign() * want[n][s];
                assert!((ft - expect).abs() < 1e-5, "b_{n}^{sign} at {xi}: transform {ft}, expected {expect}");
            }
        }
    }
}

#[test]
fn values_at_origin_mark_squares() {
    let basis = Basis::new(10, Precision::Extended, QuadParams::default()).unwrap();
    let v = basis.real_all(SquareNode::exact(0));
    for (n, [p, m]) in v.iter().enumerate().skip(1) {
        let (a, ah) = (p + m, p - m);
        let square = [1, 4, 9].contains(&n);
        let (ea, eah) = if square { (-1.0, 1.0) } else { (0.0, 0.0) };
        assert!((a - ea).abs() < 1e-7 && (ah - eah).abs() < 1e-7, "n={n}: a = {a}, â = {ah}");
    }
}

/// sup_{|z|=r} |b_n^+| ≤ C^n e^{πr²} with one C for n ≤ 10, r ≤ 3.
#[test]
fn growth_is_geometric_in_index() {
    let basis = Basis::new(10, Precision::Extended, QuadParams::default()).unwrap();
    let radii = [1.0, 2.0, 3.0];
    let per_quarter = 6;
    let table = BasisTable::tabulate(&basis, &[], &circle_points(&radii, per_quarter), 0);
    let reports: Vec<_> = (0..=10).map(|n| basis_growth(&table, n, Parity::Plus, &radii, per_quarter, 0).unwrap()).collect();
    for (r, l) in radii.iter().zip(&reports[0].log_max) {
        assert!(*l <= PI * r * r, "n = 0 at r = {r}: log M = {l}");
    }
    // Smallest admissible log C.
    let log_c = (1..=10)
        .flat_map(|n| radii.iter().zip(&reports[n].log_max).map(move |(r, l)| (l - PI * r * r) / n as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    let last: Vec<(usize, f64)> = reports.iter().enumerate().map(|(n, g)| (n, *g.log_max.last().unwrap())).collect();
    let fit = growth_in_index(&last).unwrap();
    assert!(log_c.is_finite() && log_c <= fit.slope, "log C = {log_c}, slope of log M(3) in n = {}", fit.slope);
}
