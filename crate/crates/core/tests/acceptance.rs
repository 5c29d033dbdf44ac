//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use fil::basis::{Basis, BasisTable, GeneratingParams, Parity, QuadParams, SquareNode};
use fil::bounds_lab::{
    basis_growth, circle_points, decay_fit, decay_samples, exponential_rate, growth_from_values, growth_in_index,
    lower_bound_fit, synthesize_complex,
};
use fil::interpolate::{direct_synthesis, nodes_for, reconstruct, sample, uniform_grid, TestFunction};
use fil::modular::UpperHalfPoint;
use fil::nodes::{classify_pair, match_nodes, EpsGenerator, NodePlan, Perturbation, Verdict};
use fil::perturb_op::{build_truncation, eval_perturbed_basis, unweighted_inverse, PerturbedBasisCoeffs, WeightScheme};
use fil::qseries::{inverse_j_at_cusp_one, j_series, lambda_series, theta2_fourth, theta_fourth, Theta};
use fil::scalar::Precision;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;

/// Sup error of the unperturbed N = 64 Gaussian reconstruction on [−3, 3],
/// frozen from a recorded run (observed 2.2e-16).
const UNPERTURBED_SUP_BOUND: f64 = 1e-14;
/// hs_defect of the N = 64, s = 5, ε_n = 0.01(1+n)^{−1.5} operator (regression datum).
const HS_DEFECT_N64: f64 = 3.140846011318756e-2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let l = lambda_series::<BigRational>(8);
    let j = j_series::<BigRational>(8);
    let c = inverse_j_at_cusp_one::<BigRational>(6);
    let lam_ok = l.valuation() == 1 && (0..3).all(|k| l.coeff(1 + k) == rat([16, -128, 704][k as usize]));
    let j_ok = j.valuation() == 1 && j.coeff(1) == rat(1) && j.coeff(2) == rat(-24);
    let c_ok = c.leading() == Some(&rat(-4096));
    let secs = t.elapsed().as_secs_f64();
    outcome(
        lam_ok && j_ok && c_ok && secs < 1.0,
        format!("lambda {lam_ok}, J {j_ok}, cusp-one leading {:?}, {secs:.3} s", c.leading().map(|v| v.to_string())),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let order = 64;
    let lhs = theta_fourth::<BigRational>(Theta::Three, order);
    let rhs = theta2_fourth::<BigRational>(order).add(&theta_fourth(Theta::Four, order));
    let diff = lhs.sub(&rhs);
    let exact = diff.order() >= order && diff.is_zero();
    let secs = t.elapsed().as_secs_f64();
    outcome(exact && secs < 1.0, format!("difference vanishes through w^{}, {secs:.3} s", diff.order() - 1))
}

fn criterion_3(table: &BasisTable) -> Outcome {
    let idx = |k: u64| table.find_real(SquareNode::exact(k)).expect("exact node tabulated");
    let mut worst: f64 = 0.0;
    for m in 1..=12u64 {
        let i = idx(m);
        for n in 1..=12usize {
            let (a, ah) = table.a_real(n, i).unwrap();
            let d = if n as u64 == m { 1.0 } else { 0.0 };
            worst = worst.max((a - d).abs()).max(ah.abs());
        }
    }
    let i0 = idx(0);
    let (a0, _) = table.a_real(0, i0).unwrap();
    let (a1, ah1) = table.a_real(1, i0).unwrap();
    let pass = worst < 1e-7 && (a0 - 0.5).abs() < 1e-8 && (a1 + 1.0).abs() < 1e-6 && (ah1 - 1.0).abs() < 1e-6;
    outcome(pass, format!("max delta error {worst:.2e}, a_0(0) = {a0}, a_1(0) = {a1}, â_1(0) = {ah1}"))
}

fn criterion_4(basis: &Basis) -> Outcome {
    // z = i is avoided: 1 − 2λ(i) = 0 makes every g_n^- vanish there.
    let points = [(0.0, 1.1), (0.5, 0.75f64.sqrt()), (-0.3, 1.2), (0.8, 0.75), (0.1, 1.6)];
    let gp = GeneratingParams::default();
    let mut worst: f64 = 0.0;
    for (re, im) in points {
        let z = UpperHalfPoint::new(re, im).unwrap();
        for n in 0..=10 {
            for sign in Parity::BOTH {
                // g_0^- vanishes identically.
                if n == 0 && sign == Parity::Minus {
                    continue;
                }
                let a = basis.eval_gn(n, sign, z).unwrap();
                let b = basis.eval_gn_generating(n, sign, z, &gp).unwrap();
                worst = worst.max((a - b).norm() / a.norm());
            }
        }
    }
    outcome(worst < 1e-6, format!("max relative difference {worst:.2e} over n <= 10 at 5 points"))
}

fn criterion_5(basis: &Basis) -> Outcome {
    let xs = [0.4, 1.3, 2.2, 3.1, 4.4, 5.6, 6.9, 7.8];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for x in xs {
        let c = basis.contour_all(Complex::new(x, 0.0));
        for n in 0..=8usize {
            let lo = (n as f64).sqrt();
            if x < lo || x > lo + 5.0 {
                continue;
            }
            for sign in Parity::BOTH {
                let t = basis.eval_bn_tail(n, sign, x).unwrap();
                let v = c[n][sign.index()];
                worst = worst.max((t - v.re).abs().max(v.im.abs()) / t.abs().max(1.0));
                count += 1;
            }
        }
    }
    outcome(worst < 1e-8, format!("max difference {worst:.2e} over {count} (n, sign, x) triples"))
}

fn criteria_6_7() -> (Outcome, Outcome) {
    let n = 64;
    let w = WeightScheme::Polynomial { s: 5.0 };
    let eps = Perturbation::same(EpsGenerator::Power { a: 0.01, alpha: 1.5 });
    let plan = NodePlan::new(n, eps, w.clone()).unwrap();
    let zero = NodePlan::unperturbed(n, w.clone());
    let grid = uniform_grid(-3.0, 3.0, 0.05).unwrap();
    let mut nodes = nodes_for(&plan, &grid);
    for z in zero.all_nodes() {
        if !nodes.contains(&z) {
            nodes.push(z);
        }
    }
    let basis = Basis::new(n, Precision::Extended, QuadParams::default()).unwrap();
    let table = BasisTable::tabulate(&basis, &nodes, &[], 0);

    let op = build_truncation(&plan, &table).unwrap();
    let defect = op.hs_defect();
    let direct = op.invert_direct().unwrap();
    let c6 = match op.invert_neumann(1e-15, 2000) {
        Ok(neumann) => {
            let agree = (&neumann.matrix - &direct.matrix).amax();
            let coeffs = PerturbedBasisCoeffs::from_inverse(&direct, &w, n);
            let mut delta_err: f64 = 0.0;
            for (m, node) in plan.space_nodes().iter().enumerate().take(33).skip(1) {
                let i = table.find_real(*node).unwrap();
                let h = eval_perturbed_basis(&coeffs, &table, i).unwrap();
                for (k, v) in h.iter().enumerate().take(33) {
                    delta_err = delta_err.max((v.0 - if k == m { 1.0 } else { 0.0 }).abs());
                }
            }
            let regression = (defect - HS_DEFECT_N64).abs() < 1e-6 * HS_DEFECT_N64;
            outcome(
                defect < 1.0 && agree < 1e-9 && delta_err < 1e-5 && regression,
                format!(
                    "hs_defect {defect:.6e} (recorded {HS_DEFECT_N64:.6e}), neumann vs direct {agree:.2e} in {:?} terms, max delta error {delta_err:.2e}",
                    neumann.terms
                ),
            )
        }
        Err(e) => outcome(false, format!("hs_defect {defect:.6e}, neumann failed: {e}")),
    };

    let f = TestFunction::Gaussian { a: 1.0 };
    let op0 = build_truncation(&zero, &table).unwrap();
    let inv0 = unweighted_inverse(&op0.invert_direct().unwrap(), &w, n);
    let r0 = reconstruct(&f, &zero, &inv0, "direct", &table, &grid, &[]).unwrap();
    let synth = direct_synthesis(&sample(&f, &zero), &table, &grid).unwrap();
    let identical = synth.iter().zip(&r0.reconstruction).all(|(a, b)| a.to_bits() == b.to_bits());
    let inv = unweighted_inverse(&direct, &w, n);
    let r = reconstruct(&f, &plan, &inv, "direct", &table, &grid, &[]).unwrap();
    let c7 = outcome(
        identical && r0.sup_error < UNPERTURBED_SUP_BOUND && r.sup_error < 10.0 * UNPERTURBED_SUP_BOUND,
        format!(
            "perturbed sup error {:.2e} (bound {:.0e}), unperturbed {:.2e}, eps = 0 bit-identical to direct synthesis: {identical}",
            r.sup_error,
            10.0 * UNPERTURBED_SUP_BOUND,
            r0.sup_error
        ),
    );
    (c6, c7)
}

struct Small {
    table: BasisTable,
    xs: Vec<f64>,
    radii: Vec<f64>,
    per_quarter: usize,
}

fn small_table(basis: &Basis) -> Small {
    let xs = uniform_grid(0.0, 20.0, 0.05).unwrap();
    let radii = vec![1.0, 1.5, 2.0, 2.5, 3.0];
    let per_quarter = 9;
    let mut real: Vec<SquareNode> = xs.iter().map(|x| SquareNode::from_x(*x)).collect();
    for k in 0..=12 {
        let node = SquareNode::exact(k);
        if !real.contains(&node) {
            real.push(node);
        }
    }
    let table = BasisTable::tabulate(basis, &real, &circle_points(&radii, per_quarter), 0);
    Small { table, xs, radii, per_quarter }
}

fn criterion_8(s: &Small) -> Outcome {
    let ns: Vec<usize> = (1..=12).collect();
    let f0 = decay_fit(&s.table, &ns, &s.xs, 0).unwrap();
    let f1 = decay_fit(&s.table, &ns, &s.xs, 1).unwrap();
    let a0 = &decay_samples(&s.table, &[0], &s.xs, 0).unwrap()[0];
    let rate = exponential_rate("a_0", &a0.xs, &a0.values, 3.0);
    let r = rate.constant("rate").unwrap_or(0.0);
    let floor = (PI / 2.0).sqrt() - 0.05;
    let fit_ok = |f: &fil::bounds_lab::EnvelopeFit| !f.degenerate && f.constant("c").unwrap_or(0.0) > 0.0 && f.max_violation < 0.05;
    outcome(
        fit_ok(&f0) && fit_ok(&f1) && r >= floor,
        format!(
            "a_n: c = {:.3}, violation {:.3}; a_n': c = {:.3}, violation {:.3}; a_0 rate {r:.3} (floor {floor:.3})",
            f0.constant("c").unwrap_or(f64::NAN),
            f0.max_violation,
            f1.constant("c").unwrap_or(f64::NAN),
            f1.max_violation
        ),
    )
}

fn criterion_9(s: &Small) -> Outcome {
    let zero = NodePlan::unperturbed(12, WeightScheme::Polynomial { s: 5.0 });
    let coords = sample(&TestFunction::Gaussian { a: 1.0 }, &zero);
    let vals: Vec<f64> =
        (0..s.table.n_complex()).map(|i| synthesize_complex(&coords, &s.table, i).unwrap().norm()).collect();
    let cal = growth_from_values("calibration", &s.radii, s.per_quarter, &vals).unwrap();
    let order = cal.order.unwrap_or(f64::NAN);
    let ty = cal.type_estimate.unwrap_or(f64::NAN);
    let by_n: Vec<(usize, f64)> = (0..=10)
        .map(|n| (n, *basis_growth(&s.table, n, Parity::Plus, &s.radii, s.per_quarter, 0).unwrap().log_max.last().unwrap()))
        .collect();
    let r2 = growth_in_index(&by_n).map_or(0.0, |f| f.r2);
    outcome(
        (order - 2.0).abs() <= 0.1 && (ty - PI).abs() <= 0.1 * PI && r2 > 0.95,
        format!("calibration order {order:.3}, type {ty:.3}; b_n^+ log M(3) vs n R^2 = {r2:.4}"),
    )
}

fn criterion_10(basis: &Basis) -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for n in 0..=5usize {
        for sign in Parity::BOTH {
            let lo = (n as f64).sqrt() + 1.0;
            let samples: Vec<(f64, f64)> = (0..=40)
                .map(|i| lo + (12.0 - lo) * i as f64 / 40.0)
                .map(|x| (x, basis.eval_bn_tail(n, sign, x).unwrap()))
                .collect();
            let fit = lower_bound_fit(n, sign, &samples, 1e-3);
            if fit.degenerate {
                lines.push(format!("b_{n}^{sign} excluded"));
                continue;
            }
            let c = fit.constant("c").unwrap_or(0.0);
            let cn = fit.constant("c_n").unwrap_or(0.0);
            pass &= c > 0.0 && cn > 0.0;
            lines.push(format!("b_{n}^{sign} c = {c:.2}, c_n = {cn:.2e}"));
        }
    }
    outcome(pass, lines.join("; "))
}

fn criterion_11() -> Outcome {
    let t = Instant::now();
    let scaled = |a: f64| -> Vec<f64> { (0..2001).map(|n| a * (n as f64).sqrt()).collect() };
    let verdicts: Vec<Verdict> =
        [0.9, 1.0, 1.2].iter().map(|a| classify_pair(&scaled(*a), &scaled(*a), 2.0, 2.0, 2000).unwrap().verdict).collect();
    let want = [Verdict::Supercritical, Verdict::Indeterminate, Verdict::Subcritical];
    let exact: Vec<f64> = (0..200).map(|m| (m as f64).sqrt()).collect();
    let m = match_nodes(&exact, 150, 4.0, 1.0).unwrap();
    let identity = m.matches.len() == 151 && m.matches.iter().all(|x| x.m == x.n && x.eps == 0.0);
    let secs = t.elapsed().as_secs_f64();
    outcome(
        verdicts == want && identity && secs < 1.0,
        format!(
            "verdicts {}, exact nodes map to themselves: {identity}, {secs:.3} s",
            verdicts.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("/")
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut failed = 0;
    let mut report = |k: u32, t: Instant, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {k:>2}: {tag} [{:.1} s] {}", t.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed += 1;
        }
    };

    let t = Instant::now();
    report(1, t, criterion_1());
    let t = Instant::now();
    report(2, t, criterion_2());
    let t = Instant::now();
    report(11, t, criterion_11());

    let t = Instant::now();
    let basis = Basis::new(12, Precision::Extended, QuadParams::default()).unwrap();
    let small = small_table(&basis);
    println!("  (n_max = 12 table: {} real, {} complex points in {:.1} s)", small.table.n_real(), small.table.n_complex(), t.elapsed().as_secs_f64());
    let t = Instant::now();
    report(3, t, criterion_3(&small.table));
    let t = Instant::now();
    report(4, t, criterion_4(&basis));
    let t = Instant::now();
    report(5, t, criterion_5(&basis));
    let t = Instant::now();
    report(8, t, criterion_8(&small));
    let t = Instant::now();
    report(9, t, criterion_9(&small));
    let t = Instant::now();
    report(10, t, criterion_10(&basis));

    let t = Instant::now();
    let (c6, c7) = criteria_6_7();
    report(6, t, c6);
    let t = Instant::now();
    report(7, t, c7);

    println!("{} of 11 criteria passed in {:.1} s", 11 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
