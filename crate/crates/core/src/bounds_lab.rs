//! Empirical checks of decay, growth and lower bounds for the basis.
//!
//! Every fit here is deterministic: candidate constants come from fixed
//! grids and ties resolve to the first candidate.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisTable, Parity};
use crate::error::{FilError, Result};
use crate::interpolate::{coordinates, derivative, grid_node, sample, Samples, TestFunction};
use crate::nodes::NodePlan;
use crate::perturb_op::{build_truncation, unweighted_inverse, Slot, WeightScheme};

/// Ordinary least squares y ≈ intercept + slope·x.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// None with fewer than three points or a degenerate abscissa.
pub fn linear_fit(pts: &[(f64, f64)]) -> Option<LinearFit> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(LinearFit { slope, intercept: my - slope * mx, r2 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub claim: String,
    pub method: String,
    pub constants: BTreeMap<String, f64>,
    /// max over the validation points of (observed − envelope)/envelope, ≥ 0.
    pub max_violation: f64,
    pub n_range: [usize; 2],
    pub x_range: [f64; 2],
    pub samples: usize,
    pub degenerate: bool,
    pub note: Option<String>,
}

impl EnvelopeFit {
    fn degenerate(claim: &str, method: &str, n_range: [usize; 2], x_range: [f64; 2], samples: usize, note: &str) -> Self {
        EnvelopeFit {
            claim: claim.into(),
            method: method.into(),
            constants: BTreeMap::new(),
            max_violation: f64::NAN,
            n_range,
            x_range,
            samples,
            degenerate: true,
            note: Some(note.into()),
        }
    }

    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }
}

/// One basis function sampled on a uniform grid starting at x = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct DecaySample {
    pub n: usize,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

/// log of n^{3/4} log³(1+n) (e^{−cx²/n} for x ≤ Cn, e^{−cx} beyond).
pub fn envelope_log_shape(n: usize, x: f64, c: f64, big_c: f64) -> f64 {
    let nf = n as f64;
    let pre = 0.75 * nf.ln() + 3.0 * (1.0 + nf).ln().ln();
    let x = x.abs();
    pre - if x <= big_c * nf { c * x * x / nf } else { c * x }
}

const C_GRID: (f64, f64, f64) = (0.05, 8.0, 0.05);
const BIG_C_GRID: (f64, f64, f64) = (0.25, 8.0, 0.25);

fn steps(g: (f64, f64, f64)) -> impl Iterator<Item = f64> {
    let count = ((g.1 - g.0) / g.2).round() as usize + 1;
    (0..count).map(move |i| g.0 + i as f64 * g.2)
}

/// Indices of local maxima of |v| (endpoints included), skipping zeros.
fn peaks(v: &[f64]) -> Vec<usize> {
    (0..v.len())
        .filter(|&i| {
            let a = v[i].abs();
            a > 0.0 && (i == 0 || a >= v[i - 1].abs()) && (i + 1 == v.len() || a >= v[i + 1].abs())
        })
        .collect()
}

/// Fits K·shape(c, C) to the samples. Even grid indices train, odd ones
/// validate. For each (c, C) on a fixed grid, K is the smallest constant
/// covering every training point, and the score is the squared log gap
/// between that envelope and the local maxima of the data; the tightest
/// envelope wins.
pub fn fit_envelope(claim: &str, data: &[DecaySample]) -> EnvelopeFit {
    let method = "log-domain least squares on local maxima; (c, C) grid search; K = max training ratio";
    let n_range = [data.iter().map(|d| d.n).min().unwrap_or(0), data.iter().map(|d| d.n).max().unwrap_or(0)];
    let x_range = data
        .iter()
        .flat_map(|d| d.xs.iter())
        .fold([f64::INFINITY, f64::NEG_INFINITY], |r, x| [r[0].min(*x), r[1].max(*x)]);
    let samples: usize = data.iter().map(|d| d.values.len()).sum();
    if data.len() < 2 || data.iter().any(|d| d.values.len() < 8 || d.n == 0) {
        return EnvelopeFit::degenerate(claim, method, n_range, x_range, samples, "needs two indices n >= 1 and eight points each");
    }
    let train: Vec<(usize, Vec<(f64, f64)>, Vec<usize>)> = data
        .iter()
        .map(|d| {
            let pts: Vec<(f64, f64)> = d.xs.iter().zip(&d.values).step_by(2).map(|(x, v)| (*x, v.abs())).collect();
            let vals: Vec<f64> = pts.iter().map(|p| p.1).collect();
            (d.n, pts, peaks(&vals))
        })
        .collect();
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for c in steps(C_GRID) {
        for big_c in steps(BIG_C_GRID) {
            let mut log_k = f64::NEG_INFINITY;
            let mut ratios = Vec::new();
            for (n, pts, pk) in &train {
                for (x, v) in pts {
                    if *v > 0.0 {
                        log_k = log_k.max(v.ln() - envelope_log_shape(*n, *x, c, big_c));
                    }
                }
                ratios.extend(pk.iter().map(|&i| pts[i].1.ln() - envelope_log_shape(*n, pts[i].0, c, big_c)));
            }
            let score: f64 = ratios.iter().map(|r| (log_k - r).powi(2)).sum();
            if best.is_none_or(|b| score < b.0) {
                best = Some((score, c, big_c, log_k));
            }
        }
    }
    let (score, c, big_c, log_k) = best.expect("candidate grids are non-empty");
    let mut max_violation = 0.0f64;
    for d in data {
        for (x, v) in d.xs.iter().zip(&d.values).skip(1).step_by(2) {
            if *v != 0.0 {
                let gap = v.abs().ln() - log_k - envelope_log_shape(d.n, *x, c, big_c);
                max_violation = max_violation.max(gap.exp_m1());
            }
        }
    }
    let mut constants = BTreeMap::new();
    constants.insert("c".into(), c);
    constants.insert("C".into(), big_c);
    constants.insert("K".into(), log_k.exp());
    constants.insert("score".into(), score);
    EnvelopeFit { claim: claim.into(), method: method.into(), constants, max_violation, n_range, x_range, samples, degenerate: false, note: None }
}

/// a_n (or a_n' when `derivative_order` is 1) from the table on a uniform
/// grid 0, h, 2h, …; derivatives use the even extension across 0.
pub fn decay_samples(table: &BasisTable, ns: &[usize], xs: &[f64], derivative_order: u32) -> Result<Vec<DecaySample>> {
    if xs.len() < 2 || xs[0] != 0.0 {
        return Err(FilError::Contract("decay grids start at 0 and hold at least two points".into()));
    }
    let h = xs[1] - xs[0];
    let idx: Vec<usize> = xs
        .iter()
        .map(|x| table.find_real(grid_node(*x)).ok_or(FilError::MissingValue { n: 0, node: 0 }))
        .collect::<Result<_>>()?;
    ns.iter()
        .map(|&n| {
            let vals: Vec<f64> = idx.iter().map(|&i| table.a_real(n, i).map(|p| p.0)).collect::<Result<_>>()?;
            if derivative_order == 0 {
                return Ok(DecaySample { n, xs: xs.to_vec(), values: vals });
            }
            let m = vals.len();
            let full: Vec<f64> = vals[1..].iter().rev().chain(vals.iter()).copied().collect();
            let d = derivative(&full, h, derivative_order)?;
            let (xs_out, values): (Vec<f64>, Vec<f64>) = d[m - 1..]
                .iter()
                .zip(xs)
                .filter_map(|(v, x)| v.map(|v| (*x, v)))
                .unzip();
            Ok(DecaySample { n, xs: xs_out, values })
        })
        .collect()
}

pub fn decay_fit(table: &BasisTable, ns: &[usize], xs: &[f64], derivative_order: u32) -> Result<EnvelopeFit> {
    let claim = if derivative_order == 0 { "decay-envelope:a_n" } else { "decay-envelope:a_n'" };
    Ok(fit_envelope(claim, &decay_samples(table, ns, xs, derivative_order)?))
}

/// Pure exponential rate of a sampled function: −slope of log|v| at its
/// local maxima with x ≥ x_min.
pub fn exponential_rate(claim: &str, xs: &[f64], values: &[f64], x_min: f64) -> EnvelopeFit {
    let method = "least squares of log|value| at local maxima against x";
    let x_range = [x_min, xs.last().copied().unwrap_or(x_min)];
    let pts: Vec<(f64, f64)> =
        peaks(values).into_iter().filter(|&i| xs[i] >= x_min).map(|i| (xs[i], values[i].abs().ln())).collect();
    let Some(fit) = linear_fit(&pts) else {
        return EnvelopeFit::degenerate(claim, method, [0, 0], x_range, pts.len(), "fewer than three maxima");
    };
    let rate = -fit.slope;
    // K covers the even grid points; the odd ones validate.
    let usable = |(x, v): &(&f64, &f64)| **x >= x_min && **v != 0.0;
    let log_k = xs
        .iter()
        .zip(values)
        .step_by(2)
        .filter(usable)
        .map(|(x, v)| v.abs().ln() + rate * x)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_violation = xs
        .iter()
        .zip(values)
        .skip(1)
        .step_by(2)
        .filter(usable)
        .map(|(x, v)| (v.abs().ln() - log_k + rate * x).exp_m1())
        .fold(0.0f64, f64::max);
    let mut constants = BTreeMap::new();
    constants.insert("rate".into(), rate);
    constants.insert("K".into(), log_k.exp());
    constants.insert("r2".into(), fit.r2);
    EnvelopeFit { claim: claim.into(), method: method.into(), constants, max_violation, n_range: [0, 0], x_range, samples: pts.len(), degenerate: false, note: None }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub label: String,
    pub radii: Vec<f64>,
    /// log max |G| on each circle.
    pub log_max: Vec<f64>,
    pub order: Option<f64>,
    /// log M(r)/r² at the largest radius.
    pub type_estimate: Option<f64>,
    pub r_range: [f64; 2],
    pub degenerate: bool,
    /// Radii dropped because the values overflowed.
    pub dropped: Vec<f64>,
}

impl GrowthReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,log_max\n");
        for (r, m) in self.radii.iter().zip(&self.log_max) {
            let _ = writeln!(out, "{r},{m:e}");
        }
        out
    }
}

/// Points on the quarter circles |z| = r, 0 ≤ arg z ≤ π/2, `per_quarter`
/// each. Even functions with real Taylor coefficients attain their circle
/// maximum there.
pub fn circle_points(radii: &[f64], per_quarter: usize) -> Vec<Complex<f64>> {
    let m = per_quarter.max(2);
    radii
        .iter()
        .flat_map(|r| (0..m).map(move |j| Complex::from_polar(*r, PI / 2.0 * j as f64 / (m - 1) as f64)))
        .collect()
}

/// Order and type from |G| sampled by `circle_points(radii, per_quarter)`.
pub fn growth_from_values(label: &str, radii: &[f64], per_quarter: usize, values: &[f64]) -> Result<GrowthReport> {
    let m = per_quarter.max(2);
    if values.len() != radii.len() * m {
        return Err(FilError::Dimension(format!("{} values for {} radii x {m}", values.len(), radii.len())));
    }
    let mut kept = Vec::new();
    let mut log_max = Vec::new();
    let mut dropped = Vec::new();
    for (r, chunk) in radii.iter().zip(values.chunks(m)) {
        if chunk.iter().any(|v| !v.is_finite()) {
            dropped.push(*r);
            continue;
        }
        let mx = chunk.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        kept.push(*r);
        log_max.push(mx.ln());
    }
    let r_range = [kept.first().copied().unwrap_or(f64::NAN), kept.last().copied().unwrap_or(f64::NAN)];
    let usable: Vec<(f64, f64)> = kept.iter().zip(&log_max).filter(|(_, l)| **l > 0.0).map(|(r, l)| (r.ln(), l.ln())).collect();
    let order = if usable.len() >= 2 {
        let (x0, y0) = usable[0];
        if usable.len() == 2 {
            Some((usable[1].1 - y0) / (usable[1].0 - x0))
        } else {
            linear_fit(&usable).map(|f| f.slope)
        }
    } else {
        None
    };
    let type_estimate = match (kept.last(), log_max.last()) {
        (Some(r), Some(l)) if l.is_finite() && *l > 0.0 => Some(l / (r * r)),
        _ => None,
    };
    let degenerate = order.is_none() || type_estimate.is_none();
    Ok(GrowthReport { label: label.into(), radii: kept, log_max, order, type_estimate, r_range, degenerate, dropped })
}

pub fn growth_on_disks(
    label: &str,
    f: impl Fn(Complex<f64>) -> Result<Complex<f64>>,
    radii: &[f64],
    per_quarter: usize,
) -> Result<GrowthReport> {
    let values: Vec<f64> = circle_points(radii, per_quarter).into_iter().map(|z| f(z).map(|v| v.norm())).collect::<Result<_>>()?;
    growth_from_values(label, radii, per_quarter, &values)
}

/// Growth of b_n^± on the complex points of a table built from
/// `circle_points(radii, per_quarter)` (in that order, from `offset`).
pub fn basis_growth(table: &BasisTable, n: usize, sign: Parity, radii: &[f64], per_quarter: usize, offset: usize) -> Result<GrowthReport> {
    let m = per_quarter.max(2);
    let values: Vec<f64> =
        (0..radii.len() * m).map(|i| table.b_complex(n, sign, offset + i).map(|v| v.norm())).collect::<Result<_>>()?;
    growth_from_values(&format!("b_{n}^{sign}"), radii, per_quarter, &values)
}

/// Regression of log M_n(r) on n.
pub fn growth_in_index(log_max_by_n: &[(usize, f64)]) -> Option<LinearFit> {
    linear_fit(&log_max_by_n.iter().map(|(n, l)| (*n as f64, *l)).collect::<Vec<_>>())
}

fn dist_to_roots(x: f64) -> f64 {
    let x = x.abs();
    let m = (x * x).floor();
    (x - m.sqrt()).abs().min(((m + 1.0).sqrt() - x).abs())
}

/// Fits |b_n^±(x)| ≥ c_n dist(x, √ℕ) e^{−cx} on samples (x, b(x)).
/// Points within `exclude` of √ℕ are skipped. c is the least-squares rate
/// of log(|b|/dist); c_n is then the largest constant the samples allow.
pub fn lower_bound_fit(n: usize, sign: Parity, samples: &[(f64, f64)], exclude: f64) -> EnvelopeFit {
    let claim = format!("lower-bound:b_{n}^{sign}");
    let method = "least squares of log(|b|/dist) against x; c_n from the minimum residual";
    let x_range = [
        samples.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        samples.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    ];
    if n == 0 && sign == Parity::Minus {
        return EnvelopeFit::degenerate(&claim, method, [n, n], x_range, 0, "excluded: b_0^- vanishes identically");
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(x, b)| dist_to_roots(*x) > exclude && *b != 0.0)
        .map(|(x, b)| (*x, (b.abs() / dist_to_roots(*x)).ln()))
        .collect();
    let Some(fit) = linear_fit(&pts) else {
        return EnvelopeFit::degenerate(&claim, method, [n, n], x_range, pts.len(), "fewer than three usable points");
    };
    let c = -fit.slope;
    let log_cn = pts.iter().map(|(x, l)| l + c * x).fold(f64::INFINITY, f64::min);
    let mut constants = BTreeMap::new();
    constants.insert("c".into(), c);
    constants.insert("c_n".into(), log_cn.exp());
    constants.insert("r2".into(), fit.r2);
    EnvelopeFit {
        claim,
        method: method.into(),
        constants,
        max_violation: 0.0,
        n_range: [n, n],
        x_range,
        samples: pts.len(),
        degenerate: false,
        note: None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityReport {
    pub alpha: f64,
    pub weight_rate: f64,
    /// Σ_{n ≤ N} e^{(c−α)n} and its geometric tail beyond N.
    pub majorant: f64,
    pub majorant_tail: f64,
    pub max_abs_error: f64,
    pub points: Vec<[f64; 2]>,
    pub values: Vec<[f64; 2]>,
    pub growth: Option<GrowthReport>,
}

/// F(z) = c_z a_0(z) + Σ x_i a_i(z) + y_i â_i(z) at complex table point i.
pub fn synthesize_complex(coords: &Samples, table: &BasisTable, i: usize) -> Result<Complex<f64>> {
    let n = coords.truncation;
    let mut acc = coords.values[0] * table.a_complex(0, i)?.0;
    for k in 1..=n {
        let (a, ah) = table.a_complex(k, i)?;
        acc += a * coords.values[Slot::X(k).index(n)] + ah * coords.values[Slot::Y(k).index(n)];
    }
    Ok(acc)
}

/// Samples f at the nodes of `plan`, inverts the operator in the weight
/// e^{cn} of the plan and extends the result to the complex points of the
/// table. With sample decay e^{−α x²} the coefficients are dominated by
/// e^{(c−α)n}, which needs c < α. `growth` optionally names radii and the
/// per-quarter count of circle points stored from `growth_offset` on.
pub fn analyticity_demo(
    f: &TestFunction,
    alpha: f64,
    plan: &NodePlan,
    table: &BasisTable,
    growth: Option<(&[f64], usize, usize)>,
) -> Result<AnalyticityReport> {
    let WeightScheme::Exponential { c } = plan.weight else {
        return Err(FilError::Contract("the analyticity demo runs in an exponential weight".into()));
    };
    if c >= alpha {
        return Err(FilError::DivergentMajorant(format!("weight rate {c} >= sample decay {alpha}")));
    }
    let n = plan.truncation;
    let ratio = (c - alpha).exp();
    let majorant: f64 = (0..=n).map(|k| ratio.powi(k as i32)).sum();
    let majorant_tail = ratio.powi(n as i32 + 1) / (1.0 - ratio);

    let op = build_truncation(plan, table)?;
    let inv = op.invert_direct()?;
    let t_inv: DMatrix<f64> = unweighted_inverse(&inv, &plan.weight, n);
    let coords = Samples { truncation: n, values: coordinates(&sample(f, plan), &t_inv)? };

    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut max_abs_error = 0.0f64;
    for (i, z) in table.header.complex_points.iter().enumerate() {
        let z = Complex::new(z[0], z[1]);
        let v = synthesize_complex(&coords, table, i)?;
        max_abs_error = max_abs_error.max((v - f.eval_complex(z)).norm());
        points.push([z.re, z.im]);
        values.push([v.re, v.im]);
    }
    let growth = match growth {
        Some((radii, per_quarter, offset)) => {
            let m = per_quarter.max(2);
            let vals: Vec<f64> = (0..radii.len() * m)
                .map(|i| synthesize_complex(&coords, table, offset + i).map(|v| v.norm()))
                .collect::<Result<_>>()?;
            Some(growth_from_values("analytic extension", radii, per_quarter, &vals)?)
        }
        None => None,
    };
    Ok(AnalyticityReport { alpha, weight_rate: c, majorant, majorant_tail, max_abs_error, points, values, growth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_examples() {
        let f = linear_fit(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-15 && (f.r2 - 1.0).abs() < 1e-15);
        assert!(linear_fit(&[(0.0, 1.0), (1.0, 2.0)]).is_none());
        assert!(linear_fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_none());
    }

    fn synthetic(c: f64, big_c: f64, k: f64) -> Vec<DecaySample> {
        (1..=6)
            .map(|n| {
                let xs: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
                // Oscillating data touching the envelope at the peaks of cos².
                let values =
                    xs.iter().map(|x| k * envelope_log_shape(n, *x, c, big_c).exp() * (3.0 * x).cos().powi(2)).collect();
                DecaySample { n, xs, values }
            })
            .collect()
    }

    #[test]
    fn envelope_recovers_synthetic_constants() {
        let fit = fit_envelope("synthetic", &synthetic(1.5, 2.0, 0.7));
        assert!(!fit.degenerate);
        assert!((fit.constant("c").unwrap() - 1.5).abs() <= 0.1, "{fit:?}");
        assert!(fit.max_violation < 0.05, "{fit:?}");
        // Rerunning gives identical constants.
        assert_eq!(fit, fit_envelope("synthetic", &synthetic(1.5, 2.0, 0.7)));
    }

    #[test]
    fn envelope_degenerate_input() {
        let one = DecaySample { n: 1, xs: vec![0.0, 0.1, 0.2], values: vec![1.0, 0.5, 0.2] };
        assert!(fit_envelope("tiny", &[one]).degenerate);
    }

    #[test]
    fn exponential_rate_example() {
        let xs: Vec<f64> = (0..2000).map(|i| i as f64 * 0.01).collect();
        let v: Vec<f64> = xs.iter().map(|x| (-1.3 * x).exp() * (1.0 + 0.5 * (4.0 * x).sin())).collect();
        let fit = exponential_rate("synthetic", &xs, &v, 2.0);
        assert!((fit.constant("rate").unwrap() - 1.3).abs() < 0.01, "{fit:?}");
        assert!(fit.max_violation < 0.05);
    }

    #[test]
    fn growth_of_gaussian() {
        let g = TestFunction::Gaussian { a: 1.0 };
        let rep = growth_on_disks("gauss", |z| Ok(g.eval_complex(z)), &[1.0, 1.5, 2.0, 2.5, 3.0], 9).unwrap();
        assert!((rep.order.unwrap() - 2.0).abs() < 1e-9, "{rep:?}");
        assert!((rep.type_estimate.unwrap() - PI).abs() < 1e-9);
        let zero = growth_on_disks("zero", |_| Ok(Complex::new(0.0, 0.0)), &[1.0, 2.0], 5).unwrap();
        assert!(zero.degenerate);
        let wild = growth_on_disks("overflow", |z| Ok((z * z * 300.0).exp()), &[1.0, 1.5, 2.0], 5).unwrap();
        assert_eq!(wild.dropped, vec![2.0]);
    }

    #[test]
    fn lower_bound_on_synthetic() {
        // |sin(πx²)| e^{−x} ≥ c_n dist e^{−x} for some c_n.
        let s: Vec<(f64, f64)> =
            (0..2000).map(|i| 2.0 + i as f64 * 0.005).map(|x| (x, (PI * x * x).sin() * (-x).exp())).collect();
        let fit = lower_bound_fit(1, Parity::Plus, &s, 1e-3);
        assert!(fit.constant("c_n").unwrap() > 0.0);
        assert!(fit.constant("c").unwrap() > 0.0);
        for (x, b) in &s {
            let d = dist_to_roots(*x);
            if d > 1e-3 {
                assert!(b.abs() >= fit.constant("c_n").unwrap() * d * (-fit.constant("c").unwrap() * x).exp() * (1.0 - 1e-12));
            }
        }
        assert!(lower_bound_fit(0, Parity::Minus, &s, 1e-3).degenerate);
    }

    #[test]
    fn roots_distance() {
        assert_eq!(dist_to_roots(2.0), 0.0);
        assert!((dist_to_roots(1.5) - (1.5 - 2f64.sqrt())).abs() < 1e-15);
    }
}
