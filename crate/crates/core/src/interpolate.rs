//! Sampling even test functions at the nodes and rebuilding them from the
//! interpolation basis.
//!
//! Fourier convention: f̂(ξ) = ∫ f(x) e^{−2πixξ} dx.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisTable, SquareNode};
use crate::error::{FilError, Result};
use crate::nodes::NodePlan;
use crate::perturb_op::Slot;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TestFunction {
    Zero,
    /// e^{−πa x²}
    Gaussian { a: f64 },
    /// p(x) e^{−πx²} with p(x) = Σ_j coeffs[j] x^{2j}.
    Hermite { coeffs: Vec<f64> },
}

impl std::str::FromStr for TestFunction {
    type Err = FilError;

    /// `zero`, `gaussian[:a]`, `hermite:c0,c1,...`
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums = || -> Result<Vec<f64>> {
            rest.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<f64>().map_err(|e| FilError::Parse(format!("function {s:?}: {e}"))))
                .collect()
        };
        match kind.trim() {
            "zero" => Ok(TestFunction::Zero),
            "gaussian" => {
                let v = nums()?;
                let a = v.first().copied().unwrap_or(1.0);
                if !(a > 0.0) {
                    return Err(FilError::Parse(format!("gaussian width {a} must be positive")));
                }
                Ok(TestFunction::Gaussian { a })
            }
            "hermite" => Ok(TestFunction::Hermite { coeffs: nums()? }),
            other => Err(FilError::Parse(format!("unknown test function {other:?}"))),
        }
    }
}

/// Physicists' Hermite values H_0..H_m at t.
fn hermite_values(m: usize, t: f64) -> Vec<f64> {
    let mut h = vec![1.0; m + 1];
    if m >= 1 {
        h[1] = 2.0 * t;
    }
    for k in 2..=m {
        h[k] = 2.0 * t * h[k - 1] - 2.0 * (k - 1) as f64 * h[k - 2];
    }
    h
}

/// Writes Σ_j c_j x^{2j} as Σ_k d_k H_k(√(2π) x); only even k occur.
fn hermite_expansion(coeffs: &[f64]) -> Vec<f64> {
    let deg = 2 * coeffs.len().saturating_sub(1);
    let mut d = vec![0.0; deg + 1];
    let mut fact = vec![1.0f64; deg + 1];
    for i in 1..=deg {
        fact[i] = fact[i - 1] * i as f64;
    }
    for (j, c) in coeffs.iter().enumerate() {
        let m = 2 * j;
        // x^m = t^m / (2π)^j and t^m = m!/2^m Σ_l H_{m−2l}(t) / (l! (m−2l)!).
        let scale = c / (2.0 * PI).powi(j as i32) * fact[m] / 2f64.powi(m as i32);
        for l in 0..=j {
            d[m - 2 * l] += scale / (fact[l] * fact[m - 2 * l]);
        }
    }
    d
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Zero => 0.0,
            TestFunction::Gaussian { a } => (-PI * a * x * x).exp(),
            TestFunction::Hermite { coeffs } => {
                let x2 = x * x;
                coeffs.iter().rev().fold(0.0, |acc, c| acc * x2 + c) * (-PI * x2).exp()
            }
        }
    }

    pub fn eval_hat(&self, xi: f64) -> f64 {
        match self {
            TestFunction::Zero => 0.0,
            TestFunction::Gaussian { a } => (-PI * xi * xi / a).exp() / a.sqrt(),
            TestFunction::Hermite { coeffs } => {
                // H_k(√(2π)x) e^{−πx²} has eigenvalue (−i)^k.
                let d = hermite_expansion(coeffs);
                let h = hermite_values(d.len() - 1, (2.0 * PI).sqrt() * xi);
                let s: f64 = d
                    .iter()
                    .zip(&h)
                    .enumerate()
                    .map(|(k, (dk, hk))| if k % 4 == 2 { -dk * hk } else { dk * hk })
                    .sum();
                s * (-PI * xi * xi).exp()
            }
        }
    }

    pub fn eval_complex(&self, z: Complex<f64>) -> Complex<f64> {
        match self {
            TestFunction::Zero => Complex::new(0.0, 0.0),
            TestFunction::Gaussian { a } => (z * z * (-PI * a)).exp(),
            TestFunction::Hermite { coeffs } => {
                let z2 = z * z;
                coeffs.iter().rev().fold(Complex::new(0.0, 0.0), |acc, c| acc * z2 + c) * (z2 * -PI).exp()
            }
        }
    }
}

/// Sample vector in slot order (z, f(x_1..x_N), f̂(y_1..y_N)), where the
/// z slot is f(x_0) + f̂(y_0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub truncation: usize,
    pub values: Vec<f64>,
}

impl Samples {
    pub fn z(&self) -> f64 {
        self.values[0]
    }

    pub fn space(&self) -> &[f64] {
        &self.values[1..=self.truncation]
    }

    pub fn freq(&self) -> &[f64] {
        &self.values[self.truncation + 1..]
    }
}

pub fn sample(f: &TestFunction, plan: &NodePlan) -> Samples {
    let n = plan.truncation;
    let xs = plan.xs();
    let ys = plan.ys();
    let mut values = vec![0.0; 2 * n + 1];
    values[0] = f.eval(xs[0]) + f.eval_hat(ys[0]);
    for k in 1..=n {
        values[Slot::X(k).index(n)] = f.eval(xs[k]);
        values[Slot::Y(k).index(n)] = f.eval_hat(ys[k]);
    }
    Samples { truncation: n, values }
}

/// Table point for a real abscissa; the basis is even so |x| is used.
pub fn grid_node(x: f64) -> SquareNode {
    SquareNode::from_x(x.abs())
}

/// Every real node a plan plus an evaluation grid needs, without repeats.
pub fn nodes_for(plan: &NodePlan, grid: &[f64]) -> Vec<SquareNode> {
    let mut out = plan.all_nodes();
    for x in grid {
        let g = grid_node(*x);
        if !out.iter().any(|p| p.k == g.k && p.eps.to_bits() == g.eps.to_bits()) {
            out.push(g);
        }
    }
    out
}

fn lookup(table: &BasisTable, x: f64) -> Result<usize> {
    table.find_real(grid_node(x)).ok_or(FilError::MissingValue { n: 0, node: 0 })
}

/// F(x) and F̂(x) for coordinates c in slot order.
fn synth_at(c: &[f64], n: usize, table: &BasisTable, i: usize) -> Result<(f64, f64)> {
    let a0 = table.a_real(0, i)?.0;
    let mut f = c[0] * a0;
    let mut fh = c[0] * a0;
    for k in 1..=n {
        let (a, ah) = table.a_real(k, i)?;
        let (x, y) = (c[Slot::X(k).index(n)], c[Slot::Y(k).index(n)]);
        f += x * a + y * ah;
        fh += x * ah + y * a;
    }
    Ok((f, fh))
}

/// Truncated interpolation sum Σ f(√n) a_n + f̂(√n) â_n on the grid,
/// i.e. synthesis with the samples used directly as coordinates.
pub fn direct_synthesis(samples: &Samples, table: &BasisTable, grid: &[f64]) -> Result<Vec<f64>> {
    let n = samples.truncation;
    if table.n_max() < n {
        return Err(FilError::Dimension(format!("table holds n <= {}, samples need {n}", table.n_max())));
    }
    grid.iter().map(|x| Ok(synth_at(&samples.values, n, table, lookup(table, *x)?)?.0)).collect()
}

/// Coordinates T⁻¹·samples (T⁻¹ unweighted).
pub fn coordinates(samples: &Samples, t_inv: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = samples.values.len();
    if t_inv.nrows() != dim || t_inv.ncols() != dim {
        return Err(FilError::Dimension(format!("inverse is {}x{}, samples have {dim} entries", t_inv.nrows(), t_inv.ncols())));
    }
    Ok((t_inv * DVector::from_column_slice(&samples.values)).as_slice().to_vec())
}

pub fn reconstruct_values(samples: &Samples, t_inv: &DMatrix<f64>, table: &BasisTable, grid: &[f64]) -> Result<Vec<f64>> {
    let c = coordinates(samples, t_inv)?;
    direct_synthesis(&Samples { truncation: samples.truncation, values: c }, table, grid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormError {
    pub alpha: u32,
    pub beta: u32,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub truncation: usize,
    pub grid: Vec<f64>,
    pub reconstruction: Vec<f64>,
    pub truth: Vec<f64>,
    pub sup_error: f64,
    pub seminorm_errors: Vec<SeminormError>,
    /// Largest |F(x_k) − f(x_k)|, |F̂(y_k) − f̂(y_k)| and z-slot mismatch.
    pub node_residual: f64,
    pub provenance: String,
}

impl ReconstructionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,truth,reconstruction,abs_error\n");
        for ((x, t), r) in self.grid.iter().zip(&self.truth).zip(&self.reconstruction) {
            let _ = writeln!(out, "{x},{t:e},{r:e},{:e}", (t - r).abs());
        }
        out
    }
}

/// Applies T⁻¹ to the samples of f, synthesizes on `grid` and measures the
/// error. `seminorms` lists (α, β) pairs; they need a uniform grid.
pub fn reconstruct(
    f: &TestFunction,
    plan: &NodePlan,
    t_inv: &DMatrix<f64>,
    provenance: &str,
    table: &BasisTable,
    grid: &[f64],
    seminorms: &[(u32, u32)],
) -> Result<ReconstructionReport> {
    let n = plan.truncation;
    let samples = sample(f, plan);
    let c = coordinates(&samples, t_inv)?;
    let coords = Samples { truncation: n, values: c };
    let reconstruction = direct_synthesis(&coords, table, grid)?;
    let truth: Vec<f64> = grid.iter().map(|x| f.eval(*x)).collect();
    let err: Vec<f64> = truth.iter().zip(&reconstruction).map(|(t, r)| r - t).collect();
    let sup_error = err.iter().fold(0.0f64, |m, e| m.max(e.abs()));

    let mut seminorm_errors = Vec::new();
    if !seminorms.is_empty() {
        let h = uniform_step(grid)?;
        for &(alpha, beta) in seminorms {
            seminorm_errors.push(SeminormError { alpha, beta, value: seminorm(grid, &err, h, alpha, beta)? });
        }
    }

    let mut node_residual = 0.0f64;
    let xs = plan.space_nodes();
    let ys = plan.freq_nodes();
    let idx = |node: SquareNode| table.find_real(node).ok_or(FilError::MissingValue { n: 0, node: node.k as usize });
    let (f0, _) = synth_at(&coords.values, n, table, idx(xs[0])?)?;
    let (_, fh0) = synth_at(&coords.values, n, table, idx(ys[0])?)?;
    node_residual = node_residual.max((f0 + fh0 - samples.z()).abs());
    for k in 1..=n {
        let (fx, _) = synth_at(&coords.values, n, table, idx(xs[k])?)?;
        let (_, fy) = synth_at(&coords.values, n, table, idx(ys[k])?)?;
        node_residual = node_residual.max((fx - samples.space()[k - 1]).abs()).max((fy - samples.freq()[k - 1]).abs());
    }

    Ok(ReconstructionReport {
        truncation: n,
        grid: grid.to_vec(),
        reconstruction,
        truth,
        sup_error,
        seminorm_errors,
        node_residual,
        provenance: provenance.to_string(),
    })
}

/// a, a+h, …, up to b (inclusive within half a step).
pub fn uniform_grid(a: f64, b: f64, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) || !(b >= a) {
        return Err(FilError::Parse(format!("grid {a}:{b}:{h} is empty")));
    }
    let count = ((b - a) / h + 0.5).floor() as usize + 1;
    Ok((0..count).map(|i| a + i as f64 * h).collect())
}

/// Parses "a:b:step".
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|e| FilError::Parse(format!("grid {s:?}: {e}"))))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [a, b, h] => uniform_grid(*a, *b, *h),
        _ => Err(FilError::Parse(format!("grid {s:?}: expected a:b:step"))),
    }
}

fn uniform_step(grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 {
        return Err(FilError::Empty("grid".into()));
    }
    let h = grid[1] - grid[0];
    let uniform = grid.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0));
    if !(h > 0.0) || !uniform {
        return Err(FilError::Contract("seminorms need an increasing uniform grid".into()));
    }
    Ok(h)
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Second-order centered β-th difference at index i with step multiple m,
/// or None when the stencil leaves the grid.
fn centered(values: &[f64], i: usize, h: f64, m: usize, beta: u32) -> Option<f64> {
    let even = beta - beta % 2;
    let reach = (even / 2) as usize * m + if beta % 2 == 1 { m } else { 0 };
    if i < reach || i + reach >= values.len() {
        return None;
    }
    // δ^{even} at offset o (in units of m) from i.
    let even_diff = |o: isize| -> f64 {
        let mut s = 0.0;
        for j in 0..=even {
            let off = (even as isize / 2 - j as isize) * m as isize + o;
            let sgn = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sgn * binom(even, j) * values[(i as isize + off) as usize];
        }
        s
    };
    let step = h * m as f64;
    let d = if beta % 2 == 1 {
        (even_diff(m as isize) - even_diff(-(m as isize))) / (2.0 * step)
    } else {
        even_diff(0)
    };
    Some(d / step.powi(even as i32))
}

/// β-th derivative at every grid point where the Richardson-combined
/// centered differences (steps h and 2h) fit; β ≤ 4.
pub fn derivative(values: &[f64], h: f64, beta: u32) -> Result<Vec<Option<f64>>> {
    let reach = 2 * beta.div_ceil(2) as usize;
    if beta > 4 || values.len() < 2 * reach + 3 {
        return Err(FilError::GridTooCoarse { beta: beta as usize, h });
    }
    Ok((0..values.len())
        .map(|i| {
            if beta == 0 {
                return Some(values[i]);
            }
            match (centered(values, i, h, 1, beta), centered(values, i, h, 2, beta)) {
                (Some(d1), Some(d2)) => Some((4.0 * d1 - d2) / 3.0),
                _ => None,
            }
        })
        .collect())
}

/// sup |x^α f^{(β)}(x)| over the grid points where `derivative` is defined.
pub fn seminorm(grid: &[f64], values: &[f64], h: f64, alpha: u32, beta: u32) -> Result<f64> {
    if grid.len() != values.len() {
        return Err(FilError::Dimension(format!("{} grid points, {} values", grid.len(), values.len())));
    }
    let d = derivative(values, h, beta)?;
    Ok(grid
        .iter()
        .zip(d)
        .filter_map(|(x, d)| d.map(|d| (x.powi(alpha as i32) * d).abs()))
        .fold(0.0f64, f64::max))
}

/// Seminorm of a test function sampled on a uniform grid.
pub fn seminorm_of(f: &TestFunction, grid: &[f64], alpha: u32, beta: u32) -> Result<f64> {
    let h = uniform_step(grid)?;
    let v: Vec<f64> = grid.iter().map(|x| f.eval(*x)).collect();
    seminorm(grid, &v, h, alpha, beta)
}

/// max |f(x)| e^{h|x|} + max |f̂(x)| e^{h|x|} over the grid. Fails when a
/// weighted maximum sits on the outermost grid point, which means the grid
/// cannot see the decay at this h.
pub fn gelfand_shilov_norm(grid: &[f64], f: &[f64], f_hat: &[f64], h: f64) -> Result<f64> {
    if grid.is_empty() || f.len() != grid.len() || f_hat.len() != grid.len() {
        return Err(FilError::Dimension("grid and value lengths differ".into()));
    }
    let rmax = grid.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut total = 0.0;
    for vals in [f, f_hat] {
        let (mut best, mut at) = (0.0f64, 0.0f64);
        for (x, v) in grid.iter().zip(vals) {
            let w = v.abs() * (h * x.abs()).exp();
            if w > best {
                best = w;
                at = x.abs();
            }
        }
        if h > 0.0 && best > 0.0 && at == rmax {
            return Err(FilError::NotInClass(h));
        }
        total += best;
    }
    Ok(total)
}
