//! The truncated analysis-synthesis operator for perturbed nodes.
//!
//! Coordinates are (z, 𝐱_1..𝐱_N, 𝐲_1..𝐲_N) and stand for the function
//! `F = z a_0 + Σ 𝐱_i a_i + Σ 𝐲_i â_i` (note a_0 = â_0, F̂ swaps a_i and â_i).
//! T maps them to
//!
//! ```text
//! T⁰ = F(√ε₀) + F̂(√δ₀),   T¹_k = F(√(k+ε_k)),   T²_k = F̂(√(k+δ_k))
//! ```
//!
//! and is stored in the orthonormal basis of the weighted space, i.e. entry
//! (k, n) is multiplied by weight(k)/weight(n). For exact nodes T = I.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::basis::{BasisTable, SquareNode};
use crate::error::{FilError, Result};
use crate::nodes::NodePlan;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightScheme {
    /// (1+n)^s
    Polynomial { s: f64 },
    /// e^{cn}
    Exponential { c: f64 },
}

impl WeightScheme {
    pub fn weight(&self, n: usize) -> f64 {
        match self {
            WeightScheme::Polynomial { s } => (1.0 + n as f64).powf(*s),
            WeightScheme::Exponential { c } => (c * n as f64).exp(),
        }
    }
}

impl std::str::FromStr for WeightScheme {
    type Err = FilError;

    /// `s=K` or `exp=C`.
    fn from_str(s: &str) -> Result<Self> {
        let (k, v) = s.split_once('=').ok_or_else(|| FilError::Parse(format!("weight {s:?}: expected s=K or exp=C")))?;
        let v: f64 = v.trim().parse().map_err(|e| FilError::Parse(format!("weight {s:?}: {e}")))?;
        match k.trim() {
            "s" => Ok(WeightScheme::Polynomial { s: v }),
            "exp" | "c" => Ok(WeightScheme::Exponential { c: v }),
            other => Err(FilError::Parse(format!("unknown weight kind {other:?}"))),
        }
    }
}

/// Slot layout helpers for the (2N+1)-vector (z, 𝐱, 𝐲).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Z,
    X(usize),
    Y(usize),
}

impl Slot {
    pub fn index(self, n: usize) -> usize {
        match self {
            Slot::Z => 0,
            Slot::X(i) => i,
            Slot::Y(i) => n + i,
        }
    }

    pub fn from_index(i: usize, n: usize) -> Slot {
        if i == 0 {
            Slot::Z
        } else if i <= n {
            Slot::X(i)
        } else {
            Slot::Y(i - n)
        }
    }

    /// Sequence index carried by the slot (0 for z).
    pub fn order(self) -> usize {
        match self {
            Slot::Z => 0,
            Slot::X(i) | Slot::Y(i) => i,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OperatorTruncation {
    pub truncation: usize,
    pub weight: WeightScheme,
    /// T in the weighted orthonormal basis.
    pub matrix: DMatrix<f64>,
    pub plan: NodePlan,
}

/// (a_k, â_k) at a tabulated node for k = 0..=n.
fn pairs_at(table: &BasisTable, node: SquareNode, n: usize, label: usize) -> Result<Vec<(f64, f64)>> {
    let i = table.find_real(node).ok_or(FilError::MissingValue { n: 0, node: label })?;
    (0..=n).map(|k| table.a_real(k, i).map_err(|_| FilError::MissingValue { n: k, node: label })).collect()
}

impl OperatorTruncation {
    pub fn dim(&self) -> usize {
        2 * self.truncation + 1
    }

    /// weight of the sequence index carried by each slot.
    pub fn slot_weights(&self) -> Vec<f64> {
        slot_weights(&self.weight, self.truncation)
    }

    /// T in the unweighted coordinates.
    pub fn unweighted(&self) -> DMatrix<f64> {
        let w = self.slot_weights();
        DMatrix::from_fn(self.dim(), self.dim(), |r, c| self.matrix[(r, c)] * w[c] / w[r])
    }

    pub fn hs_defect(&self) -> f64 {
        hs_defect(&self.matrix)
    }

    pub fn invert_neumann(&self, tol: f64, max_terms: usize) -> Result<Inverse> {
        invert_neumann(&self.matrix, tol, max_terms)
    }

    pub fn invert_direct(&self) -> Result<Inverse> {
        invert_direct(&self.matrix)
    }

    /// Frobenius mass of the entries discarded by truncating the columns at
    /// N, estimated from the envelope |∂a_n| ≲ (1+n)^{5/4} log³(2+n) with unit
    /// constant and |a_n(√(k+ε)) − a_n(√k)| ≲ |ε| |a_n'| / (2√k).
    pub fn tail_estimate(&self) -> f64 {
        let n = self.truncation;
        let mut sum = 0.0;
        for (k, (e, d)) in self.plan.eps.iter().zip(&self.plan.delta).enumerate() {
            let pert = e.abs().max(d.abs()) / (2.0 * (k as f64).sqrt()).max(1.0);
            if pert == 0.0 {
                continue;
            }
            let wk = self.weight.weight(k);
            for m in (n + 1)..=(4 * n).max(n + 1) {
                let env = (1.0 + m as f64).powf(1.25) * (2.0 + m as f64).ln().powi(3);
                let v = pert * env * wk / self.weight.weight(m);
                sum += 2.0 * 2.0 * v * v;
            }
        }
        sum.sqrt()
    }

    /// (row, col, value) CSV of the weighted matrix.
    pub fn to_csv(&self) -> String {
        matrix_csv(&self.matrix)
    }
}

pub fn slot_weights(weight: &WeightScheme, n: usize) -> Vec<f64> {
    (0..2 * n + 1).map(|i| weight.weight(Slot::from_index(i, n).order())).collect()
}

pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::from("row,col,value\n");
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let _ = writeln!(out, "{r},{c},{:e}", m[(r, c)]);
        }
    }
    out
}

/// Assembles T for `plan` truncated at N = plan.truncation from tabulated
/// values at every node of the plan.
pub fn build_truncation(plan: &NodePlan, table: &BasisTable) -> Result<OperatorTruncation> {
    let n = plan.truncation;
    if table.n_max() < n {
        return Err(FilError::MissingValue { n: table.n_max() + 1, node: 0 });
    }
    let xs = plan.space_nodes();
    let ys = plan.freq_nodes();
    let dim = 2 * n + 1;
    let w = slot_weights(&plan.weight, n);
    // Row r lists F or F̂ at one node as a linear form in (z, 𝐱, 𝐲).
    let rows: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let mut row = vec![0.0; dim];
            // F(node) gets (a_0, a_i, â_i); F̂(node) gets (a_0, â_i, a_i).
            let mut add = |node: SquareNode, hat: bool, label: usize| -> Result<()> {
                let v = pairs_at(table, node, n, label)?;
                row[0] += v[0].0;
                for i in 1..=n {
                    let (a, ah) = v[i];
                    let (fx, fy) = if hat { (ah, a) } else { (a, ah) };
                    row[Slot::X(i).index(n)] += fx;
                    row[Slot::Y(i).index(n)] += fy;
                }
                Ok(())
            };
            match Slot::from_index(r, n) {
                Slot::Z => {
                    add(xs[0], false, 0)?;
                    add(ys[0], true, 0)?;
                }
                Slot::X(k) => add(xs[k], false, k)?,
                Slot::Y(k) => add(ys[k], true, k)?,
            }
            for (c, v) in row.iter_mut().enumerate() {
                *v *= w[r] / w[c];
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let matrix = DMatrix::from_fn(dim, dim, |r, c| rows[r][c]);
    Ok(OperatorTruncation { truncation: n, weight: plan.weight.clone(), matrix, plan: plan.clone() })
}

/// ‖I − M‖_F.
pub fn hs_defect(m: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let d = if r == c { 1.0 - m[(r, c)] } else { -m[(r, c)] };
            s += d * d;
        }
    }
    s.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InverseMethod {
    Neumann,
    Direct,
}

#[derive(Clone, Debug)]
pub struct Inverse {
    /// Inverse in the same (weighted) coordinates as the input matrix.
    pub matrix: DMatrix<f64>,
    pub method: InverseMethod,
    /// Neumann terms summed, counting the identity.
    pub terms: Option<usize>,
    pub last_increment: Option<f64>,
    /// κ₁ = ‖M‖₁‖M⁻¹‖₁.
    pub condition: Option<f64>,
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols()).map(|c| m.column(c).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Σ_k (I − M)^k until the Frobenius norm of the increment drops below tol.
pub fn invert_neumann(m: &DMatrix<f64>, tol: f64, max_terms: usize) -> Result<Inverse> {
    if m.nrows() != m.ncols() {
        return Err(FilError::Dimension(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let defect = hs_defect(m);
    if defect >= 1.0 {
        return Err(FilError::NeumannInapplicable(defect));
    }
    let dim = m.nrows();
    let e = DMatrix::<f64>::identity(dim, dim) - m;
    let mut sum = DMatrix::<f64>::identity(dim, dim);
    let mut term = DMatrix::<f64>::identity(dim, dim);
    let mut last = f64::INFINITY;
    for k in 1..=max_terms {
        if last < tol {
            return Ok(Inverse {
                matrix: sum,
                method: InverseMethod::Neumann,
                terms: Some(k),
                last_increment: Some(last),
                condition: None,
            });
        }
        term = &e * &term;
        last = term.norm();
        sum += &term;
        if last == 0.0 {
            return Ok(Inverse {
                matrix: sum,
                method: InverseMethod::Neumann,
                terms: Some(k),
                last_increment: Some(0.0),
                condition: None,
            });
        }
    }
    if last < tol {
        return Ok(Inverse {
            matrix: sum,
            method: InverseMethod::Neumann,
            terms: Some(max_terms + 1),
            last_increment: Some(last),
            condition: None,
        });
    }
    Err(FilError::NeumannStalled { terms: max_terms, last })
}

/// LU inverse with a 1-norm condition number.
pub fn invert_direct(m: &DMatrix<f64>) -> Result<Inverse> {
    if m.nrows() != m.ncols() {
        return Err(FilError::Dimension(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let inv = m.clone().lu().try_inverse().ok_or(FilError::Singular)?;
    let cond = norm1(m) * norm1(&inv);
    if !cond.is_finite() || cond > 1e14 {
        return Err(FilError::Singular);
    }
    Ok(Inverse { matrix: inv, method: InverseMethod::Direct, terms: None, last_increment: None, condition: Some(cond) })
}

/// Coefficients of the perturbed basis: h_n = T⁻¹(e_{x,n}) and
/// g_n = T⁻¹(e_{y,n}), h_0 = T⁻¹(e_z), written in (a_k, â_k).
/// Index 0 of `gamma` holds the a_0 coefficient (the z slot) and
/// `gamma_tilde[·][0]` is always 0 since â_0 = a_0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbedBasisCoeffs {
    pub truncation: usize,
    pub h_gamma: Vec<Vec<f64>>,
    pub h_gamma_tilde: Vec<Vec<f64>>,
    pub g_gamma: Vec<Vec<f64>>,
    pub g_gamma_tilde: Vec<Vec<f64>>,
}

fn column_coeffs(t_inv: &DMatrix<f64>, col: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut g = vec![0.0; n + 1];
    let mut gt = vec![0.0; n + 1];
    g[0] = t_inv[(0, col)];
    for k in 1..=n {
        g[k] = t_inv[(Slot::X(k).index(n), col)];
        gt[k] = t_inv[(Slot::Y(k).index(n), col)];
    }
    (g, gt)
}

/// Undoes the weighting: T⁻¹ = W⁻¹ M⁻¹ W.
pub fn unweighted_inverse(inv: &Inverse, weight: &WeightScheme, n: usize) -> DMatrix<f64> {
    let w = slot_weights(weight, n);
    let dim = 2 * n + 1;
    DMatrix::from_fn(dim, dim, |r, c| inv.matrix[(r, c)] * w[c] / w[r])
}

/// (γ_{n,·}, γ̃_{n,·}) for h_n.
pub fn perturbed_coeffs(inv: &Inverse, weight: &WeightScheme, truncation: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let t_inv = unweighted_inverse(inv, weight, truncation);
    let col = if n == 0 { 0 } else { Slot::X(n).index(truncation) };
    column_coeffs(&t_inv, col, truncation)
}

impl PerturbedBasisCoeffs {
    pub fn from_inverse(inv: &Inverse, weight: &WeightScheme, truncation: usize) -> Self {
        let n = truncation;
        let t_inv = unweighted_inverse(inv, weight, n);
        let mut out = PerturbedBasisCoeffs {
            truncation: n,
            h_gamma: Vec::with_capacity(n + 1),
            h_gamma_tilde: Vec::with_capacity(n + 1),
            g_gamma: Vec::with_capacity(n + 1),
            g_gamma_tilde: Vec::with_capacity(n + 1),
        };
        for i in 0..=n {
            let (g, gt) = column_coeffs(&t_inv, if i == 0 { 0 } else { Slot::X(i).index(n) }, n);
            out.h_gamma.push(g);
            out.h_gamma_tilde.push(gt);
            // g_0 is not a separate function; h_0 covers the z slot.
            let (g, gt) = if i == 0 { (vec![0.0; n + 1], vec![0.0; n + 1]) } else { column_coeffs(&t_inv, Slot::Y(i).index(n), n) };
            out.g_gamma.push(g);
            out.g_gamma_tilde.push(gt);
        }
        out
    }

    /// Σ_k |γ_{n,k}| + |γ̃_{n,k}| per n, for h.
    pub fn row_sums(&self) -> Vec<f64> {
        self.h_gamma
            .iter()
            .zip(&self.h_gamma_tilde)
            .map(|(g, gt)| g.iter().chain(gt).map(|v| v.abs()).sum())
            .collect()
    }

    /// Least-squares slope of −ln|γ_{n,k}| in k over k > n, per n; None
    /// when fewer than three usable entries exist.
    pub fn decay_rates(&self) -> Vec<Option<f64>> {
        self.h_gamma
            .iter()
            .zip(&self.h_gamma_tilde)
            .enumerate()
            .map(|(n, (g, gt))| {
                let pts: Vec<(f64, f64)> = ((n + 1)..g.len())
                    .filter_map(|k| {
                        let v = g[k].abs().max(gt[k].abs());
                        (v > 1e-300).then(|| (k as f64, v.ln()))
                    })
                    .collect();
                crate::bounds_lab::linear_fit(&pts).map(|f| -f.slope)
            })
            .collect()
    }

    /// (h_n(x), g_n(x)) for all n from the values (a_k(x), â_k(x)), k ≤ N.
    pub fn evaluate<V>(&self, a: &[V], a_hat: &[V]) -> Result<Vec<(V, V)>>
    where
        V: Copy + Default + std::ops::Add<Output = V> + std::ops::Mul<f64, Output = V>,
    {
        let n = self.truncation;
        if a.len() <= n || a_hat.len() <= n {
            return Err(FilError::Dimension(format!("need {} basis values, got {}", n + 1, a.len().min(a_hat.len()))));
        }
        let comb = |g: &[f64], gt: &[f64]| -> V {
            let mut acc = a[0] * g[0];
            for k in 1..=n {
                acc = acc + a[k] * g[k] + a_hat[k] * gt[k];
            }
            acc
        };
        Ok((0..=n)
            .map(|i| (comb(&self.h_gamma[i], &self.h_gamma_tilde[i]), comb(&self.g_gamma[i], &self.g_gamma_tilde[i])))
            .collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,k,gamma,gamma_tilde,g_gamma,g_gamma_tilde\n");
        for n in 0..=self.truncation {
            for k in 0..=self.truncation {
                let _ = writeln!(
                    out,
                    "{n},{k},{:e},{:e},{:e},{:e}",
                    self.h_gamma[n][k], self.h_gamma_tilde[n][k], self.g_gamma[n][k], self.g_gamma_tilde[n][k]
                );
            }
        }
        out
    }
}

/// h_n and g_n at the i-th real point of the table.
pub fn eval_perturbed_basis(coeffs: &PerturbedBasisCoeffs, table: &BasisTable, i: usize) -> Result<Vec<(f64, f64)>> {
    let (a, ah): (Vec<f64>, Vec<f64>) =
        (0..=coeffs.truncation).map(|k| table.a_real(k, i)).collect::<Result<Vec<_>>>()?.into_iter().unzip();
    coeffs.evaluate(&a, &ah)
}

/// JSON summary of an operator run.
pub fn summary_json(op: &OperatorTruncation, inv: &Inverse, coeffs: &PerturbedBasisCoeffs) -> serde_json::Value {
    json!({
        "truncation": op.truncation,
        "weight": op.weight,
        "hs_defect": op.hs_defect(),
        "tail_estimate": op.tail_estimate(),
        "method": inv.method,
        "neumann_terms": inv.terms,
        "last_increment": inv.last_increment,
        "condition_1": inv.condition,
        "row_sums": coeffs.row_sums(),
        "decay_rates": coeffs.decay_rates(),
    })
}
