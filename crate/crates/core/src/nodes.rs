//! Node sequences √(n + ε_n), their perturbations, the gap-functional
//! classifier and interval matching of arbitrary sequences against √n.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::SquareNode;
use crate::error::{FilError, Result};
use crate::perturb_op::WeightScheme;

/// Closed-form or explicit perturbation sequence ε_n, n ≥ 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EpsGenerator {
    Zero,
    /// a (1+n)^{−alpha}
    Power { a: f64, alpha: f64 },
    /// (−1)^n a (1+n)^{−alpha}
    Alternating { a: f64, alpha: f64 },
    /// c e^{−rate·n}
    Exp { c: f64, rate: f64 },
    /// Explicit values; indices past the end are unperturbed.
    List { values: Vec<f64> },
}

impl EpsGenerator {
    pub fn at(&self, n: usize) -> f64 {
        let m = 1.0 + n as f64;
        match self {
            EpsGenerator::Zero => 0.0,
            EpsGenerator::Power { a, alpha } => a * m.powf(-alpha),
            EpsGenerator::Alternating { a, alpha } => {
                let v = a * m.powf(-alpha);
                if n % 2 == 0 {
                    v
                } else {
                    -v
                }
            }
            EpsGenerator::Exp { c, rate } => c * (-rate * n as f64).exp(),
            EpsGenerator::List { values } => values.get(n).copied().unwrap_or(0.0),
        }
    }

    pub fn take(&self, count: usize) -> Vec<f64> {
        (0..count).map(|n| self.at(n)).collect()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            EpsGenerator::Zero => true,
            EpsGenerator::List { values } => values.iter().all(|v| *v == 0.0),
            EpsGenerator::Power { a, .. } | EpsGenerator::Alternating { a, .. } => *a == 0.0,
            EpsGenerator::Exp { c, .. } => *c == 0.0,
        }
    }

    /// Reads a list from a file: JSON array, or whitespace/comma separated numbers.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let values: Vec<f64> = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(_) => text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().map_err(|e| FilError::Parse(format!("{s:?}: {e}"))))
                .collect::<Result<_>>()?,
        };
        Ok(EpsGenerator::List { values })
    }
}

impl FromStr for EpsGenerator {
    type Err = FilError;

    /// `zero`, `power:a,alpha`, `alt:a,alpha`, `exp:c,rate`, `file:PATH`,
    /// `list:v0,v1,…`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums = || -> Result<Vec<f64>> {
            rest.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<f64>().map_err(|e| FilError::Parse(format!("{t:?} in {s:?}: {e}"))))
                .collect()
        };
        let two = |v: Vec<f64>| -> Result<(f64, f64)> {
            match v.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => Err(FilError::Parse(format!("{s:?} needs two numbers"))),
            }
        };
        match kind {
            "zero" | "none" => Ok(EpsGenerator::Zero),
            "power" => two(nums()?).map(|(a, alpha)| EpsGenerator::Power { a, alpha }),
            "alt" => two(nums()?).map(|(a, alpha)| EpsGenerator::Alternating { a, alpha }),
            "exp" => two(nums()?).map(|(c, rate)| EpsGenerator::Exp { c, rate }),
            "list" => Ok(EpsGenerator::List { values: nums()? }),
            "file" => EpsGenerator::from_file(Path::new(rest)),
            other => Err(FilError::Parse(format!("unknown perturbation kind {other:?}"))),
        }
    }
}

/// Space perturbation ε and optional frequency perturbation δ (ε when absent).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub eps: EpsGenerator,
    pub delta: Option<EpsGenerator>,
}

impl Perturbation {
    pub fn zero() -> Self {
        Perturbation { eps: EpsGenerator::Zero, delta: None }
    }

    pub fn same(eps: EpsGenerator) -> Self {
        Perturbation { eps, delta: None }
    }

    pub fn delta(&self) -> &EpsGenerator {
        self.delta.as_ref().unwrap_or(&self.eps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub admissible: bool,
    /// Largest |ε_n|(1+n)^{5/4+δ} seen and where.
    pub max_ratio: f64,
    pub worst_index: usize,
    pub checked: usize,
}

/// Scans |ε_n| < c(1+n)^{−5/4−δ} for n < count.
pub fn check_decay(eps: &EpsGenerator, c: f64, delta: f64, count: usize) -> DecayReport {
    let expo = 1.25 + delta;
    let mut max_ratio: f64 = 0.0;
    let mut worst = 0;
    for n in 0..count {
        let r = eps.at(n).abs() * (1.0 + n as f64).powf(expo);
        if r > max_ratio {
            max_ratio = r;
            worst = n;
        }
    }
    DecayReport { admissible: max_ratio < c, max_ratio, worst_index: worst, checked: count }
}

/// Truncated node plan: x_n = √(n+ε_n) and y_n = √(n+δ_n) for n ≤ N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodePlan {
    pub truncation: usize,
    pub perturbation: Perturbation,
    pub eps: Vec<f64>,
    pub delta: Vec<f64>,
    pub weight: WeightScheme,
}

impl NodePlan {
    pub fn new(truncation: usize, perturbation: Perturbation, weight: WeightScheme) -> Result<Self> {
        let eps = perturbation.eps.take(truncation + 1);
        let delta = perturbation.delta().take(truncation + 1);
        for (name, seq) in [("eps", &eps), ("delta", &delta)] {
            if seq[0] < 0.0 {
                return Err(FilError::Contract(format!("{name}_0 = {} must be >= 0", seq[0])));
            }
            for (n, e) in seq.iter().enumerate() {
                if !e.is_finite() || (n as f64 + e) < 0.0 {
                    return Err(FilError::Contract(format!("{name}_{n} = {e} puts the node off the real line")));
                }
            }
            if let Some(i) = (1..seq.len()).find(|&i| i as f64 + seq[i] <= (i - 1) as f64 + seq[i - 1]) {
                return Err(FilError::NonMonotone(i));
            }
        }
        Ok(NodePlan { truncation, perturbation, eps, delta, weight })
    }

    pub fn unperturbed(truncation: usize, weight: WeightScheme) -> Self {
        NodePlan::new(truncation, Perturbation::zero(), weight).expect("exact nodes are admissible")
    }

    pub fn space_nodes(&self) -> Vec<SquareNode> {
        self.eps.iter().enumerate().map(|(n, e)| SquareNode::new(n as u64, *e)).collect()
    }

    pub fn freq_nodes(&self) -> Vec<SquareNode> {
        self.delta.iter().enumerate().map(|(n, e)| SquareNode::new(n as u64, *e)).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.space_nodes().iter().map(SquareNode::x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.freq_nodes().iter().map(SquareNode::x).collect()
    }

    /// Distinct real nodes needed to tabulate this plan, ordered.
    pub fn all_nodes(&self) -> Vec<SquareNode> {
        let mut out = self.space_nodes();
        for d in self.freq_nodes() {
            if !out.iter().any(|p| p.k == d.k && p.eps.to_bits() == d.eps.to_bits()) {
                out.push(d);
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.eps == self.delta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Supercritical,
    Subcritical,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Supercritical => "supercritical",
            Verdict::Subcritical => "subcritical",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapStats {
    pub sup: f64,
    pub inf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub x: GapStats,
    pub y: GapStats,
    pub window: (usize, usize),
    pub tolerance: f64,
}

pub const CRITICAL: f64 = 0.5;
pub const CLASSIFY_TOL: f64 = 0.02;

fn check_increasing(v: &[f64]) -> Result<()> {
    match (1..v.len()).find(|&i| !(v[i] > v[i - 1])) {
        Some(i) => Err(FilError::NonMonotone(i)),
        None => Ok(()),
    }
}

/// |v_n|^{p−1}|v_{n+1} − v_n| over the window, sup and inf.
fn gap_stats(v: &[f64], p: f64, lo: usize, hi: usize) -> GapStats {
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    for n in lo..hi {
        let g = v[n].abs().powf(p - 1.0) * (v[n + 1] - v[n]).abs();
        sup = sup.max(g);
        inf = inf.min(g);
    }
    GapStats { sup, inf }
}

/// Windowed tail estimate of the gap functionals of x with exponent p and
/// of y with the conjugate exponent q, over n in [n_window/2, n_window).
pub fn classify_pair(xs: &[f64], ys: &[f64], p: f64, q: f64, n_window: usize) -> Result<Classification> {
    if !(p > 1.0 && q > 1.0) || (1.0 / p + 1.0 / q - 1.0).abs() > 1e-12 {
        return Err(FilError::Contract(format!("exponents p = {p}, q = {q} are not conjugate")));
    }
    if xs.is_empty() || ys.is_empty() {
        return Err(FilError::Empty("node sequence".into()));
    }
    check_increasing(xs)?;
    check_increasing(ys)?;
    let hi = n_window.min(xs.len() - 1).min(ys.len() - 1);
    let lo = hi / 2;
    if hi <= lo {
        return Err(FilError::Empty(format!("window of {n_window} leaves no gaps")));
    }
    let x = gap_stats(xs, p, lo, hi);
    let y = gap_stats(ys, q, lo, hi);
    let verdict = if x.sup < CRITICAL - CLASSIFY_TOL && y.sup < CRITICAL - CLASSIFY_TOL {
        Verdict::Supercritical
    } else if x.inf > CRITICAL + CLASSIFY_TOL || y.inf > CRITICAL + CLASSIFY_TOL {
        Verdict::Subcritical
    } else {
        Verdict::Indeterminate
    };
    Ok(Classification { verdict, x, y, window: (lo, hi), tolerance: CLASSIFY_TOL })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeMatch {
    pub n: usize,
    pub m: usize,
    pub x: f64,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub matches: Vec<NodeMatch>,
    /// First n whose √n lies outside [x_0, x_last); the mapping stops there.
    pub boundary: Option<usize>,
    /// δ = (D−1)/2 − 5/4 implied by |ε_n| ≤ c_D n^{(1−D)/2}.
    pub delta: f64,
    /// max over n ≥ 1 of |ε_n| n^{(D−1)/2} / c_D.
    pub envelope_ratio: f64,
    pub admissible: bool,
}

/// For each n ≤ n_max, m(n) is the index with x_m ≤ √n < x_{m+1} and
/// ε_n = x_m² − n.
pub fn match_nodes(xs: &[f64], n_max: usize, d: f64, c_d: f64) -> Result<MatchReport> {
    if xs.is_empty() {
        return Err(FilError::Empty("node sequence".into()));
    }
    check_increasing(xs)?;
    let mut matches = Vec::new();
    let mut boundary = None;
    let last = xs[xs.len() - 1];
    for n in 0..=n_max {
        let r = (n as f64).sqrt();
        if r < xs[0] || r >= last {
            boundary = Some(n);
            break;
        }
        // partition_point gives the first index with x > √n.
        let m = xs.partition_point(|x| *x <= r) - 1;
        let x = xs[m];
        // A node equal to the correctly rounded √n is the exact node.
        let eps = if x == r { 0.0 } else { x.mul_add(x, -(n as f64)) };
        matches.push(NodeMatch { n, m, x, eps });
    }
    let expo = (d - 1.0) / 2.0;
    let envelope_ratio = matches
        .iter()
        .filter(|mt| mt.n >= 1)
        .map(|mt| mt.eps.abs() * (mt.n as f64).powf(expo) / c_d)
        .fold(0.0, f64::max);
    let delta = expo - 1.25;
    Ok(MatchReport { matches, boundary, delta, envelope_ratio, admissible: delta > 0.0 && envelope_ratio <= 1.0 })
}
