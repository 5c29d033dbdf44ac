//! Numerical evaluation of g_n^± and of b_n^± = (a_n ± â_n)/2.
//!
//! b_n^±(x) = ¼ ∫ g_n^±(z) e^{iπx²z} dz along the upper unit semicircle from
//! −1 to 1. Three routes are implemented:
//!
//! * contour: composite Gauss–Legendre on z = e^{iθ}, two panels per dyadic
//!   level toward θ = 0 and θ = π. Works for complex x.
//! * real: for s = x² real the path is pushed onto Re z = ±1 up to height 1
//!   and closed horizontally, which gives
//!   `b(s) = ½[sin(πs) ∫₀¹ g(1+it) e^{−πst} dt + Σ_j c_j e^{−π(j+s)} sinc(j+s)]`
//!   with c_j the expansion coefficients of g. Nodes are carried as
//!   s = k + ε so that sin(πs) and every sinc factor are formed from ε; at
//!   ε = 0 only c_{−k} survives and b = c_{−k}/2 exactly.
//! * tail: for s ≥ n the Laplace form `½ sin(πs) ∫₀^∞ g(1+it) e^{−πst} dt`,
//!   with the principal part and constant term integrated in closed form.

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::gn::{GnFamily, Parity};
use crate::error::{FilError, Result};
use crate::modular::{line_values, thetas_at};
use crate::qseries::Coeff;
use crate::quadrature::GaussLegendre;
use crate::scalar::{cexp, cscale, Real};

/// A real node x = √(k + ε) kept in split form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareNode {
    pub k: u64,
    pub eps: f64,
}

impl SquareNode {
    pub fn exact(k: u64) -> Self {
        SquareNode { k, eps: 0.0 }
    }

    pub fn new(k: u64, eps: f64) -> Self {
        SquareNode { k, eps }
    }

    /// Splits x² as k + ε with k = round(x²); ε is the correctly rounded
    /// value of x² − k.
    pub fn from_x(x: f64) -> Self {
        let s = x * x;
        let k = s.round().max(0.0);
        SquareNode { k: k as u64, eps: x.mul_add(x, -k) }
    }

    pub fn s(&self) -> f64 {
        self.k as f64 + self.eps
    }

    pub fn x(&self) -> f64 {
        self.s().max(0.0).sqrt()
    }
}

/// Quadrature knobs shared by every route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadParams {
    /// Gauss–Legendre points per panel; 0 derives it from the precision.
    pub gl_points: usize,
    /// Minimum number of dyadic levels toward each cusp of the semicircle.
    /// More are added when the working precision demands it.
    pub contour_levels: usize,
    /// Panel width in ln t on the vertical line.
    pub line_panel: f64,
    /// Largest |x| handed to the contour route.
    pub contour_radius: f64,
    /// Largest real x handed to the real and tail routes.
    pub real_max: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams { gl_points: 0, contour_levels: 6, line_panel: 0.25, contour_radius: 3.0, real_max: 20.0 }
    }
}

impl QuadParams {
    pub fn points_for_bits(&self, bits: usize) -> usize {
        if self.gl_points > 0 {
            self.gl_points
        } else {
            16 + bits / 12
        }
    }
}

/// Which τ-side weight the minus generating kernel carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelVariant {
    /// θ(τ)·θ³(z)(1−2λ(z)) J(τ)/(J(z)−J(τ)); reproduces θ³(1−2λ)P_n^−(1/J).
    Corrected,
    /// θ(z)(1−2λ(z))θ³(τ) J(τ)/(J(z)−J(τ)) as sometimes printed.
    Literal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratingParams {
    /// Height T of the segment [−1+iT, 1+iT].
    pub height: f64,
    /// Trapezoid points on the segment.
    pub points: usize,
    pub variant: KernelVariant,
}

impl Default for GeneratingParams {
    fn default() -> Self {
        GeneratingParams { height: 2.0, points: 96, variant: KernelVariant::Corrected }
    }
}

fn slot(n: usize, sign: Parity) -> usize {
    2 * n + sign.index()
}

fn horner<T: Real>(p: &[T], x: &T) -> T {
    let mut acc = T::zero();
    for c in p.iter().rev() {
        acc = acc * x.clone() + c.clone();
    }
    acc
}

fn horner_c<T: Real>(p: &[T], x: &Complex<T>) -> Complex<T> {
    let mut acc = Complex::<T>::zero();
    for c in p.iter().rev() {
        acc = acc * x.clone() + Complex::new(c.clone(), T::zero());
    }
    acc
}

/// Natural log of |v| for a big integer of any size.
fn ln_abs(v: &BigInt) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits < 1000 {
        v.abs().to_f64().unwrap_or(f64::MAX).ln()
    } else {
        let shift = bits - 60;
        (v.abs() >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

struct ContourRule<T: Real> {
    /// Right-half nodes z_j = e^{iθ_j}, 0 < θ_j ≤ π/2.
    z: Vec<Complex<T>>,
    /// −¼ w_j i z_j g(z_j) per node and slot.
    g: Vec<Vec<Complex<T>>>,
    levels: usize,
}

/// Evaluator for every g_n^± and b_n^± with n ≤ n_max, in scalar type `T`.
pub struct BasisEvaluator<T: Real> {
    family: Arc<GnFamily>,
    params: QuadParams,
    points: usize,
    polys: Vec<Vec<T>>,
    /// c_j for j = −n .. order−1, per slot.
    coeffs: Vec<Vec<T>>,
    /// e^{−πj} for j = −n_max .. order−1.
    exp_pi: Vec<T>,
    /// ln of the largest weight the cusp behaviour of any g can carry.
    ln_weight: f64,
    line_t: Vec<T>,
    /// w_j t_j g(1+it_j) per node and slot.
    line_g: Vec<Vec<T>>,
    contour: OnceLock<ContourRule<T>>,
}

impl<T: Real> BasisEvaluator<T> {
    pub fn new(family: Arc<GnFamily>, params: QuadParams) -> Self {
        let n_max = family.n_max;
        let order = family.order;
        let slots = 2 * (n_max + 1);
        let mut polys = vec![Vec::new(); slots];
        let mut coeffs = vec![Vec::new(); slots];
        let mut ln_weight: f64 = 0.0;
        for n in 0..=n_max {
            for sign in Parity::BOTH {
                let form = family.get(n, sign).expect("index within family");
                let p = form.poly.coeffs();
                polys[slot(n, sign)] = p.iter().map(|c| c.to_real::<T>()).collect();
                if n > 0 || sign == Parity::Plus {
                    coeffs[slot(n, sign)] = (-(n as i64)..order).map(|j| form.series.coeff(j).to_real::<T>()).collect();
                }
                // Size of g at the cusp relative to θ³: P(0) for the plus family;
                // the minus family has P(0) = 0 and starts at 4096·P'(0)·X/X₀.
                if let Some(c0) = p.first() {
                    ln_weight = ln_weight.max(ln_abs(c0));
                }
                if let Some(c1) = p.get(1) {
                    ln_weight = ln_weight.max(ln_abs(c1) + 4096f64.ln());
                }
            }
        }
        let exp_pi = (-(n_max as i64)..order).map(|j| (-(T::pi() * T::from_i64(j))).exp()).collect();
        let points = params.points_for_bits(T::precision_bits());
        let mut ev = BasisEvaluator {
            family,
            params,
            points,
            polys,
            coeffs,
            exp_pi,
            ln_weight,
            line_t: Vec::new(),
            line_g: Vec::new(),
            contour: OnceLock::new(),
        };
        ev.build_line_rule();
        ev
    }

    pub fn n_max(&self) -> usize {
        self.family.n_max
    }

    pub fn family(&self) -> &Arc<GnFamily> {
        &self.family
    }

    pub fn params(&self) -> &QuadParams {
        &self.params
    }

    pub fn line_nodes(&self) -> usize {
        self.line_t.len()
    }

    /// Number of bits the quadrature rules must resolve, in nats.
    fn target_nats(&self) -> f64 {
        T::precision_bits() as f64 * std::f64::consts::LN_2 + self.ln_weight + 10.0
    }

    /// Smallest t for which g(1+it) e^{−πst} is not negligible relative to
    /// b(s) ~ e^{−π√(3s)} at the largest configured x.
    fn line_t_min(&self) -> f64 {
        let xm = self.params.real_max.max(1.0);
        let nats = self.target_nats() + std::f64::consts::PI * 3f64.sqrt() * xm;
        0.75 * std::f64::consts::PI / nats
    }

    /// Panel edges in u = ln t from `u_min` to `u_max`. Near t = 1 the
    /// principal part grows like e^{πnt}, so panels shrink until that
    /// exponent changes by at most 6 across each of them.
    fn line_edges(&self, u_min: f64, u_max: f64, n: usize) -> Vec<f64> {
        let rate = std::f64::consts::PI * n.max(1) as f64;
        let mut edges = vec![u_max];
        let mut u = u_max;
        while u > u_min {
            let step = self.params.line_panel.min(6.0 / (rate * u.exp().min(1.0)));
            u = (u - step).max(u_min);
            if u - u_min < 1e-3 * step {
                u = u_min;
            }
            edges.push(u);
        }
        edges.reverse();
        edges
    }

    fn build_line_rule(&mut self) {
        let edges = self.line_edges(self.line_t_min().ln(), 0.0, self.n_max());
        let rule = GaussLegendre::<T>::new(self.points);
        let slots = self.polys.len();
        for pair in edges.windows(2) {
            let (us, ws) = rule.on(&T::from_f64(pair[0]), &T::from_f64(pair[1]));
            for (u, w) in us.into_iter().zip(ws) {
                let t = u.exp();
                let lv = line_values(&t);
                let th3 = lv.theta.clone() * lv.theta.clone() * lv.theta.clone();
                let scale = w * t.clone() * th3;
                let mut row = Vec::with_capacity(slots);
                for n in 0..=self.n_max() {
                    let gp = horner(&self.polys[slot(n, Parity::Plus)], &lv.inverse_j);
                    let gm = horner(&self.polys[slot(n, Parity::Minus)], &lv.inverse_j);
                    row.push(scale.clone() * gp);
                    row.push(scale.clone() * lv.one_minus_two_lambda.clone() * gm);
                }
                self.line_t.push(t);
                self.line_g.push(row);
            }
        }
    }

    /// g_n^±(1+it), real on that line.
    pub fn g_line(&self, n: usize, sign: Parity, t: &T) -> Result<T> {
        self.check_index(n)?;
        let lv = line_values(t);
        let th3 = lv.theta.clone() * lv.theta.clone() * lv.theta;
        let p = horner(&self.polys[slot(n, sign)], &lv.inverse_j);
        Ok(match sign {
            Parity::Plus => th3 * p,
            Parity::Minus => th3 * lv.one_minus_two_lambda * p,
        })
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            Err(FilError::IndexBeyondBuilt { n, n_max: self.n_max() })
        } else {
            Ok(())
        }
    }

    /// g_n^±(z) from θ³P(1/J), times 1−2λ for the minus family.
    pub fn g_at(&self, n: usize, sign: Parity, z: &Complex<T>) -> Result<Complex<T>> {
        self.check_index(n)?;
        let th = thetas_at(z)?;
        Ok(self.g_from_thetas(n, sign, &th.t3, &th.inverse_j(), &th.one_minus_two_lambda()))
    }

    fn g_from_thetas(
        &self,
        n: usize,
        sign: Parity,
        theta: &Complex<T>,
        x: &Complex<T>,
        omt: &Complex<T>,
    ) -> Complex<T> {
        let th3 = theta.clone() * theta.clone() * theta.clone();
        let p = horner_c(&self.polys[slot(n, sign)], x);
        match sign {
            Parity::Plus => th3 * p,
            Parity::Minus => th3 * omt.clone() * p,
        }
    }

    /// b_n^± for every n ≤ n_max at the real node √(k+ε); entry n holds
    /// [b_n^+, b_n^−].
    pub fn b_real(&self, node: SquareNode) -> Vec<[T; 2]> {
        let n_max = self.n_max();
        let order = self.family.order;
        let pi = T::pi();
        let k = node.k as i64;
        let eps = T::from_f64(node.eps);
        let s = T::from_i64(k) + eps.clone();
        let sin_pe = (pi.clone() * eps.clone()).sin();
        let odd_k = k % 2 != 0;
        let sin_ps = if odd_k { -sin_pe.clone() } else { sin_pe.clone() };

        // Horizontal segment factors f_j = e^{−π(j+s)} sinc(j+s).
        let len = n_max + order as usize;
        let mut f = vec![T::zero(); len];
        if node.eps == 0.0 {
            let j = -k;
            if j >= -(n_max as i64) {
                f[(j + n_max as i64) as usize] = T::one();
            }
        } else {
            let e_s = (-(pi.clone() * s.clone())).exp();
            for (idx, fj) in f.iter_mut().enumerate() {
                let j = idx as i64 - n_max as i64;
                let m = j + k;
                let arg = T::from_i64(m) + eps.clone();
                let mut v = self.exp_pi[idx].clone() * e_s.clone() * sin_pe.clone() / (pi.clone() * arg);
                if m % 2 != 0 {
                    v = -v;
                }
                *fj = v;
            }
        }

        let slots = self.polys.len();
        let mut integral = vec![T::zero(); slots];
        if node.eps != 0.0 {
            for (t, row) in self.line_t.iter().zip(&self.line_g) {
                let e = (-(pi.clone() * s.clone() * t.clone())).exp();
                for (acc, g) in integral.iter_mut().zip(row) {
                    *acc += g.clone() * e.clone();
                }
            }
        }

        let half = T::from_f64(0.5);
        let mut out = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let mut pair = [T::zero(), T::zero()];
            for sign in Parity::BOTH {
                let sl = slot(n, sign);
                let c = &self.coeffs[sl];
                if c.is_empty() {
                    continue;
                }
                let off = n_max - n;
                let mut series = T::zero();
                for (cj, fj) in c.iter().zip(&f[off..]) {
                    if !fj.is_zero() {
                        series += cj.clone() * fj.clone();
                    }
                }
                pair[sign.index()] = half.clone() * (sin_ps.clone() * integral[sl].clone() + series);
            }
            out.push(pair);
        }
        out
    }

    fn contour_rule(&self) -> &ContourRule<T> {
        self.contour.get_or_init(|| self.build_contour_rule())
    }

    pub fn contour_levels(&self) -> usize {
        self.contour_rule().levels
    }

    fn build_contour_rule(&self) -> ContourRule<T> {
        let r2 = self.params.contour_radius * self.params.contour_radius;
        let nats = self.target_nats() + std::f64::consts::PI * r2;
        let theta_min = 0.75 * std::f64::consts::PI / nats;
        let needed = ((std::f64::consts::FRAC_PI_2 / theta_min).log2()).ceil().max(1.0) as usize;
        let levels = self.params.contour_levels.max(needed);
        // Oscillation of e^{iπx²z} and of the principal part w^{−n} along a panel.
        let rate = std::f64::consts::PI * (r2 + self.n_max() as f64);
        let rule = GaussLegendre::<T>::new(self.points);
        let pi = T::pi();
        let quarter = T::from_f64(0.25);
        let mut z = Vec::new();
        let mut g = Vec::new();
        for level in 0..levels {
            let hi = std::f64::consts::FRAC_PI_2 * 0.5f64.powi(level as i32);
            let lo = hi / 2.0;
            let width = (hi - lo) / 2.0;
            let sub = ((rate * width) / 6.0).ceil().max(1.0) as usize;
            let hi_t = pi.clone() / T::from_f64(2.0) / T::from_f64(2f64.powi(level as i32));
            let lo_t = hi_t.clone() / T::from_f64(2.0);
            let pieces = 2 * sub;
            let step = (hi_t - lo_t.clone()) / T::from_i64(pieces as i64);
            for p in 0..pieces {
                let a = lo_t.clone() + step.clone() * T::from_i64(p as i64);
                let b = a.clone() + step.clone();
                let (ths, ws) = rule.on(&a, &b);
                for (th, w) in ths.into_iter().zip(ws) {
                    let zj = Complex::new(th.cos(), th.sin());
                    let vals = thetas_at(&zj).expect("semicircle lies in the upper half-plane");
                    let x = vals.inverse_j();
                    let omt = vals.one_minus_two_lambda();
                    // −¼ w i z
                    let pref = Complex::new(zj.im.clone(), -zj.re.clone()) * (w * quarter.clone());
                    let mut row = Vec::with_capacity(self.polys.len());
                    for n in 0..=self.n_max() {
                        for sign in Parity::BOTH {
                            row.push(pref.clone() * self.g_from_thetas(n, sign, &vals.t3, &x, &omt));
                        }
                    }
                    z.push(zj);
                    g.push(row);
                }
            }
        }
        ContourRule { z, g, levels }
    }

    /// b_n^± for every n ≤ n_max at complex x by the semicircle contour.
    pub fn b_contour(&self, x: &Complex<T>) -> Vec<[Complex<T>; 2]> {
        let rule = self.contour_rule();
        let pi = T::pi();
        let x2 = x.clone() * x.clone();
        let ipx2 = Complex::new(-(pi.clone() * x2.im.clone()), pi * x2.re.clone());
        let slots = self.polys.len();
        let mut acc = vec![Complex::<T>::zero(); slots];
        for (zj, row) in rule.z.iter().zip(&rule.g) {
            // Mirror node e^{i(π−θ)} = −z̄ carries the conjugate weight since
            // g(−z̄) = conj g(z).
            let e = cexp(&(ipx2.clone() * zj.clone()));
            let zm = Complex::new(-zj.re.clone(), zj.im.clone());
            let em = cexp(&(ipx2.clone() * zm));
            for (a, g) in acc.iter_mut().zip(row) {
                *a = a.clone() + g.clone() * e.clone() + g.conj() * em.clone();
            }
        }
        (0..=self.n_max())
            .map(|n| [acc[slot(n, Parity::Plus)].clone(), acc[slot(n, Parity::Minus)].clone()])
            .collect()
    }

    /// b_n^± at the real node √(k+ε) with k + ε ≥ n from the Laplace form.
    pub fn b_tail(&self, n: usize, sign: Parity, node: SquareNode) -> Result<T> {
        self.check_index(n)?;
        let sf = node.s();
        // x = √n rounded to a double may land a hair below the line.
        if sf < n as f64 - 1e-9 {
            return Err(FilError::TailDomain { n, x: node.x() });
        }
        let sl = slot(n, sign);
        let c = &self.coeffs[sl];
        if c.is_empty() {
            return Ok(T::zero());
        }
        let pi = T::pi();
        let k = node.k as i64;
        let eps = T::from_f64(node.eps);
        let s = T::from_i64(k) + eps.clone();
        let sin_pe = (pi.clone() * eps.clone()).sin();
        let sin_ps = if k % 2 != 0 { -sin_pe.clone() } else { sin_pe.clone() };
        let nn = n as i64;

        // Closed form for Σ_{j≤0} c_j w^j, w = −e^{−πt}:
        // sin(πs) ∫₀^∞ (−1)^j e^{−π(j+s)t} dt = sin(πs)(−1)^j / (π(j+s)).
        let mut closed = T::zero();
        for j in -nn..=0 {
            let cj = &c[(j + nn) as usize];
            if cj.is_zero() {
                continue;
            }
            let m = j + k;
            let term = if m == 0 && node.eps == 0.0 {
                T::one()
            } else if m == 0 {
                sin_pe.clone() / (pi.clone() * eps.clone())
            } else {
                // sin(πs)(−1)^j = (−1)^{j+k} sin(πε)
                let v = sin_pe.clone() / (pi.clone() * (T::from_i64(m) + eps.clone()));
                if m % 2 != 0 {
                    -v
                } else {
                    v
                }
            };
            closed += cj.clone() * term;
        }
        if node.eps == 0.0 {
            return Ok(T::from_f64(0.5) * closed);
        }

        let cutoff = self.line_t_min();
        // Remainder r(t) = Σ_{j≥1} c_j (−e^{−πt})^j, from the series where it
        // converges quickly and from g minus its principal part elsewhere.
        let remainder = |t: &T| -> T {
            if *t >= T::one() {
                let w = -(-(pi.clone() * t.clone())).exp();
                let mut acc = T::zero();
                let mut wj = T::one();
                for cj in &c[(nn + 1) as usize..] {
                    wj = wj * w.clone();
                    acc += cj.clone() * wj.clone();
                }
                acc
            } else {
                // Below the line rule's cutoff g itself is negligible.
                let g = if t.to_f64() < cutoff { T::zero() } else { self.g_line(n, sign, t).expect("index checked") };
                let w = -(-(pi.clone() * t.clone())).exp();
                let winv = T::one() / w;
                let mut pp = T::zero();
                for cj in c[..=(nn as usize)].iter() {
                    pp = pp * winv.clone() + cj.clone();
                }
                g - pp
            }
        };

        let nats = self.target_nats();
        let c1 = c.get((nn + 1) as usize).map(|v| v.to_f64().abs().max(1.0)).unwrap_or(1.0);
        let t_max = (nats + c1.ln()) / (std::f64::consts::PI * (1.0 + sf));
        let t_min = self.line_t_min().min(t_max / 4.0);
        let rule = GaussLegendre::<T>::new(self.points);
        let mut edges = vec![T::zero()];
        edges.extend(self.line_edges(t_min.ln(), t_max.ln(), n).into_iter().map(|u| T::from_f64(u).exp()));
        let mut integral = T::zero();
        for pair in edges.windows(2) {
            let (ts, ws) = rule.on(&pair[0], &pair[1]);
            for (t, w) in ts.into_iter().zip(ws) {
                let e = (-(pi.clone() * s.clone() * t.clone())).exp();
                integral += w * remainder(&t) * e;
            }
        }
        Ok(T::from_f64(0.5) * (closed + sin_ps * integral))
    }

    /// g_n^±(z) through the generating kernel integrated over
    /// [−1+iT, 1+iT] with the periodic trapezoid rule.
    pub fn g_generating(&self, n: usize, sign: Parity, z: &Complex<T>, params: &GeneratingParams) -> Result<Complex<T>> {
        generating(n, sign, z, params)
    }
}

/// Generating-kernel evaluation of g_n^±(z), independent of the polynomial
/// recipe.
pub fn generating<T: Real>(n: usize, sign: Parity, z: &Complex<T>, params: &GeneratingParams) -> Result<Complex<T>> {
    if params.points < 2 || !(params.height > 0.0) {
        return Err(FilError::Contract("generating route needs height > 0 and at least 2 points".into()));
    }
    let tz = thetas_at(z)?;
    let jz = tz.j();
    let jz_abs = crate::scalar::cabs(&jz).to_f64();
    let th_z = tz.t3.clone();
    let th3_z = th_z.clone() * th_z.clone() * th_z.clone();
    let omt_z = tz.one_minus_two_lambda();
    let m = params.points;
    let height = T::from_f64(params.height);
    let mut worst: f64 = 0.0;
    let mut acc = Complex::<T>::zero();
    for i in 0..m {
        let re = T::from_f64(-1.0) + T::from_f64(2.0) * T::from_i64(i as i64) / T::from_i64(m as i64);
        let tau = Complex::new(re, height.clone());
        let tt = thetas_at(&tau)?;
        let jt = tt.j();
        worst = worst.max(crate::scalar::cabs(&jt).to_f64() / jz_abs);
        let den = jz.clone() - jt.clone();
        let kernel = match (sign, params.variant) {
            (Parity::Plus, _) => tt.t3.clone() * tt.one_minus_two_lambda() * th3_z.clone() * jz.clone() / den,
            (Parity::Minus, KernelVariant::Corrected) => {
                tt.t3.clone() * th3_z.clone() * omt_z.clone() * jt / den
            }
            (Parity::Minus, KernelVariant::Literal) => {
                let th3_t = tt.t3.clone() * tt.t3.clone() * tt.t3.clone();
                th_z.clone() * omt_z.clone() * th3_t * jt / den
            }
        };
        // e^{−iπnτ}
        let phase = Complex::new(T::pi() * height.clone() * T::from_i64(n as i64), -(T::pi() * tau.re.clone() * T::from_i64(n as i64)));
        acc = acc + kernel * cexp(&phase);
    }
    if worst >= 1.0 {
        return Err(FilError::SegmentTooLow { height: params.height, ratio: worst });
    }
    Ok(cscale(&acc, &(T::one() / T::from_i64(m as i64))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock as Once;

    fn small() -> &'static BasisEvaluator<f64> {
        static EV: Once<BasisEvaluator<f64>> = Once::new();
        EV.get_or_init(|| {
            let fam = Arc::new(GnFamily::build(6, super::super::gn::default_order(6)).unwrap());
            BasisEvaluator::new(fam, QuadParams::default())
        })
    }

    #[test]
    fn square_node_split() {
        let n = SquareNode::from_x(2f64.sqrt());
        assert_eq!(n.k, 2);
        assert!(n.eps.abs() < 1e-15);
        assert_eq!(SquareNode::from_x(3.0), SquareNode::exact(9));
        let m = SquareNode::from_x(1.3);
        assert_eq!(m.k, 2);
        assert!((m.s() - 1.69).abs() < 1e-15);
    }

    // Independent high-precision contour quadrature of the same integrals.
    #[test]
    fn frozen_values_first_index() {
        let ev = small();
        let expect = [
            (0.3, -0.398994331285808, 0.0598273640111057),
            (0.7, -0.0193310410989425, 1.214580188970647),
            (1.3, 0.1134462624343065, 0.0350056672014781),
        ];
        for (x, p, m) in expect {
            let v = ev.b_real(SquareNode::from_x(x));
            assert!((v[1][0] - p).abs() < 1e-13, "b1+({x}) = {}", v[1][0]);
            assert!((v[1][1] - m).abs() < 1e-13, "b1-({x}) = {}", v[1][1]);
        }
    }

    #[test]
    fn exact_nodes_give_deltas() {
        let ev = small();
        for m in 0..=6u64 {
            let v = ev.b_real(SquareNode::exact(m));
            for n in 0..=6usize {
                let a = v[n][0] + v[n][1];
                let ah = v[n][0] - v[n][1];
                if m == 0 {
                    let sq = [1, 4].contains(&n);
                    let want_a = if n == 0 { 0.5 } else if sq { -1.0 } else { 0.0 };
                    let want_ah = if n == 0 { 0.5 } else if sq { 1.0 } else { 0.0 };
                    assert_eq!((a, ah), (want_a, want_ah), "n={n} at 0");
                } else {
                    assert_eq!(a, if n as u64 == m { 1.0 } else { 0.0 });
                    assert_eq!(ah, 0.0);
                }
            }
            assert_eq!(v[0][1], 0.0);
        }
    }

    #[test]
    fn contour_matches_real_route() {
        let ev = small();
        for x in [0.0, 0.45, 1.1, 1.9, 2.6] {
            let r = ev.b_real(SquareNode::from_x(x));
            let c = ev.b_contour(&Complex::new(x, 0.0));
            for n in 0..=4 {
                for s in 0..2 {
                    let tol = 1e-14 * (std::f64::consts::PI * n as f64).exp();
                    assert!((r[n][s] - c[n][s].re).abs() < tol, "n={n} s={s} x={x}: {} vs {}", r[n][s], c[n][s]);
                    assert!(c[n][s].im.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn even_in_x_and_real_on_imaginary_axis() {
        let ev = small();
        let a = ev.b_contour(&Complex::new(0.4, 0.3));
        let b = ev.b_contour(&Complex::new(-0.4, -0.3));
        assert!((a[2][0] - b[2][0]).norm() < 1e-12);
        let c = ev.b_contour(&Complex::new(0.0, 0.8));
        assert!(c[1][1].im.abs() < 1e-10 * c[1][1].norm().max(1.0));
    }

    #[test]
    fn tail_matches_real_route() {
        let ev = small();
        for n in 1..=3usize {
            for dx in [0.0, 0.2, 1.0, 2.5] {
                let x = (n as f64).sqrt() + dx;
                let node = SquareNode::from_x(x);
                let r = ev.b_real(node);
                for sign in Parity::BOTH {
                    let t = ev.b_tail(n, sign, node).unwrap();
                    let want = r[n][sign.index()];
                    assert!((t - want).abs() < 1e-12 + 1e-6 * want.abs(), "n={n} x={x} {sign}: {t} vs {want}");
                }
            }
        }
        assert!(matches!(ev.b_tail(4, Parity::Plus, SquareNode::from_x(1.5)), Err(FilError::TailDomain { .. })));
        assert_eq!(ev.b_tail(2, Parity::Plus, SquareNode::exact(7)).unwrap(), 0.0);
    }

    #[test]
    fn generating_kernel_reproduces_polynomials() {
        let ev = small();
        let z = Complex::new(0.5, 0.75f64.sqrt());
        let gp = GeneratingParams::default();
        for n in 0..=3usize {
            for sign in Parity::BOTH {
                let a = ev.g_at(n, sign, &z).unwrap();
                let b = ev.g_generating(n, sign, &z, &gp).unwrap();
                assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0), "n={n} {sign}: {a} vs {b}");
            }
        }
        let lit = GeneratingParams { variant: KernelVariant::Literal, ..gp.clone() };
        let a = ev.g_at(1, Parity::Minus, &z).unwrap();
        let b = ev.g_generating(1, Parity::Minus, &z, &lit).unwrap();
        assert!((a - b).norm() > 1e-2 * a.norm());
    }

    #[test]
    fn low_segment_is_rejected() {
        let z = Complex::new(0.0, 1.0);
        let gp = GeneratingParams { height: 0.6, points: 32, variant: KernelVariant::Corrected };
        assert!(matches!(generating::<f64>(1, Parity::Plus, &z, &gp), Err(FilError::SegmentTooLow { .. })));
    }

    #[test]
    fn index_guard() {
        let ev = small();
        assert!(matches!(ev.g_line(7, Parity::Plus, &0.5), Err(FilError::IndexBeyondBuilt { n: 7, n_max: 6 })));
    }
}
