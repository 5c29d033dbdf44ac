//! Numerical evaluation of Θ₂, Θ₃, Θ₄, λ and J on the upper half-plane.
//!
//! Points are first moved into the standard fundamental domain with
//! z ↦ z + k and z ↦ −1/z while the theta functions are tracked through the
//! transformation laws
//!
//! ```text
//! Θ₂(z+1) = e^{iπ/4} Θ₂(z),  Θ₃(z+1) = Θ₄(z),  Θ₄(z+1) = Θ₃(z)
//! Θ₂(−1/z) = (−iz)^{1/2} Θ₄(z),  Θ₃(−1/z) = (−iz)^{1/2} Θ₃(z),  Θ₄(−1/z) = (−iz)^{1/2} Θ₂(z)
//! ```
//!
//! with the principal square root. −iz has positive real part for Im z > 0,
//! so the branch cut is never crossed.

use num_complex::Complex;
use num_traits::One;

use crate::error::{FilError, Result};
use crate::qseries::Theta;
use crate::scalar::{cexp, cinv, cscale, csqrt, expi_pi, Real};
#[cfg(test)]
use crate::scalar::c_to_f64;

/// Word length guard for the reduction.
pub const MAX_WORD: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpperHalfPoint {
    pub re: f64,
    pub im: f64,
}

impl UpperHalfPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if im > 0.0 && re.is_finite() && im.is_finite() {
            Ok(UpperHalfPoint { re, im })
        } else {
            Err(FilError::NotUpperHalf(im))
        }
    }

    pub fn i() -> Self {
        UpperHalfPoint { re: 0.0, im: 1.0 }
    }

    pub fn to_complex<T: Real>(self) -> Complex<T> {
        Complex::new(T::from_f64(self.re), T::from_f64(self.im))
    }
}

/// Generator applied during reduction, acting on the current point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    /// z ↦ −1/z
    S,
    /// z ↦ z + k
    Shift(i64),
}

#[derive(Clone, Debug)]
pub struct ReductionWord<T: Real> {
    pub steps: Vec<Generator>,
    pub point: Complex<T>,
    /// Θ_j(z₀) = factor_j · Θ_{image_j}(point), indexed by Θ₂, Θ₃, Θ₄.
    pub theta_map: [(Complex<T>, Theta); 3],
}

impl<T: Real> ReductionWord<T> {
    /// Weight-½ automorphy factor carried by Θ₃.
    pub fn factor(&self) -> &Complex<T> {
        &self.theta_map[1].0
    }

    /// Applies the word to `z` (normally the original point).
    pub fn apply(&self, z: &Complex<T>) -> Complex<T> {
        let mut w = z.clone();
        for g in &self.steps {
            w = apply_generator(g, &w);
        }
        w
    }
}

fn apply_generator<T: Real>(g: &Generator, z: &Complex<T>) -> Complex<T> {
    match g {
        Generator::S => -cinv(z),
        Generator::Shift(k) => Complex::new(z.re.clone() + T::from_i64(*k), z.im.clone()),
    }
}

fn slot(t: Theta) -> usize {
    match t {
        Theta::Two => 0,
        Theta::Three => 1,
        Theta::Four => 2,
    }
}

/// Reduces `z` into |Re| ≤ ½, |z| ≥ 1 with the theta bookkeeping described
/// in the module docs.
pub fn reduce<T: Real>(z: &Complex<T>) -> Result<ReductionWord<T>> {
    let im0 = z.im.to_f64();
    if !(im0 > 0.0) {
        return Err(FilError::NotUpperHalf(im0));
    }
    let mut cur = z.clone();
    let mut steps = Vec::new();
    let mut map = [
        (Complex::<T>::one(), Theta::Two),
        (Complex::<T>::one(), Theta::Three),
        (Complex::<T>::one(), Theta::Four),
    ];
    let mut best = cur.clone();
    loop {
        let m = cur.re.to_f64().round() as i64;
        if m != 0 {
            let g = Generator::Shift(-m);
            cur = apply_generator(&g, &cur);
            steps.push(g);
            // Θ(z_old) = Θ(z_new + m)
            let rot = expi_pi(&T::from_f64(m as f64 / 4.0));
            for (coef, idx) in map.iter_mut() {
                match idx {
                    Theta::Two => *coef = coef.clone() * rot.clone(),
                    Theta::Three if m % 2 != 0 => *idx = Theta::Four,
                    Theta::Four if m % 2 != 0 => *idx = Theta::Three,
                    _ => {}
                }
            }
        }
        let r2 = (cur.re.clone() * cur.re.clone() + cur.im.clone() * cur.im.clone()).to_f64();
        if cur.im.to_f64() > best.im.to_f64() {
            best = cur.clone();
        }
        if r2 >= 1.0 - 1e-13 {
            break;
        }
        cur = apply_generator(&Generator::S, &cur);
        steps.push(Generator::S);
        // Θ_k(z_old) = Θ_k(−1/z_new) = (−i z_new)^{1/2} Θ_{σ(k)}(z_new)
        let factor = csqrt(&Complex::new(cur.im.clone(), -cur.re.clone()));
        for (coef, idx) in map.iter_mut() {
            *coef = coef.clone() * factor.clone();
            *idx = match idx {
                Theta::Two => Theta::Four,
                Theta::Four => Theta::Two,
                Theta::Three => Theta::Three,
            };
        }
        if steps.len() > MAX_WORD {
            return Err(FilError::ReductionStalled {
                steps: steps.len(),
                best_re: best.re.to_f64(),
                best_im: best.im.to_f64(),
            });
        }
    }
    Ok(ReductionWord { steps, point: cur, theta_map: map })
}

/// Reduction in double precision.
pub fn reduce_theta_group(z: UpperHalfPoint) -> Result<ReductionWord<f64>> {
    reduce(&z.to_complex::<f64>())
}

/// Θ₂, Θ₃, Θ₄ at a point with Im z ≥ √3/2 by direct summation in p = e^{iπz}.
fn thetas_reduced<T: Real>(z: &Complex<T>) -> [Complex<T>; 3] {
    let ipz = Complex::new(-(T::pi() * z.im.clone()), T::pi() * z.re.clone());
    let p = cexp(&ipz);
    let p_abs = (-(T::pi() * z.im.clone())).exp();
    let tiny = T::epsilon() * T::from_f64(1e-3);
    let one = Complex::<T>::one();
    let two = T::from_f64(2.0);

    // Θ₃, Θ₄: 1 + 2Σ (±1)^n p^{n²}; p^{n²} updated by p^{2n+1}.
    let mut s3 = one.clone();
    let mut s4 = one.clone();
    let mut pn2 = one.clone();
    let mut step = p.clone();
    let mut mag = T::one();
    let mut mag_step = p_abs.clone();
    let p2 = p.clone() * p.clone();
    let p2_abs = p_abs.clone() * p_abs.clone();
    let mut n = 1u32;
    loop {
        pn2 = pn2 * step.clone();
        mag = mag * mag_step.clone();
        let term = cscale(&pn2, &two);
        s3 = s3 + term.clone();
        if n % 2 == 1 {
            s4 = s4 - term;
        } else {
            s4 = s4 + term;
        }
        if mag < tiny {
            break;
        }
        step = step * p2.clone();
        mag_step = mag_step * p2_abs.clone();
        n += 1;
    }

    // Θ₂ = 2 e^{iπz/4} Σ_{k≥0} p^{k(k+1)}; p^{(k+1)(k+2)} = p^{k(k+1)} p^{2k+2}.
    let mut s2 = one.clone();
    let mut pk = one;
    let mut step = p2.clone();
    let mut mag = T::one();
    let mut mag_step = p2_abs.clone();
    loop {
        pk = pk * step.clone();
        mag = mag * mag_step.clone();
        s2 = s2 + pk.clone();
        if mag < tiny {
            break;
        }
        step = step * p2.clone();
        mag_step = mag_step * p2_abs.clone();
    }
    let quarter = cexp(&cscale(&ipz, &T::from_f64(0.25)));
    let t2 = cscale(&(quarter * s2), &two);
    [t2, s3, s4]
}

/// Θ₂, Θ₃, Θ₄ at `z`.
#[derive(Clone, Debug)]
pub struct ThetaValues<T: Real> {
    pub t2: Complex<T>,
    pub t3: Complex<T>,
    pub t4: Complex<T>,
}

impl<T: Real> ThetaValues<T> {
    pub fn get(&self, which: Theta) -> &Complex<T> {
        match which {
            Theta::Two => &self.t2,
            Theta::Three => &self.t3,
            Theta::Four => &self.t4,
        }
    }

    fn fourth(z: &Complex<T>) -> Complex<T> {
        let sq = z.clone() * z.clone();
        sq.clone() * sq
    }

    pub fn lambda(&self) -> Complex<T> {
        Self::fourth(&self.t2) / Self::fourth(&self.t3)
    }

    /// 1/J = 16Θ₃⁸/(Θ₂⁴Θ₄⁴).
    pub fn inverse_j(&self) -> Complex<T> {
        let t3_4 = Self::fourth(&self.t3);
        cscale(&(t3_4.clone() * t3_4), &T::from_f64(16.0))
            / (Self::fourth(&self.t2) * Self::fourth(&self.t4))
    }

    pub fn j(&self) -> Complex<T> {
        cinv(&self.inverse_j())
    }

    /// 1 − 2λ = (Θ₄⁴ − Θ₂⁴)/Θ₃⁴.
    pub fn one_minus_two_lambda(&self) -> Complex<T> {
        (Self::fourth(&self.t4) - Self::fourth(&self.t2)) / Self::fourth(&self.t3)
    }
}

pub fn thetas_at<T: Real>(z: &Complex<T>) -> Result<ThetaValues<T>> {
    let word = reduce(z)?;
    let vals = thetas_reduced(&word.point);
    let pick = |k: usize| {
        let (coef, idx) = &word.theta_map[k];
        coef.clone() * vals[slot(*idx)].clone()
    };
    Ok(ThetaValues { t2: pick(0), t3: pick(1), t4: pick(2) })
}

pub fn eval_theta(which: Theta, z: UpperHalfPoint) -> Result<Complex<f64>> {
    Ok(*thetas_at(&z.to_complex::<f64>())?.get(which))
}

pub fn eval_lambda(z: UpperHalfPoint) -> Result<Complex<f64>> {
    Ok(thetas_at(&z.to_complex::<f64>())?.lambda())
}

#[allow(non_snake_case)]
pub fn eval_J(z: UpperHalfPoint) -> Result<Complex<f64>> {
    Ok(thetas_at(&z.to_complex::<f64>())?.j())
}

/// Real values Θ₂(it), Θ₃(it), Θ₄(it) for t > 0; t < 1 goes through t ↦ 1/t.
pub fn thetas_imaginary_axis<T: Real>(t: &T) -> (T, T, T) {
    if *t >= T::one() {
        thetas_imag_direct(t)
    } else {
        let s = T::one() / t.clone();
        let (a, b, c) = thetas_imag_direct(&s);
        let r = s.sqrt();
        (r.clone() * c, r.clone() * b, r * a)
    }
}

fn thetas_imag_direct<T: Real>(t: &T) -> (T, T, T) {
    let p = (-(T::pi() * t.clone())).exp();
    let tiny = T::epsilon() * T::from_f64(1e-3);
    let two = T::from_f64(2.0);
    let p2 = p.clone() * p.clone();
    let mut s3 = T::one();
    let mut s4 = T::one();
    let mut pn2 = T::one();
    let mut step = p.clone();
    let mut n = 1u32;
    loop {
        pn2 = pn2 * step.clone();
        let term = pn2.clone() * two.clone();
        s3 = s3 + term.clone();
        if n % 2 == 1 {
            s4 = s4 - term;
        } else {
            s4 = s4 + term;
        }
        if pn2 < tiny {
            break;
        }
        step = step * p2.clone();
        n += 1;
    }
    let mut s2 = T::one();
    let mut pk = T::one();
    let mut step = p2.clone();
    loop {
        pk = pk * step.clone();
        s2 = s2 + pk.clone();
        if pk < tiny {
            break;
        }
        step = step * p2.clone();
    }
    let quarter = (-(T::pi() * t.clone()) / T::from_f64(4.0)).exp();
    (two * quarter * s2, s3, s4)
}

/// Modular quantities on the vertical line z = 1 + it, all real there.
#[derive(Clone, Debug)]
pub struct LineValues<T: Real> {
    /// θ(1+it) = Θ₄(it)
    pub theta: T,
    /// λ(1+it) = −Θ₂(it)⁴/Θ₄(it)⁴
    pub lambda: T,
    /// 1/J(1+it) = −16Θ₄⁸/(Θ₂⁴Θ₃⁴) at it
    pub inverse_j: T,
    pub one_minus_two_lambda: T,
}

pub fn line_values<T: Real>(t: &T) -> LineValues<T> {
    let (a, b, c) = thetas_imaginary_axis(t);
    let a4 = {
        let s = a.clone() * a;
        s.clone() * s
    };
    let b4 = {
        let s = b.clone() * b;
        s.clone() * s
    };
    let c4 = {
        let s = c.clone() * c.clone();
        s.clone() * s
    };
    let ratio = a4.clone() / c4.clone();
    LineValues {
        theta: c,
        lambda: -ratio.clone(),
        inverse_j: -(T::from_f64(16.0) * c4.clone() * c4) / (a4 * b4),
        one_minus_two_lambda: T::one() + T::from_f64(2.0) * ratio,
    }
}

/// Relative residual of the weight-½ law (−iz)^{−1/2} Θ₃(−1/z) = Θ₃(z).
pub fn theta3_transform_residual(z: UpperHalfPoint) -> Result<f64> {
    let zc = z.to_complex::<f64>();
    let lhs_arg = -cinv(&zc);
    let lhs = thetas_at(&lhs_arg)?.t3 / csqrt(&Complex::new(zc.im, -zc.re));
    let rhs = thetas_at(&zc)?.t3;
    Ok((lhs - rhs).norm() / rhs.norm())
}
