//! Exact Laurent series in w = q^{1/2} = e^{iπz}.
//!
//! A series is stored as `w^valuation · (c_0 + c_1 w + …)` and is known
//! modulo `w^order`. Every operation propagates the order it can vouch for;
//! nothing is silently padded with zeros.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{FilError, Result};
use crate::scalar::Real;

/// Exact coefficient ring.
pub trait Coeff:
    Clone + Num + Neg<Output = Self> + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;
    /// Multiplicative inverse when it exists in the ring.
    fn try_recip(&self) -> Option<Self>;
    fn mul_ref(&self, other: &Self) -> Self;
    /// self += a·b
    fn add_mul(&mut self, a: &Self, b: &Self);
    fn add_ref(&mut self, other: &Self);
    fn to_ratio(&self) -> BigRational;
    fn try_from_ratio(r: &BigRational) -> Option<Self>;
    fn to_real<T: Real>(&self) -> T;
}

impl Coeff for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn try_recip(&self) -> Option<Self> {
        if self.is_one() || (-self).is_one() {
            Some(self.clone())
        } else {
            None
        }
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn add_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn to_ratio(&self) -> BigRational {
        BigRational::from_integer(self.clone())
    }
    fn try_from_ratio(r: &BigRational) -> Option<Self> {
        r.is_integer().then(|| r.to_integer())
    }
    fn to_real<T: Real>(&self) -> T {
        T::from_bigint(self)
    }
}

impl Coeff for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn try_recip(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.recip())
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn add_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn to_ratio(&self) -> BigRational {
        self.clone()
    }
    fn try_from_ratio(r: &BigRational) -> Option<Self> {
        Some(r.clone())
    }
    fn to_real<T: Real>(&self) -> T {
        T::from_bigint(self.numer()) / T::from_bigint(self.denom())
    }
}

/// Laurent series `Σ_{k ≥ valuation} c_k w^k + O(w^order)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfQSeries<C: Coeff = BigRational> {
    valuation: i64,
    coeffs: Vec<C>,
    order: i64,
}

impl<C: Coeff> HalfQSeries<C> {
    /// Builds `w^valuation · Σ coeffs[i] w^i + O(w^order)`. Entries at or beyond
    /// `order` are dropped, missing ones below it are zero, and leading zeros
    /// are absorbed into the valuation.
    pub fn new(valuation: i64, mut coeffs: Vec<C>, order: i64) -> Self {
        let keep = (order - valuation).max(0) as usize;
        coeffs.resize(keep, C::zero());
        let lead = coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => HalfQSeries { valuation: order, coeffs: Vec::new(), order },
            Some(k) => {
                coeffs.drain(..k);
                HalfQSeries { valuation: valuation + k as i64, coeffs, order }
            }
        }
    }

    pub fn zero(order: i64) -> Self {
        HalfQSeries { valuation: order, coeffs: Vec::new(), order }
    }

    pub fn one(order: i64) -> Self {
        Self::monomial(C::one(), 0, order)
    }

    pub fn monomial(c: C, power: i64, order: i64) -> Self {
        Self::new(power, vec![c], order)
    }

    /// Series from coefficients of w^0, w^1, … known modulo w^{len}.
    pub fn from_power_coeffs(coeffs: Vec<C>) -> Self {
        let order = coeffs.len() as i64;
        Self::new(0, coeffs, order)
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.first()
    }

    /// Coefficient of w^k. Panics when k is at or beyond the known order.
    pub fn coeff(&self, k: i64) -> C {
        assert!(k < self.order, "coefficient w^{k} requested beyond known order {}", self.order);
        if k < self.valuation {
            C::zero()
        } else {
            self.coeffs[(k - self.valuation) as usize].clone()
        }
    }

    pub fn truncate(&self, order: i64) -> Self {
        let order = order.min(self.order);
        Self::new(self.valuation, self.coeffs.clone(), order)
    }

    /// Multiplies by w^k.
    pub fn shift(&self, k: i64) -> Self {
        HalfQSeries { valuation: self.valuation + k, coeffs: self.coeffs.clone(), order: self.order + k }
    }

    pub fn scale(&self, s: &C) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.mul_ref(s)).collect();
        Self::new(self.valuation, coeffs, self.order)
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|c| -c.clone()).collect();
        HalfQSeries { valuation: self.valuation, coeffs, order: self.order }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let lo = self.valuation.min(other.valuation).min(order);
        let mut out = vec![C::zero(); (order - lo) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.valuation + i as i64;
            if k < order {
                out[(k - lo) as usize].add_ref(c);
            }
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            let k = other.valuation + i as i64;
            if k < order {
                out[(k - lo) as usize].add_ref(c);
            }
        }
        Self::new(lo, out, order)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = (self.order + other.valuation).min(other.order + self.valuation);
        if self.is_zero() || other.is_zero() {
            return Self::zero(order);
        }
        let nnz = |s: &Self| s.coeffs.iter().filter(|c| !c.is_zero()).count();
        if nnz(other) < nnz(self) {
            return other.mul(self);
        }
        let v = self.valuation + other.valuation;
        let len = (order - v).max(0) as usize;
        let mut out = vec![C::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            if a.is_zero() {
                continue;
            }
            let room = (len - i).min(other.coeffs.len());
            for (j, b) in other.coeffs[..room].iter().enumerate() {
                out[i + j].add_mul(a, b);
            }
        }
        Self::new(v, out, order)
    }

    /// Multiplicative inverse; requires a leading coefficient that is a unit.
    pub fn invert(&self) -> Result<Self> {
        let lead = self.leading().ok_or(FilError::ZeroSeries)?;
        let r = lead.try_recip().ok_or_else(|| FilError::NonUnit(lead.to_string()))?;
        let v = self.valuation;
        let len = (self.order - v) as usize;
        let u = &self.coeffs;
        let mut b: Vec<C> = Vec::with_capacity(len);
        b.push(r.clone());
        for k in 1..len {
            let mut acc = C::zero();
            for i in 1..=k.min(u.len() - 1) {
                acc.add_mul(&u[i], &b[k - i]);
            }
            b.push(-(acc.mul_ref(&r)));
        }
        Ok(Self::new(-v, b, self.order - 2 * v))
    }

    /// Integer power; negative exponents go through `invert`.
    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.invert()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one(base.order - base.valuation);
        let mut sq = base;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                acc = if first { sq.clone() } else { acc.mul(&sq) };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> HalfQSeries<D> {
        HalfQSeries::new(self.valuation, self.coeffs.iter().map(f).collect(), self.order)
    }

    pub fn to_rational(&self) -> HalfQSeries<BigRational> {
        self.map(|c| c.to_ratio())
    }

    /// Converts to another ring when every coefficient is representable.
    pub fn try_convert<D: Coeff>(&self) -> Option<HalfQSeries<D>> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(D::try_from_ratio(&c.to_ratio())?);
        }
        Some(HalfQSeries::new(self.valuation, out, self.order))
    }

    /// `{valuation, order, coeffs: [[num, den], …]}`; integers that overflow
    /// 64 bits are written as decimal strings.
    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .map(|c| {
                let r = c.to_ratio();
                json!([big_to_json(r.numer()), big_to_json(r.denom())])
            })
            .collect();
        json!({ "valuation": self.valuation, "order": self.order, "coeffs": coeffs })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| FilError::Parse(format!("series json: {m}"));
        let valuation = v["valuation"].as_i64().ok_or_else(|| bad("valuation"))?;
        let order = v["order"].as_i64().ok_or_else(|| bad("order"))?;
        let arr = v["coeffs"].as_array().ok_or_else(|| bad("coeffs"))?;
        let mut coeffs = Vec::with_capacity(arr.len());
        for pair in arr {
            let p = pair.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("pair"))?;
            let num = big_from_json(&p[0]).ok_or_else(|| bad("numerator"))?;
            let den = big_from_json(&p[1]).ok_or_else(|| bad("denominator"))?;
            if den.is_zero() {
                return Err(bad("zero denominator"));
            }
            let r = BigRational::new(num, den);
            coeffs.push(C::try_from_ratio(&r).ok_or_else(|| bad("coefficient outside ring"))?);
        }
        if coeffs.len() as i64 != order - valuation {
            return Err(bad("length does not match order - valuation"));
        }
        Ok(Self::new(valuation, coeffs, order))
    }
}

impl<C: Coeff> fmt::Display for HalfQSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = self.valuation + i as i64;
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*w")?,
                _ => write!(f, "{c}*w^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(w^{})", self.order)
    }
}

fn big_to_json(b: &BigInt) -> Value {
    match b.to_i64() {
        Some(v) => json!(v),
        None => json!(b.to_string()),
    }
}

fn big_from_json(v: &Value) -> Option<BigInt> {
    if let Some(i) = v.as_i64() {
        return Some(BigInt::from(i));
    }
    v.as_str().and_then(|s| s.parse().ok())
}

/// Polynomial with exact coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalPolynomial<C: Coeff = BigRational> {
    coeffs: Vec<C>,
    monic: bool,
}

impl<C: Coeff> RationalPolynomial<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        let monic = coeffs.last().is_some_and(|c| c.is_one());
        RationalPolynomial { coeffs, monic }
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.monic
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn eval(&self, x: &C) -> C {
        let mut acc = C::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_ref(x) + c.clone();
        }
        acc
    }

    pub fn eval_series(&self, x: &HalfQSeries<C>, order: i64) -> HalfQSeries<C> {
        let mut acc = HalfQSeries::zero(order);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&HalfQSeries::monomial(c.clone(), 0, order));
        }
        acc
    }

    pub fn to_rational(&self) -> RationalPolynomial<BigRational> {
        RationalPolynomial::new(self.coeffs.iter().map(|c| c.to_ratio()).collect())
    }
}

impl<C: Coeff> fmt::Display for RationalPolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*X")?,
                _ => write!(f, "{c}*X^{k}")?,
            }
        }
        Ok(())
    }
}

/// Which of the three Jacobi thetas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Theta {
    Two,
    Three,
    Four,
}

impl Theta {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            2 => Ok(Theta::Two),
            3 => Ok(Theta::Three),
            4 => Ok(Theta::Four),
            _ => Err(FilError::Contract(format!("theta index {i} not in {{2, 3, 4}}"))),
        }
    }
}

/// `w^{quarter_shift/4} · series`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedSeries<C: Coeff> {
    pub quarter_shift: u8,
    pub series: HalfQSeries<C>,
}

/// Θ₃ = Σ w^{n²}, Θ₄ = Σ (−1)ⁿ w^{n²} over n ∈ ℤ, and
/// Θ₂ = Σ w^{n²} over n ∈ ℤ + ½ = w^{1/4} · 2Σ_{k≥0} w^{k(k+1)}.
pub fn theta_series<C: Coeff>(which: Theta, order: i64) -> ShiftedSeries<C> {
    assert!(order >= 1, "theta_series needs order >= 1");
    let len = order as usize;
    let mut c = vec![C::zero(); len];
    match which {
        Theta::Three | Theta::Four => {
            c[0] = C::one();
            let mut n = 1usize;
            while n * n < len {
                let sign = if which == Theta::Four && n % 2 == 1 { -2 } else { 2 };
                c[n * n] = C::from_i64(sign);
                n += 1;
            }
        }
        Theta::Two => {
            let mut k = 0usize;
            while k * (k + 1) < len {
                c[k * (k + 1)] = C::from_i64(2);
                k += 1;
            }
        }
    }
    let shift = if which == Theta::Two { 1 } else { 0 };
    ShiftedSeries { quarter_shift: shift, series: HalfQSeries::new(0, c, order) }
}

/// Θ₂⁴ = w · S⁴, integral in w.
pub fn theta2_fourth<C: Coeff>(order: i64) -> HalfQSeries<C> {
    let s = theta_series::<C>(Theta::Two, (order - 1).max(1)).series;
    let s2 = s.mul(&s);
    s2.mul(&s2).shift(1).truncate(order)
}

pub fn theta_fourth<C: Coeff>(which: Theta, order: i64) -> HalfQSeries<C> {
    match which {
        Theta::Two => theta2_fourth(order),
        _ => {
            let s = theta_series::<C>(which, order).series;
            let s2 = s.mul(&s);
            s2.mul(&s2)
        }
    }
}

/// λ = Θ₂⁴/Θ₃⁴.
pub fn lambda_series<C: Coeff>(order: i64) -> HalfQSeries<C> {
    assert!(order >= 2, "lambda_series needs order >= 2");
    let t3 = theta_fourth::<C>(Theta::Three, order);
    theta2_fourth::<C>(order).mul(&t3.invert().expect("Θ₃⁴ has unit constant term"))
}

/// J = λ(1 − λ)/16, computed in the ring (coefficients are integral).
pub fn j_series<C: Coeff>(order: i64) -> HalfQSeries<C> {
    let lam = lambda_series::<C>(order);
    let one_minus = HalfQSeries::one(order).sub(&lam);
    let prod = lam.mul(&one_minus);
    let sixteen = C::from_i64(16);
    let coeffs = prod
        .coeffs()
        .iter()
        .map(|c| {
            let q = c.clone() / sixteen.clone();
            debug_assert!(q.mul_ref(&sixteen) == *c, "λ(1−λ) not divisible by 16");
            q
        })
        .collect();
    HalfQSeries::new(prod.valuation(), coeffs, prod.order())
}

/// 1/J, valuation −1, known modulo w^{order}.
pub fn inverse_j_series<C: Coeff>(order: i64) -> HalfQSeries<C> {
    j_series::<C>(order + 2).invert().expect("J has leading coefficient 1")
}

/// θ³ with θ = Θ₃.
pub fn theta_cubed<C: Coeff>(order: i64) -> HalfQSeries<C> {
    let t = theta_series::<C>(Theta::Three, order).series;
    t.mul(&t).mul(&t)
}

/// 1 − 2λ.
pub fn one_minus_two_lambda<C: Coeff>(order: i64) -> HalfQSeries<C> {
    let lam = lambda_series::<C>(order);
    HalfQSeries::one(order).sub(&lam.scale(&C::from_i64(2)))
}

/// Expansion of 1/J(1 − 1/z) in powers of w(z).
///
/// λ(z+1) = λ/(λ−1) and λ(−1/z) = 1−λ give λ(1−1/z) = (λ−1)/λ, so
/// 1/J(1−1/z) = 16λ²/(λ−1).
pub fn inverse_j_at_cusp_one<C: Coeff>(order: i64) -> HalfQSeries<C> {
    let lam = lambda_series::<C>(order);
    let denom = lam.sub(&HalfQSeries::one(order));
    let num = lam.mul(&lam).scale(&C::from_i64(16));
    num.mul(&denom.invert().expect("λ − 1 has unit constant term"))
}
