//! Scalar abstraction shared by every numerical routine.
//!
//! Evaluation code is written once against [`Real`] and instantiated for
//! `f64` and for the arbitrary-precision [`Mp`] wrapper. Complex values are
//! plain `num_complex::Complex<T>`; the transcendental helpers live here
//! because `Complex<T>` only provides them for `Float` types.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{Num, NumAssign, One, ToPrimitive, Zero};

/// Real scalar with the elementary functions needed by the evaluators.
pub trait Real:
    Num + NumAssign + Clone + fmt::Debug + PartialOrd + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_f64(x: f64) -> Self;
    fn from_bigint(x: &BigInt) -> Self;
    fn to_f64(&self) -> f64;
    fn pi() -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan(&self) -> Self;
    fn abs(&self) -> Self;
    /// Mantissa width in bits.
    fn precision_bits() -> usize;

    fn from_i64(x: i64) -> Self {
        Self::from_bigint(&BigInt::from(x))
    }

    fn epsilon() -> Self {
        Self::from_f64(2f64.powi(-(Self::precision_bits() as i32)))
    }

    fn atan2(&self, x: &Self) -> Self {
        let zero = Self::zero();
        let pi = Self::pi();
        if *x > zero {
            (self.clone() / x.clone()).atan()
        } else if *x < zero {
            let base = (self.clone() / x.clone()).atan();
            if *self >= zero {
                base + pi
            } else {
                base - pi
            }
        } else if *self > zero {
            pi / Self::from_f64(2.0)
        } else if *self < zero {
            -(pi / Self::from_f64(2.0))
        } else {
            zero
        }
    }

    fn powi(&self, n: i32) -> Self {
        let mut base = if n < 0 { Self::one() / self.clone() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_bigint(x: &BigInt) -> Self {
        x.to_f64().unwrap_or(f64::NAN)
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn atan(&self) -> Self {
        f64::atan(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn precision_bits() -> usize {
        53
    }
    fn epsilon() -> Self {
        f64::EPSILON / 2.0
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Binary floating point with `BITS` mantissa bits.
#[derive(Clone)]
pub struct Mp<const BITS: usize>(BigFloat);

impl<const B: usize> Mp<B> {
    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    fn wrap(x: BigFloat) -> Self {
        Mp(x)
    }
}

impl<const B: usize> fmt::Debug for Mp<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mp<{}>({:e})", B, self.to_f64())
    }
}

impl<const B: usize> fmt::Display for Mp<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const B: usize> PartialEq for Mp<B> {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl<const B: usize> PartialOrd for Mp<B> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! mp_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $op:ident) => {
        impl<const B: usize> $tr for Mp<B> {
            type Output = Self;
            fn $m(self, rhs: Self) -> Self {
                Mp(self.0.$op(&rhs.0, B, RM))
            }
        }
        impl<'a, const B: usize> $tr<&'a Mp<B>> for &'a Mp<B> {
            type Output = Mp<B>;
            fn $m(self, rhs: &'a Mp<B>) -> Mp<B> {
                Mp(self.0.$op(&rhs.0, B, RM))
            }
        }
        impl<const B: usize> $atr for Mp<B> {
            fn $am(&mut self, rhs: Self) {
                self.0 = self.0.$op(&rhs.0, B, RM);
            }
        }
    };
}

mp_binop!(Add, add, AddAssign, add_assign, add);
mp_binop!(Sub, sub, SubAssign, sub_assign, sub);
mp_binop!(Mul, mul, MulAssign, mul_assign, mul);
mp_binop!(Div, div, DivAssign, div_assign, div);

impl<const B: usize> Rem for Mp<B> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        Mp(self.0.rem(&rhs.0))
    }
}

impl<const B: usize> RemAssign for Mp<B> {
    fn rem_assign(&mut self, rhs: Self) {
        self.0 = self.0.rem(&rhs.0);
    }
}

impl<const B: usize> Neg for Mp<B> {
    type Output = Self;
    fn neg(self) -> Self {
        Mp(self.0.neg())
    }
}

impl<const B: usize> Zero for Mp<B> {
    fn zero() -> Self {
        Mp(BigFloat::from_word(0, B))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl<const B: usize> One for Mp<B> {
    fn one() -> Self {
        Mp(BigFloat::from_word(1, B))
    }
}

impl<const B: usize> Num for Mp<B> {
    type FromStrRadixErr = String;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, String> {
        let rdx = match radix {
            2 => Radix::Bin,
            8 => Radix::Oct,
            10 => Radix::Dec,
            16 => Radix::Hex,
            r => return Err(format!("unsupported radix {r}")),
        };
        let v = with_consts(|cc| BigFloat::parse(s, rdx, B, RM, cc));
        if v.is_nan() {
            Err(format!("cannot parse {s:?}"))
        } else {
            Ok(Mp(v))
        }
    }
}

impl<const B: usize> Real for Mp<B> {
    fn from_f64(x: f64) -> Self {
        Mp(BigFloat::from_f64(x, B))
    }

    fn from_i64(x: i64) -> Self {
        Mp(BigFloat::from_i64(x, B.max(64)).add(&BigFloat::from_word(0, B), B, RM))
    }

    fn from_bigint(x: &BigInt) -> Self {
        let (sign, words) = x.to_u64_digits();
        if words.is_empty() {
            return Self::zero();
        }
        let s = if sign == num_bigint::Sign::Minus { Sign::Neg } else { Sign::Pos };
        let e = (64 * words.len()) as i32;
        let exact = BigFloat::from_words(&words, s, e);
        Mp(exact.add(&BigFloat::from_word(0, B), B, RM))
    }

    fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((m, _, s, e, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        if self.0.is_zero() || m.is_empty() {
            return 0.0;
        }
        let top = m[m.len() - 1] as f64;
        let next = if m.len() > 1 { m[m.len() - 2] as f64 } else { 0.0 };
        let frac = top * 2f64.powi(-64) + next * 2f64.powi(-128);
        let mag = if e > 1100 {
            f64::INFINITY
        } else if e < -1100 {
            0.0
        } else {
            frac * 2f64.powi(e)
        };
        if s == Sign::Neg {
            -mag
        } else {
            mag
        }
    }

    fn pi() -> Self {
        Mp(with_consts(|cc| cc.pi(B, RM)))
    }
    fn exp(&self) -> Self {
        Mp::wrap(with_consts(|cc| self.0.exp(B, RM, cc)))
    }
    fn ln(&self) -> Self {
        Mp::wrap(with_consts(|cc| self.0.ln(B, RM, cc)))
    }
    fn sqrt(&self) -> Self {
        Mp(self.0.sqrt(B, RM))
    }
    fn sin(&self) -> Self {
        Mp::wrap(with_consts(|cc| self.0.sin(B, RM, cc)))
    }
    fn cos(&self) -> Self {
        Mp::wrap(with_consts(|cc| self.0.cos(B, RM, cc)))
    }
    fn atan(&self) -> Self {
        Mp::wrap(with_consts(|cc| self.0.atan(B, RM, cc)))
    }
    fn abs(&self) -> Self {
        Mp(self.0.abs())
    }
    fn precision_bits() -> usize {
        B
    }
}

pub fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

pub fn cf<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::from_f64(re), T::from_f64(im))
}

pub fn c_to_f64<T: Real>(z: &Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn c_from_f64<T: Real>(z: Complex<f64>) -> Complex<T> {
    cf(z.re, z.im)
}

pub fn cabs<T: Real>(z: &Complex<T>) -> T {
    let (a, b) = (z.re.abs(), z.im.abs());
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if big.is_zero() {
        return big;
    }
    let r = small / big.clone();
    big * (T::one() + r.clone() * r).sqrt()
}

pub fn carg<T: Real>(z: &Complex<T>) -> T {
    z.im.atan2(&z.re)
}

pub fn cexp<T: Real>(z: &Complex<T>) -> Complex<T> {
    let m = z.re.exp();
    Complex::new(m.clone() * z.im.cos(), m * z.im.sin())
}

/// e^{iπ·r}
pub fn expi_pi<T: Real>(r: &T) -> Complex<T> {
    let a = T::pi() * r.clone();
    Complex::new(a.cos(), a.sin())
}

/// Principal square root (branch cut on the negative real axis).
pub fn csqrt<T: Real>(z: &Complex<T>) -> Complex<T> {
    let r = cabs(z);
    if r.is_zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let half = T::from_f64(0.5);
    let re = ((r.clone() + z.re.clone()) * half.clone()).max_of(T::zero()).sqrt();
    let im = ((r - z.re.clone()) * half).max_of(T::zero()).sqrt();
    if z.im < T::zero() {
        Complex::new(re, -im)
    } else {
        Complex::new(re, im)
    }
}

pub fn cln<T: Real>(z: &Complex<T>) -> Complex<T> {
    Complex::new(cabs(z).ln(), carg(z))
}

pub fn cinv<T: Real>(z: &Complex<T>) -> Complex<T> {
    let d = z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone();
    Complex::new(z.re.clone() / d.clone(), -z.im.clone() / d)
}

pub fn cscale<T: Real>(z: &Complex<T>, s: &T) -> Complex<T> {
    Complex::new(z.re.clone() * s.clone(), z.im.clone() * s.clone())
}

/// Working precision names exposed to configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    Extended,
}

impl Precision {
    /// Largest basis index the double path accepts.
    pub const DOUBLE_NMAX: usize = 6;

    /// Mantissa bits used by the extended path for indices up to `n_max`
    /// and Gaussian factors up to e^{π·extra_exponent}.
    pub fn extended_bits(n_max: usize, extra_exponent: f64) -> usize {
        let need = 96.0 + 4.6 * n_max as f64 + 4.6 * extra_exponent.max(0.0);
        let tiers = [128, 192, 256, 320, 384, 448, 512, 640, 768, 1024];
        tiers.into_iter().find(|&b| b as f64 >= need).unwrap_or(1024)
    }
}

impl std::str::FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(format!("unknown precision {other:?} (double|extended)")),
        }
    }
}

/// Runs `$body` with `$t` bound to a scalar type chosen from a bit count.
#[macro_export]
macro_rules! with_bits {
    ($bits:expr, $t:ident => $body:expr) => {{
        match $bits {
            0 => {
                type $t = f64;
                $body
            }
            1..=128 => {
                type $t = $crate::scalar::Mp<128>;
                $body
            }
            129..=192 => {
                type $t = $crate::scalar::Mp<192>;
                $body
            }
            193..=256 => {
                type $t = $crate::scalar::Mp<256>;
                $body
            }
            257..=320 => {
                type $t = $crate::scalar::Mp<320>;
                $body
            }
            321..=384 => {
                type $t = $crate::scalar::Mp<384>;
                $body
            }
            385..=448 => {
                type $t = $crate::scalar::Mp<448>;
                $body
            }
            449..=512 => {
                type $t = $crate::scalar::Mp<512>;
                $body
            }
            513..=640 => {
                type $t = $crate::scalar::Mp<640>;
                $body
            }
            641..=768 => {
                type $t = $crate::scalar::Mp<768>;
                $body
            }
            _ => {
                type $t = $crate::scalar::Mp<1024>;
                $body
            }
        }
    }};
}
