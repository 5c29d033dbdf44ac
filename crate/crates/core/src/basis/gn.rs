//! Exact construction of the weakly holomorphic forms g_n^±.
//!
//! g_n^+ = θ³ P_n^+(1/J) with P_n^+ monic of degree n, normalized so that
//! g_n^+ = w^{−n} + O(w). g_n^− = θ³(1−2λ) P_n^−(1/J) with P_n^− monic and
//! P_n^−(0) = 0; its n−1 free coefficients clear w^{−n+1} … w^{−1}, and the
//! constant term is then forced (−2 for perfect squares n, 0 otherwise).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{FilError, Result};
use crate::qseries::{
    inverse_j_series, one_minus_two_lambda, theta_series, Coeff, HalfQSeries, RationalPolynomial,
    Theta,
};

/// Fourier eigenvalue label of b_n^±.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Plus, Parity::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Parity::Plus => 1.0,
            Parity::Minus => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Parity::Plus => 0,
            Parity::Minus => 1,
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Plus => "+",
            Parity::Minus => "-",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GnForm<C: Coeff = BigRational> {
    pub n: usize,
    pub sign: Parity,
    pub poly: RationalPolynomial<C>,
    pub series: HalfQSeries<C>,
}

impl<C: Coeff> GnForm<C> {
    /// Coefficient of w^j in the expansion.
    pub fn coeff(&self, j: i64) -> C {
        self.series.coeff(j)
    }

    pub fn to_rational(&self) -> GnForm<BigRational> {
        GnForm {
            n: self.n,
            sign: self.sign,
            poly: self.poly.to_rational(),
            series: self.series.to_rational(),
        }
    }
}

/// g_n^± for every n ≤ n_max, expansions known modulo w^order.
#[derive(Clone, Debug)]
pub struct GnFamily {
    pub n_max: usize,
    pub order: i64,
    plus: Vec<GnForm<BigInt>>,
    minus: Vec<GnForm<BigInt>>,
}

impl GnFamily {
    pub fn build(n_max: usize, order: i64) -> Result<Self> {
        if order < 2 {
            return Err(FilError::Contract(format!("order {order} < 2")));
        }
        let nm = n_max as i64;
        let x = inverse_j_series::<BigInt>(order + nm);
        let theta = theta_series::<BigInt>(Theta::Three, order + nm + 2).series;
        let omt = one_minus_two_lambda::<BigInt>(order + nm + 2);

        // Y_k = θ³X^k and Z_k = θ³(1−2λ)X^k, k = 0..=n_max.
        let mut ys = Vec::with_capacity(n_max + 1);
        let mut zs = Vec::with_capacity(n_max + 1);
        let mut xk = HalfQSeries::<BigInt>::one(order + nm + 1);
        for k in 0..=n_max {
            if k > 0 {
                xk = xk.mul(&x);
            }
            let y = theta.mul(&theta.mul(&theta.mul(&xk)));
            zs.push(if k == 0 { HalfQSeries::zero(order) } else { omt.mul(&y).truncate(order) });
            ys.push(y.truncate(order));
        }

        let mut plus = Vec::with_capacity(n_max + 1);
        let mut minus = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let p = solve_principal(n, &ys, 0, 0)?;
            plus.push(GnForm { n, sign: Parity::Plus, series: combine(&p, &ys, order), poly: RationalPolynomial::new(p) });
            if n == 0 {
                minus.push(GnForm {
                    n,
                    sign: Parity::Minus,
                    poly: RationalPolynomial::zero(),
                    series: HalfQSeries::zero(order),
                });
            } else {
                let p = solve_principal(n, &zs, 1, 1)?;
                minus.push(GnForm { n, sign: Parity::Minus, series: combine(&p, &zs, order), poly: RationalPolynomial::new(p) });
            }
        }
        Ok(GnFamily { n_max, order, plus, minus })
    }

    pub fn get(&self, n: usize, sign: Parity) -> Result<&GnForm<BigInt>> {
        let list = match sign {
            Parity::Plus => &self.plus,
            Parity::Minus => &self.minus,
        };
        list.get(n).ok_or(FilError::IndexBeyondBuilt { n, n_max: self.n_max })
    }

    pub fn forms(&self) -> impl Iterator<Item = &GnForm<BigInt>> {
        self.plus.iter().chain(self.minus.iter())
    }
}

/// Monic coefficients p_0..p_n (p_k = 0 for k < first) such that
/// Σ p_k B_k has no w^{−j} terms for lowest ≤ j < n. B_k has leading term w^{−k}.
fn solve_principal(n: usize, basis: &[HalfQSeries<BigInt>], first: usize, lowest: usize) -> Result<Vec<BigInt>> {
    let mut p = vec![BigInt::zero(); n + 1];
    p[n] = BigInt::one();
    for j in (lowest..n).rev() {
        let jj = -(j as i64);
        let mut acc = BigInt::zero();
        for k in (j + 1)..=n {
            if !p[k].is_zero() {
                acc += &p[k] * basis[k].coeff(jj);
            }
        }
        if j < first {
            continue;
        }
        let diag = basis[j].coeff(jj);
        let inv = diag.try_recip().ok_or(FilError::SingularSystem(n))?;
        p[j] = -(acc * inv);
    }
    Ok(p)
}

fn combine(p: &[BigInt], basis: &[HalfQSeries<BigInt>], order: i64) -> HalfQSeries<BigInt> {
    let n = p.len() - 1;
    let lo = -(n as i64);
    let mut out = vec![BigInt::zero(); (order - lo) as usize];
    for (k, pk) in p.iter().enumerate() {
        if pk.is_zero() {
            continue;
        }
        let b = &basis[k];
        for (i, c) in b.coeffs().iter().enumerate() {
            let e = b.valuation() + i as i64;
            if e < order {
                out[(e - lo) as usize].add_mul(pk, c);
            }
        }
    }
    HalfQSeries::new(lo, out, order)
}

/// Exact g_n^± with rational coefficients.
pub fn build_gn(n: usize, sign: Parity, order: i64) -> Result<GnForm<BigRational>> {
    let fam = GnFamily::build(n, order)?;
    Ok(fam.get(n, sign)?.to_rational())
}

/// Expansion order for indices up to `n_max`. Coefficients grow like
/// e^{2π√(nj)}, so c_j e^{−πj} drops below e^{−20π} once
/// √j ≥ √n + √(n+20).
pub fn default_order(n_max: usize) -> i64 {
    let n = n_max as f64;
    let m = (n.sqrt() + (n + 20.0).sqrt()).powi(2) + 8.0;
    m.ceil() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn ints(p: &RationalPolynomial<BigInt>) -> Vec<i64> {
        p.coeffs().iter().map(|c| c.to_i64().unwrap()).collect()
    }

    #[test]
    fn small_polynomials() {
        let fam = GnFamily::build(3, 8).unwrap();
        assert_eq!(ints(&fam.get(0, Parity::Plus).unwrap().poly), vec![1]);
        assert_eq!(ints(&fam.get(1, Parity::Plus).unwrap().poly), vec![-30, 1]);
        assert_eq!(ints(&fam.get(2, Parity::Plus).unwrap().poly), vec![192, -54, 1]);
        assert_eq!(ints(&fam.get(3, Parity::Plus).unwrap().poly), vec![-896, 1212, -78, 1]);
        assert_eq!(ints(&fam.get(1, Parity::Minus).unwrap().poly), vec![0, 1]);
        assert_eq!(ints(&fam.get(2, Parity::Minus).unwrap().poly), vec![0, -22, 1]);
        assert_eq!(ints(&fam.get(3, Parity::Minus).unwrap().poly), vec![0, 252, -46, 1]);
        assert!(fam.get(0, Parity::Minus).unwrap().poly.degree().is_none());
    }

    #[test]
    fn normalizations() {
        let fam = GnFamily::build(6, 10).unwrap();
        for n in 0..=6usize {
            let g = &fam.get(n, Parity::Plus).unwrap().series;
            let nn = n as i64;
            assert_eq!(g.valuation(), -nn);
            assert!(g.coeff(-nn).is_one());
            for j in (-nn + 1)..=0 {
                assert!(g.coeff(j).is_zero(), "n={n} w^{j}");
            }
            if n == 0 {
                continue;
            }
            let h = &fam.get(n, Parity::Minus).unwrap().series;
            assert!(h.coeff(-nn).is_one());
            for j in (-nn + 1)..0 {
                assert!(h.coeff(j).is_zero());
            }
            let square = (1..=3).any(|r| r * r == n);
            assert_eq!(h.coeff(0), BigInt::from(if square { -2 } else { 0 }), "n={n}");
        }
    }

    #[test]
    fn first_expansions() {
        let fam = GnFamily::build(1, 4).unwrap();
        let g = &fam.get(1, Parity::Plus).unwrap().series;
        let v: Vec<i64> = (-1..4).map(|j| g.coeff(j).to_i64().unwrap()).collect();
        assert_eq!(v, vec![1, 0, 252, 3640, 26760]);
        let h = &fam.get(1, Parity::Minus).unwrap().series;
        let v: Vec<i64> = (-1..3).map(|j| h.coeff(j).to_i64().unwrap()).collect();
        assert_eq!(v, vec![1, -2, -272, -3552]);
        let g0 = &fam.get(0, Parity::Plus).unwrap().series;
        assert_eq!(g0.coeff(1).to_i64(), Some(6));
    }

    #[test]
    fn rational_api() {
        let g = build_gn(2, Parity::Minus, 6).unwrap();
        assert!(g.poly.is_monic());
        assert!(g.poly.coeff(0).is_zero());
        assert_eq!(g.series.valuation(), -2);
    }
}
