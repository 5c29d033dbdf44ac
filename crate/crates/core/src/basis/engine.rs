//! Precision-erased access to [`BasisEvaluator`] for callers that work in
//! doubles.

use std::sync::Arc;

use num_complex::Complex;

use super::eval::{generating, BasisEvaluator, GeneratingParams, QuadParams, SquareNode};
use super::gn::{default_order, GnFamily, GnForm, Parity};
use crate::error::{FilError, Result};
use crate::modular::{thetas_at, UpperHalfPoint};
use crate::qseries::Coeff;
use crate::scalar::{c_from_f64, c_to_f64, Precision, Real};
use crate::with_bits;

pub trait Engine: Send + Sync {
    fn n_max(&self) -> usize;
    /// Mantissa bits of the working type.
    fn bits(&self) -> usize;
    fn real(&self, node: SquareNode) -> Vec<[f64; 2]>;
    fn contour(&self, x: Complex<f64>) -> Vec<[Complex<f64>; 2]>;
    fn tail(&self, n: usize, sign: Parity, node: SquareNode) -> Result<f64>;
    fn g(&self, n: usize, sign: Parity, z: Complex<f64>) -> Result<Complex<f64>>;
    fn g_generating(&self, n: usize, sign: Parity, z: Complex<f64>, params: &GeneratingParams) -> Result<Complex<f64>>;
}

impl<T: Real> Engine for BasisEvaluator<T> {
    fn n_max(&self) -> usize {
        BasisEvaluator::n_max(self)
    }
    fn bits(&self) -> usize {
        T::precision_bits()
    }
    fn real(&self, node: SquareNode) -> Vec<[f64; 2]> {
        self.b_real(node).into_iter().map(|[p, m]| [p.to_f64(), m.to_f64()]).collect()
    }
    fn contour(&self, x: Complex<f64>) -> Vec<[Complex<f64>; 2]> {
        self.b_contour(&c_from_f64(x)).into_iter().map(|[p, m]| [c_to_f64(&p), c_to_f64(&m)]).collect()
    }
    fn tail(&self, n: usize, sign: Parity, node: SquareNode) -> Result<f64> {
        Ok(self.b_tail(n, sign, node)?.to_f64())
    }
    fn g(&self, n: usize, sign: Parity, z: Complex<f64>) -> Result<Complex<f64>> {
        Ok(c_to_f64(&self.g_at(n, sign, &c_from_f64(z))?))
    }
    fn g_generating(&self, n: usize, sign: Parity, z: Complex<f64>, params: &GeneratingParams) -> Result<Complex<f64>> {
        Ok(c_to_f64(&self.g_generating(n, sign, &c_from_f64(z), params)?))
    }
}

/// Mantissa bits for a basis up to `n_max`; 0 stands for `f64`.
pub fn working_bits(n_max: usize, precision: Precision, params: &QuadParams) -> Result<usize> {
    match precision {
        Precision::Double if n_max > Precision::DOUBLE_NMAX => {
            Err(FilError::PrecisionGuard { n: n_max, max: Precision::DOUBLE_NMAX })
        }
        Precision::Double => Ok(0),
        Precision::Extended => Ok(Precision::extended_bits(n_max, params.contour_radius.powi(2))),
    }
}

/// b_n^±, a_n, â_n and g_n^± for every n ≤ n_max, evaluated in the
/// precision the index range needs and returned as doubles.
#[derive(Clone)]
pub struct Basis {
    engine: Arc<dyn Engine>,
    family: Arc<GnFamily>,
    params: QuadParams,
}

impl std::fmt::Debug for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Basis")
            .field("n_max", &self.family.n_max)
            .field("bits", &self.engine.bits())
            .field("params", &self.params)
            .finish()
    }
}

impl Basis {
    pub fn new(n_max: usize, precision: Precision, params: QuadParams) -> Result<Self> {
        let bits = working_bits(n_max, precision, &params)?;
        let family = Arc::new(GnFamily::build(n_max, default_order(n_max))?);
        Ok(Self::with_bits(family, bits, params))
    }

    /// `bits = 0` selects `f64`; anything else is rounded up to a supported tier.
    pub fn with_bits(family: Arc<GnFamily>, bits: usize, params: QuadParams) -> Self {
        let engine: Arc<dyn Engine> =
            with_bits!(bits, T => Arc::new(BasisEvaluator::<T>::new(family.clone(), params.clone())));
        Basis { engine, family, params }
    }

    pub fn n_max(&self) -> usize {
        self.family.n_max
    }

    pub fn bits(&self) -> usize {
        self.engine.bits()
    }

    pub fn family(&self) -> &Arc<GnFamily> {
        &self.family
    }

    pub fn params(&self) -> &QuadParams {
        &self.params
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            Err(FilError::IndexBeyondBuilt { n, n_max: self.n_max() })
        } else {
            Ok(())
        }
    }

    /// [b_n^+, b_n^−] for all n at a real node.
    pub fn real_all(&self, node: SquareNode) -> Vec<[f64; 2]> {
        self.engine.real(node)
    }

    /// [b_n^+, b_n^−] for all n at complex x by the contour route.
    pub fn contour_all(&self, x: Complex<f64>) -> Vec<[Complex<f64>; 2]> {
        self.engine.contour(x)
    }

    pub fn eval_bn(&self, n: usize, sign: Parity, x: Complex<f64>) -> Result<Complex<f64>> {
        self.check(n)?;
        Ok(self.engine.contour(x)[n][sign.index()])
    }

    pub fn eval_bn_real(&self, n: usize, sign: Parity, x: f64) -> Result<f64> {
        self.check(n)?;
        Ok(self.engine.real(SquareNode::from_x(x.abs()))[n][sign.index()])
    }

    pub fn eval_bn_tail(&self, n: usize, sign: Parity, x: f64) -> Result<f64> {
        self.engine.tail(n, sign, SquareNode::from_x(x.abs()))
    }

    pub fn eval_bn_tail_node(&self, n: usize, sign: Parity, node: SquareNode) -> Result<f64> {
        self.engine.tail(n, sign, node)
    }

    /// (a_n, â_n) = (b^+ + b^−, b^+ − b^−) at a real node.
    pub fn a_pair(&self, n: usize, node: SquareNode) -> Result<(f64, f64)> {
        self.check(n)?;
        let [p, m] = self.engine.real(node)[n];
        Ok((p + m, p - m))
    }

    pub fn eval_gn(&self, n: usize, sign: Parity, z: UpperHalfPoint) -> Result<Complex<f64>> {
        self.engine.g(n, sign, z.to_complex())
    }

    pub fn eval_gn_generating(
        &self,
        n: usize,
        sign: Parity,
        z: UpperHalfPoint,
        params: &GeneratingParams,
    ) -> Result<Complex<f64>> {
        self.engine.g_generating(n, sign, z.to_complex(), params)
    }
}

fn eval_form<T: Real, C: Coeff>(form: &GnForm<C>, z: &Complex<T>) -> Result<Complex<T>> {
    let th = thetas_at(z)?;
    let x = th.inverse_j();
    let mut p = Complex::new(T::zero(), T::zero());
    for c in form.poly.coeffs().iter().rev() {
        p = p * x.clone() + Complex::new(c.to_real::<T>(), T::zero());
    }
    let th3 = th.t3.clone() * th.t3.clone() * th.t3.clone();
    Ok(match form.sign {
        Parity::Plus => th3 * p,
        Parity::Minus => th3 * th.one_minus_two_lambda() * p,
    })
}

/// g_n^±(z) = θ³P_n^±(1/J), times 1−2λ for the minus family. Indices beyond
/// the double range are evaluated in extended precision.
pub fn eval_gn<C: Coeff>(form: &GnForm<C>, z: UpperHalfPoint) -> Result<Complex<f64>> {
    let bits = if form.n <= Precision::DOUBLE_NMAX { 0 } else { Precision::extended_bits(form.n, 0.0) };
    with_bits!(bits, T => eval_form::<T, C>(form, &z.to_complex()).map(|v| c_to_f64(&v)))
}

/// g_n^±(z) from the generating kernel on [−1+iT, 1+iT]. The kernel terms
/// reach e^{πnT}, so the working precision is raised accordingly.
pub fn eval_gn_generating(n: usize, sign: Parity, z: UpperHalfPoint, params: &GeneratingParams) -> Result<Complex<f64>> {
    let bits = Precision::extended_bits(n, n as f64 * params.height + 8.0);
    with_bits!(bits, T => generating::<T>(n, sign, &z.to_complex(), params).map(|v| c_to_f64(&v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::eval_theta;
    use crate::qseries::{inverse_j_at_cusp_one, Theta};
    use num_rational::BigRational;

    #[test]
    fn double_guard() {
        let err = Basis::new(7, Precision::Double, QuadParams::default()).unwrap_err();
        assert!(matches!(err, FilError::PrecisionGuard { n: 7, max: 6 }));
        assert_eq!(working_bits(6, Precision::Double, &QuadParams::default()).unwrap(), 0);
        assert!(working_bits(30, Precision::Extended, &QuadParams::default()).unwrap() >= 256);
    }

    #[test]
    fn g0_is_theta_cubed() {
        let form = super::super::gn::build_gn(0, Parity::Plus, 8).unwrap();
        let v = eval_gn(&form, UpperHalfPoint::i()).unwrap();
        let t = eval_theta(Theta::Three, UpperHalfPoint::i()).unwrap();
        assert!((v - t * t * t).norm() < 1e-14);
    }

    #[test]
    fn g1_near_cusp_one_matches_expansion() {
        // z = 1 + 0.05i = 1 − 1/z' with z' = 20i, w' = e^{−20π}.
        let form = super::super::gn::build_gn(1, Parity::Plus, 8).unwrap();
        let z = UpperHalfPoint::new(1.0, 0.05).unwrap();
        let v = eval_gn(&form, z).unwrap();
        let w = (-20.0 * std::f64::consts::PI).exp();
        let xs = inverse_j_at_cusp_one::<BigRational>(6);
        let mut x = 0.0;
        for j in xs.valuation()..xs.order() {
            x += xs.coeff(j).to_real::<f64>() * w.powi(j as i32);
        }
        // θ(1 − 1/z') = Θ₄(−1/z') = (−iz')^{1/2} Θ₂(z') = √20 Θ₂(20i).
        let t2 = eval_theta(Theta::Two, UpperHalfPoint::new(0.0, 20.0).unwrap()).unwrap().re;
        let th = 20f64.sqrt() * t2;
        let want = th.powi(3) * (x - 30.0);
        assert!(v.im.abs() < 1e-10 * want.abs());
        assert!((v.re - want).abs() < 1e-10 * want.abs(), "{v} vs {want}");
    }

    #[test]
    fn generating_route_in_extended_precision() {
        let z = UpperHalfPoint::new(0.5, 0.75f64.sqrt()).unwrap();
        let gp = GeneratingParams::default();
        for (n, sign) in [(8, Parity::Plus), (10, Parity::Minus)] {
            let form = super::super::gn::build_gn(n, sign, default_order(n)).unwrap();
            let a = eval_gn(&form, z).unwrap();
            let b = eval_gn_generating(n, sign, z, &gp).unwrap();
            assert!((a - b).norm() < 1e-9 * a.norm(), "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn wrapper_agrees_with_itself_across_routes() {
        let b = Basis::new(3, Precision::Double, QuadParams::default()).unwrap();
        assert_eq!(b.bits(), 53);
        let (a, ah) = b.a_pair(3, SquareNode::exact(3)).unwrap();
        assert_eq!((a, ah), (1.0, 0.0));
        let r = b.eval_bn_real(2, Parity::Minus, 1.7).unwrap();
        let c = b.eval_bn(2, Parity::Minus, Complex::new(1.7, 0.0)).unwrap();
        let t = b.eval_bn_tail(2, Parity::Minus, 1.7).unwrap();
        assert!((r - c.re).abs() < 1e-11 && (r - t).abs() < 1e-11);
        assert!(matches!(b.eval_bn(4, Parity::Plus, Complex::new(0.0, 0.0)), Err(FilError::IndexBeyondBuilt { .. })));
    }
}
