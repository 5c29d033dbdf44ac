//! Gauss–Legendre rules in any [`Real`] precision.

use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct GaussLegendre<T: Real> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

/// P_m(x) and P_m'(x) by the three-term recurrence.
fn legendre<T: Real>(m: usize, x: &T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x.clone();
    for k in 2..=m {
        let kf = T::from_f64(k as f64);
        let p2 = (T::from_f64((2 * k - 1) as f64) * x.clone() * p1.clone()
            - T::from_f64((k - 1) as f64) * p0.clone())
            / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = T::from_f64(m as f64) * (x.clone() * p1.clone() - p0) / (x.clone() * x.clone() - T::one());
    (p1, dp)
}

impl<T: Real> GaussLegendre<T> {
    /// m-point rule on [−1, 1]; nodes ascending.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "Gauss-Legendre needs at least one node");
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        let tol = T::epsilon() * T::from_f64(16.0);
        for i in 0..m {
            let mut xf = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre::<f64>(m, &xf);
                let dx = p / dp;
                xf -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let mut x = T::from_f64(xf);
            let mut dp = legendre(m, &x).1;
            for _ in 0..12 {
                let (p, d) = legendre(m, &x);
                let dx = p / d.clone();
                x -= dx.clone();
                dp = d;
                if dx.abs() <= tol {
                    dp = legendre(m, &x).1;
                    break;
                }
            }
            let w = T::from_f64(2.0) / ((T::one() - x.clone() * x.clone()) * dp.clone() * dp);
            nodes.push(-x);
            weights.push(w);
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn on(&self, a: &T, b: &T) -> (Vec<T>, Vec<T>) {
        let half = (b.clone() - a.clone()) / T::from_f64(2.0);
        let mid = (b.clone() + a.clone()) / T::from_f64(2.0);
        let xs = self.nodes.iter().map(|x| mid.clone() + half.clone() * x.clone()).collect();
        let ws = self.weights.iter().map(|w| half.clone() * w.clone()).collect();
        (xs, ws)
    }
}

/// Composite rule: `m` Gauss points on each of the given consecutive panels.
pub fn composite<T: Real>(edges: &[T], m: usize) -> (Vec<T>, Vec<T>) {
    let rule = GaussLegendre::<T>::new(m);
    let mut xs = Vec::with_capacity(m * edges.len());
    let mut ws = Vec::with_capacity(m * edges.len());
    for pair in edges.windows(2) {
        let (x, w) = rule.on(&pair[0], &pair[1]);
        xs.extend(x);
        ws.extend(w);
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Mp;
    use num_traits::{One, Zero};

    #[test]
    fn integrates_polynomials_exactly() {
        let g = GaussLegendre::<f64>::new(5);
        for deg in 0..10u32 {
            let s: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((s - exact).abs() < 1e-14, "deg {deg}");
        }
    }

    #[test]
    fn nodes_ascending_and_weights_positive() {
        let g = GaussLegendre::<f64>::new(17);
        assert!(g.nodes.windows(2).all(|p| p[0] < p[1]));
        assert!(g.weights.iter().all(|w| *w > 0.0));
        let total: f64 = g.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn extended_precision_exp_integral() {
        type M = Mp<256>;
        let g = GaussLegendre::<M>::new(40);
        let (xs, ws) = g.on(&M::zero(), &M::one());
        let mut s = M::zero();
        for (x, w) in xs.iter().zip(&ws) {
            s += w.clone() * x.exp();
        }
        let exact = M::one().exp() - M::one();
        let err = (s - exact).abs().to_f64();
        assert!(err < 1e-60, "{err}");
    }

    #[test]
    fn composite_covers_panels() {
        let (xs, ws) = composite(&[0.0, 1.0, 3.0], 4);
        assert_eq!(xs.len(), 8);
        let s: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x * x).sum();
        assert!((s - 9.0).abs() < 1e-13);
    }
}
