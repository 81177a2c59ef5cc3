use nalgebra::DVector;

use crate::error::{Error, Result};

/// Fixed quadrature rule on `[0, 1]`.
///
/// Nodes are strictly increasing and the weights sum to one, so a constant
/// integrand is reproduced exactly up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: RuleKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    GaussLegendre,
    CompositeSimpson,
}

pub const DEFAULT_GAUSS_ORDER: usize = 32;

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::gauss_legendre(DEFAULT_GAUSS_ORDER).expect("default order is valid")
    }
}

impl QuadratureRule {
    /// `n`-point Gauss–Legendre rule mapped to `[0, 1]`; exact for degree `2n - 1`.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("quadrature order must be positive".into()));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        // Roots come in symmetric pairs; solve for the upper half by Newton.
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            // map [-1, 1] -> [0, 1]: t = (1 + s) / 2, weight halves
            nodes[i] = 0.5 * (1.0 - z);
            nodes[n - 1 - i] = 0.5 * (1.0 + z);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Ok(Self { nodes, weights, kind: RuleKind::GaussLegendre })
    }

    /// Composite Simpson rule with `intervals` subintervals (must be even).
    pub fn composite_simpson(intervals: usize) -> Result<Self> {
        if intervals == 0 || !intervals.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "composite Simpson needs a positive even interval count, got {intervals}"
            )));
        }
        let h = 1.0 / intervals as f64;
        let nodes: Vec<f64> = (0..=intervals).map(|i| i as f64 * h).collect();
        let weights = (0..=intervals)
            .map(|i| {
                let m = if i == 0 || i == intervals {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                m * h / 3.0
            })
            .collect();
        Ok(Self { nodes, weights, kind: RuleKind::CompositeSimpson })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    /// Highest polynomial degree integrated exactly.
    pub fn degree_of_exactness(&self) -> usize {
        match self.kind {
            RuleKind::GaussLegendre => 2 * self.len() - 1,
            RuleKind::CompositeSimpson => 3,
        }
    }

    /// `Σ wᵢ f(tᵢ)`, accumulated in node order.
    pub fn integrate<F>(&self, mut f: F) -> Result<DVector<f64>>
    where
        F: FnMut(f64) -> Result<DVector<f64>>,
    {
        let mut acc: Option<DVector<f64>> = None;
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(t)?;
            match acc.as_mut() {
                None => acc = Some(v * w),
                Some(a) => {
                    if a.len() != v.len() {
                        return Err(Error::DimensionMismatch { expected: a.len(), got: v.len() });
                    }
                    a.axpy(w, &v, 1.0);
                }
            }
        }
        Ok(acc.expect("rules have at least one node"))
    }

    /// Weighted sum of already evaluated integrand values (one per node).
    pub fn sum(&self, values: &[DVector<f64>]) -> Result<DVector<f64>> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: values.len() });
        }
        let mut it = values.iter();
        self.integrate(|_| Ok(it.next().expect("length checked").clone()))
    }

    pub fn integrate_scalar<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut acc = 0.0;
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(t)?;
        }
        Ok(acc)
    }
}

/// Legendre polynomial `P_n(z)` and its derivative by the three-term recurrence.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Result<DVector<f64>> {
        Ok(DVector::from_element(1, v))
    }

    #[test]
    fn weights_sum_to_one_and_nodes_increase() {
        for rule in [
            QuadratureRule::gauss_legendre(1).unwrap(),
            QuadratureRule::gauss_legendre(10).unwrap(),
            QuadratureRule::gauss_legendre(32).unwrap(),
            QuadratureRule::gauss_legendre(64).unwrap(),
            QuadratureRule::composite_simpson(20).unwrap(),
        ] {
            let s: f64 = rule.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "weights sum {s}");
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            assert!(rule.nodes().windows(2).all(|p| p[0] < p[1]));
            assert!(rule.nodes().iter().all(|&t| (0.0..=1.0).contains(&t)));
        }
    }

    #[test]
    fn constant_integrand() {
        let v = DVector::from_vec(vec![1.5, -2.0, 7.25]);
        for rule in [QuadratureRule::gauss_legendre(7).unwrap(), QuadratureRule::composite_simpson(4).unwrap()] {
            let r = rule.integrate(|_| Ok(v.clone())).unwrap();
            assert!((r - &v).amax() < 1e-14);
        }
    }

    #[test]
    fn gauss_linear() {
        let rule = QuadratureRule::gauss_legendre(10).unwrap();
        let r = rule.integrate(scalar).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn simpson_exponential() {
        // Composite Simpson on 20 intervals: error ~ h^4 (e - 1) / 180 ≈ 6.0e-8.
        let rule = QuadratureRule::composite_simpson(20).unwrap();
        let r = rule.integrate(|t| scalar(t.exp())).unwrap();
        let exact = std::f64::consts::E - 1.0;
        let err = (r[0] - exact).abs();
        let h: f64 = 0.05;
        let bound = h.powi(4) * (std::f64::consts::E - 1.0) / 180.0;
        assert!(err < 1.05 * bound, "err {err} bound {bound}");
        assert!(err < 1e-7);
        // 1e-10 needs roughly 120 intervals.
        let fine = QuadratureRule::composite_simpson(120).unwrap();
        let r = fine.integrate(|t| scalar(t.exp())).unwrap();
        assert!((r[0] - exact).abs() < 1e-10);
    }

    #[test]
    fn gauss_exact_up_to_degree() {
        let rule = QuadratureRule::gauss_legendre(3).unwrap();
        assert_eq!(rule.degree_of_exactness(), 5);
        let r = rule.integrate_scalar(|t| Ok(t.powi(5))).unwrap();
        assert!((r - 1.0 / 6.0).abs() < 1e-15);
        let r = rule.integrate_scalar(|t| Ok(t.powi(6))).unwrap();
        assert!((r - 1.0 / 7.0).abs() > 1e-6);
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(QuadratureRule::gauss_legendre(0).is_err());
        assert!(QuadratureRule::composite_simpson(3).is_err());
        assert!(QuadratureRule::composite_simpson(0).is_err());
    }
}
