use nalgebra::DVector;

use super::{AConnection, AlgebroidMCOneForm, PreLieAlgebroid};
use crate::error::Result;
use crate::field::{Coefficient, DomainBox, TensorField};
use crate::numerics::{gradient, FdConfig, OdeConfig, QuadratureRule};
use crate::par;
use crate::poisson::{BivectorField, PoissonMCOneForm};
use crate::prelie::PreLieAlgebra;

/// Lie algebra as an algebroid over the interval `(-1, 1)` with zero anchor.
pub fn from_lie_algebra(alg: &PreLieAlgebra) -> PreLieAlgebroid {
    let r = alg.dim();
    let np = r * (r - 1) / 2;
    let mut upper = vec![Coefficient::zero(1); r * np];
    for k in 0..r {
        let mut p = 0;
        for i in 0..r {
            for j in (i + 1)..r {
                upper[k * np + p] = Coefficient::constant(1, alg.structure(k, i, j));
                p += 1;
            }
        }
    }
    PreLieAlgebroid::new(DomainBox::cube(1, 1.0), r, TensorField::zeros(vec![1, r], 1), upper).expect("shapes are consistent")
}

fn negated(c: &Coefficient) -> Coefficient {
    match c.as_polynomial() {
        Some(p) => p.scale(-1.0).into(),
        None => {
            let c = c.clone();
            Coefficient::func(move |x| -c.eval(x))
        }
    }
}

/// Cotangent algebroid of a bivector on the coordinate coframe:
/// `ρ(dx_i) = Σ_l π^{il} ∂_l`, `[dx_i, dx_j] = Σ_k ∂_k π^{ij} dx_k`.
pub fn cotangent_algebroid(bv: &BivectorField) -> PreLieAlgebroid {
    let n = bv.dim();
    let fd = FdConfig::default();
    let mut anchor = vec![Coefficient::zero(n); n * n];
    for l in 0..n {
        for i in 0..n {
            if let Some((c, sign)) = bv.coefficient(i, l) {
                anchor[l * n + i] = if sign > 0.0 { c.clone() } else { negated(c) };
            }
        }
    }
    let np = n * (n - 1) / 2;
    let mut upper = vec![Coefficient::zero(n); n * np];
    for k in 0..n {
        let mut p = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let (c, _) = bv.coefficient(i, j).expect("off-diagonal");
                upper[k * np + p] = if c.is_zero() { Coefficient::zero(n) } else { c.partial(k, fd) };
                p += 1;
            }
        }
    }
    let anchor = TensorField::new(vec![n, n], anchor).expect("n*n entries");
    PreLieAlgebroid::new(bv.domain().clone(), n, anchor, upper).expect("shapes are consistent")
}

/// One `(x, ξ, ζ)` point of the Poisson–algebroid comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeSample {
    pub x: DVector<f64>,
    pub xi: DVector<f64>,
    pub zeta: DVector<f64>,
}

/// Largest `‖∇_x φ_ξ(ζ)(x) − φ̂_ξ(ζ)‖_∞`, comparing the spatial gradient of
/// the Poisson solution at the base point `x` with the algebroid solution on
/// the cotangent algebroid (zero A-connection).
pub fn verify_poisson_algebroid_bridge(
    bv: &BivectorField,
    samples: &[BridgeSample],
    rule: &QuadratureRule,
    ode: &OdeConfig,
    fd: &FdConfig,
) -> Result<f64> {
    let poisson = PoissonMCOneForm::new(bv, rule.clone(), *ode);
    let alg = cotangent_algebroid(bv);
    let conn = AConnection::zero(bv.dim(), bv.dim());
    let form = AlgebroidMCOneForm::new(&alg, &conn, rule.clone(), *ode, *fd);
    let per = par::map(samples, |s| -> Result<f64> {
        let lhs = gradient(|y| poisson.solve_one_form(y, &s.xi, &s.zeta), &s.x, fd)?;
        let rhs = form.solve_one_form(&s.x, &s.xi, &s.zeta)?;
        Ok((lhs - rhs).amax())
    });
    per.into_iter().try_fold(0.0_f64, |acc, v| Ok(acc.max(v?)))
}
