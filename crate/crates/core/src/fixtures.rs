//! Named example structures used by the tests, benchmarks and CLI.

use crate::algebroid::{cotangent_algebroid, from_lie_algebra, AConnection, PreLieAlgebroid};
use crate::field::{Coefficient, DomainBox, TensorField};
use crate::poisson::{linear_bivector, BivectorField};
use crate::poly::Polynomial;
use crate::prelie::PreLieAlgebra;

/// Half width of the box `(-w, w)ⁿ` used by the bivector fixtures.
pub const BIVECTOR_BOX: f64 = 5.0;
/// Half width of the box used by `tangent_r2`.
pub const TANGENT_BOX: f64 = 10.0;

pub const ALGEBRAS: [&str; 3] = ["abelian3", "so3", "broken_bracket"];
pub const BIVECTORS: [&str; 3] = ["nonpoisson_r3", "so3_dual", "symplectic_r2"];
pub const ALGEBROIDS: [&str; 4] = ["tangent_r2", "so3_bundle", "geodesic_r1", "cotangent(nonpoisson_r3)"];

/// An algebroid together with the A-connection its geodesics use.
#[derive(Debug, Clone)]
pub struct AlgebroidFixture {
    pub algebroid: PreLieAlgebroid,
    pub connection: AConnection,
}

pub fn algebra(name: &str) -> Option<PreLieAlgebra> {
    match name {
        "abelian3" => Some(PreLieAlgebra::abelian(3)),
        "so3" => Some(PreLieAlgebra::so3()),
        "broken_bracket" => Some(PreLieAlgebra::broken_bracket()),
        _ => None,
    }
}

/// `π^{12} = x₁`, `π^{13} = −1`, `π^{23} = 0`; its Jacobiator is `−1`.
pub fn nonpoisson_r3() -> BivectorField {
    BivectorField::from_entries(
        DomainBox::cube(3, BIVECTOR_BOX),
        vec![((0, 1), Polynomial::var(3, 0).into()), ((0, 2), Coefficient::constant(3, -1.0))],
    )
    .expect("valid entries")
}

/// Linear Poisson structure on so(3)*.
pub fn so3_dual() -> BivectorField {
    linear_bivector(DomainBox::cube(3, BIVECTOR_BOX), PreLieAlgebra::so3().structure_constants()).expect("27 constants")
}

/// `π^{12} = 1` on ℝ².
pub fn symplectic_r2() -> BivectorField {
    BivectorField::from_entries(DomainBox::cube(2, BIVECTOR_BOX), vec![((0, 1), Coefficient::constant(2, 1.0))]).expect("valid entries")
}

pub fn bivector(name: &str) -> Option<BivectorField> {
    match name {
        "nonpoisson_r3" => Some(nonpoisson_r3()),
        "so3_dual" => Some(so3_dual()),
        "symplectic_r2" => Some(symplectic_r2()),
        _ => None,
    }
}

/// Tangent bundle of ℝ²: identity anchor, zero bracket on coordinate fields.
pub fn tangent_r2() -> AlgebroidFixture {
    let anchor = TensorField::constant(vec![2, 2], 2, &[1.0, 0.0, 0.0, 1.0]).expect("2x2");
    let algebroid = PreLieAlgebroid::new(DomainBox::cube(2, TANGENT_BOX), 2, anchor, vec![Coefficient::zero(2); 2]).expect("shapes");
    AlgebroidFixture { algebroid, connection: AConnection::zero(2, 2) }
}

/// Rank-one bundle over `(-1, 1)` with zero anchor and `Γ¹₁₁ = 1`, so that
/// `g_a(t) = a / (1 + a t)`.
pub fn geodesic_r1() -> AlgebroidFixture {
    let algebroid = PreLieAlgebroid::new(DomainBox::cube(1, 1.0), 1, TensorField::zeros(vec![1, 1], 1), vec![]).expect("shapes");
    AlgebroidFixture { algebroid, connection: AConnection::constant(1, 1, &[1.0]).expect("1 entry") }
}

pub fn lie_bundle(alg: &PreLieAlgebra) -> AlgebroidFixture {
    AlgebroidFixture { algebroid: from_lie_algebra(alg), connection: AConnection::zero(alg.dim(), 1) }
}

pub fn cotangent(bv: &BivectorField) -> AlgebroidFixture {
    AlgebroidFixture { algebroid: cotangent_algebroid(bv), connection: AConnection::zero(bv.dim(), bv.dim()) }
}

/// Resolves an algebroid name, including `cotangent(<bivector>)` for any
/// registered bivector and `<algebra>_bundle` for any registered algebra.
pub fn algebroid(name: &str) -> Option<AlgebroidFixture> {
    match name {
        "tangent_r2" => return Some(tangent_r2()),
        "geodesic_r1" => return Some(geodesic_r1()),
        _ => {}
    }
    if let Some(inner) = name.strip_prefix("cotangent(").and_then(|s| s.strip_suffix(')')) {
        return bivector(inner).map(|bv| cotangent(&bv));
    }
    if let Some(alg) = name.strip_suffix("_bundle").and_then(algebra) {
        return Some(lie_bundle(&alg));
    }
    None
}

/// `(name, kind, description)` for every registered fixture.
pub fn catalogue() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        ("abelian3", "prelie", "abelian 3-dimensional algebra"),
        ("so3", "prelie", "so(3), [e_i, e_j] = eps_ijk e_k"),
        ("broken_bracket", "prelie", "[e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e1; Jac(e1,e2,e3) = e3"),
        ("nonpoisson_r3", "poisson", "pi12 = x1, pi13 = -1, pi23 = 0 on (-5,5)^3; Jac = -1"),
        ("so3_dual", "poisson", "linear Poisson structure pi_ij = eps_ijk x_k on (-5,5)^3"),
        ("symplectic_r2", "poisson", "pi12 = 1 on (-5,5)^2"),
        ("tangent_r2", "algebroid", "tangent bundle of (-10,10)^2, zero connection"),
        ("so3_bundle", "algebroid", "so(3) over (-1,1), zero anchor, zero connection"),
        ("geodesic_r1", "algebroid", "rank 1 over (-1,1), zero anchor, Gamma = 1; exp(1) = 1/2"),
        ("cotangent(nonpoisson_r3)", "algebroid", "cotangent algebroid of nonpoisson_r3 (not anchor compatible)"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_catalogued_name_resolves() {
        for (name, kind, _) in catalogue() {
            let found = match kind {
                "prelie" => algebra(name).is_some(),
                "poisson" => bivector(name).is_some(),
                _ => algebroid(name).is_some(),
            };
            assert!(found, "{name}");
        }
        assert!(algebroid("cotangent(so3_dual)").is_some());
        assert!(algebroid("broken_bracket_bundle").is_some());
        assert!(algebroid("cotangent(nope)").is_none());
    }

    #[test]
    fn cotangent_of_nonpoisson_is_not_anchor_compatible() {
        let fx = algebroid("cotangent(nonpoisson_r3)").unwrap();
        let x = [0.3, -0.4, 0.2];
        assert!(fx.algebroid.anchor_compatibility_defect(&x).unwrap() > 0.5);
        // frame Jacobiator of exact frames is d(Jac) = d(-1) = 0
        assert_eq!(fx.algebroid.max_frame_jacobiator(&[nalgebra::DVector::from_column_slice(&x)]).unwrap(), 0.0);
        let so3 = algebroid("cotangent(so3_dual)").unwrap();
        assert!(so3.algebroid.anchor_compatibility_defect(&x).unwrap() < 1e-12);
    }
}
