use mcforge_core::fixtures;
use mcforge_core::numerics::{FdConfig, OdeConfig, QuadratureRule};
use mcforge_core::poisson::{BivectorField, PoissonMCOneForm};
use mcforge_core::prelie::{LieMCOneForm, PreLieAlgebra};
use mcforge_core::sampling::{halton_ball, Sampler};
use nalgebra::DVector;
use proptest::prelude::*;

fn form(bv: &BivectorField) -> PoissonMCOneForm<'_> {
    PoissonMCOneForm::new(bv, QuadratureRule::default(), OdeConfig::default())
}

fn e(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

fn vec3() -> impl Strategy<Value = DVector<f64>> {
    prop::array::uniform3(-1.0..1.0f64).prop_map(|a| DVector::from_column_slice(&a))
}

/// Smallest `‖realization_defect‖_F / ‖ξ‖` seen on `nonpoisson_r3` over the
/// seeded sample below (seed 11, 20 points, `‖ξ‖ ∈ [0.05, 0.2]`), measured by
/// brute-force block inversion at 0.4657 and frozen with a safety margin.
const NONPOISSON_REALIZATION_RATIO: f64 = 0.45;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn flow_preserves_the_generator(x in vec3(), xi in vec3()) {
        for name in ["nonpoisson_r3", "so3_dual"] {
            let bv = fixtures::bivector(name).unwrap();
            let f = form(&bv);
            prop_assert!((f.solve_one_form(&x, &xi, &xi).unwrap() - xi.dot(&x)).abs() < 1e-10);
        }
    }

    #[test]
    fn defect_antisymmetric(x in vec3(), xi in vec3(), z in vec3(), w in vec3()) {
        let bv = fixtures::nonpoisson_r3();
        let f = form(&bv);
        let fd = FdConfig::default();
        let a = f.mc_defect(&x, &xi, &z, &w, &fd).unwrap();
        let b = f.mc_defect(&x, &xi, &w, &z, &fd).unwrap();
        prop_assert!((a + b).abs() < 1e-9);
    }
}

#[test]
fn linear_poisson_reduces_to_lie_algebra() {
    let so3 = PreLieAlgebra::so3();
    let bv = fixtures::so3_dual();
    let f = form(&bv);
    let lie = LieMCOneForm::new(&so3, QuadratureRule::default());
    let mut s = Sampler::new(17);
    for _ in 0..20 {
        let (x, xi, zeta) = (s.in_ball(3, 1.0), s.in_ball(3, 1.0), s.in_ball(3, 1.0));
        let want = lie.solve_one_form(&xi, &zeta).unwrap().dot(&x);
        assert!((f.solve_one_form(&x, &xi, &zeta).unwrap() - want).abs() < 1e-8);
    }
}

#[test]
fn hamiltonian_field_is_coadjoint() {
    let so3 = PreLieAlgebra::so3();
    let bv = fixtures::so3_dual();
    let x = [0.0, 0.0, 1.0];
    let got = bv.hamiltonian_vector(&x, &so3.basis(0)).unwrap();
    let want = so3.ad(&so3.basis(0)).unwrap().matrix.transpose() * DVector::from_column_slice(&x);
    assert_eq!(got, want);
}

#[test]
fn realization_holds_for_linear_poisson() {
    let bv = fixtures::so3_dual();
    let f = form(&bv);
    let fd = FdConfig::default();
    let mut s = Sampler::new(23);
    for _ in 0..20 {
        let (x, xi) = (s.in_ball(3, 1.0), s.in_ball(3, 0.2));
        assert!(f.realization_defect(&x, &xi, &fd).unwrap().amax() < 1e-4);
    }
}

#[test]
fn realization_fails_for_nonpoisson() {
    let bv = fixtures::nonpoisson_r3();
    let f = form(&bv);
    let fd = FdConfig::default();
    let mut s = Sampler::new(11);
    for _ in 0..20 {
        let x = s.in_ball(3, 1.0);
        let xi = s.in_shell(3, 0.05, 0.2);
        let d = f.realization_defect(&x, &xi, &fd).unwrap();
        assert!(d.norm() >= NONPOISSON_REALIZATION_RATIO * xi.norm(), "{}", d.norm() / xi.norm());
        assert!(d.norm() >= 1e-3 * xi.norm());
    }
}

#[test]
fn zero_section_realizes_every_bivector() {
    let fd = FdConfig::default();
    for name in fixtures::BIVECTORS {
        let bv = fixtures::bivector(name).unwrap();
        let f = form(&bv);
        for x in halton_ball(bv.dim(), 5, 1.0) {
            let d = f.realization_defect(&x, &DVector::zeros(bv.dim()), &fd).unwrap();
            assert!(d.amax() < 1e-6, "{name}");
        }
    }
}

#[test]
fn nonpoisson_identities() {
    let bv = fixtures::nonpoisson_r3();
    let f = form(&bv);
    let fd = FdConfig::default();
    let mut s = Sampler::new(3);
    for _ in 0..10 {
        let x = s.in_ball(3, 1.0);
        assert_eq!(bv.jacobiator_linear(&e(3, 0), &e(3, 1), &e(3, 2), x.as_slice()).unwrap(), -1.0);
    }
    let x = DVector::from_column_slice(&[0.3, -0.2, 0.4]);
    let d = f.verify_derivative_identity(&x, &e(3, 0), &e(3, 1), &e(3, 2), &fd).unwrap();
    assert!(d.residual() < 2e-3);
    let xi = DVector::from_column_slice(&[0.2, 0.3, -0.1]);
    let i = f.verify_integral_identity(&x, &xi, &e(3, 1), &e(3, 2), &fd).unwrap();
    assert!(i.residual() < 1e-3);
}

#[test]
fn jacobi_holds_iff_defect_vanishes() {
    let fd = FdConfig::default();
    let mut s = Sampler::new(29);
    for name in fixtures::BIVECTORS {
        let bv = fixtures::bivector(name).unwrap();
        let n = bv.dim();
        let points: Vec<_> = (0..20).map(|_| s.in_ball(n, 1.0)).collect();
        let pairs: Vec<_> = points.iter().map(|x| (x.clone(), s.in_ball(n, 0.5))).collect();
        let jac = bv.max_basis_jacobiator(&points).unwrap();
        let mc = form(&bv).max_basis_mc_defect(&pairs, &fd).unwrap();
        assert_eq!(jac < 1e-8, mc < 1e-4, "{name}: jac {jac} mc {mc}");
    }
}

#[test]
fn invertibility_survives_near_the_zero_section() {
    let bv = fixtures::so3_dual();
    let f = form(&bv);
    let mut s = Sampler::new(31);
    let samples: Vec<_> = (0..10).map(|_| (s.in_ball(3, 1.0), s.in_shell(3, 0.05, 0.5))).collect();
    let best = f.largest_invertible_fiber_norm(&samples, &FdConfig::default());
    let largest = samples.iter().map(|(_, xi)| xi.norm()).fold(0.0, f64::max);
    assert_eq!(best, largest);
}
