//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the per-criterion lines always reach the output; exits non-zero if any
//! criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::FRAC_PI_2;
use std::path::Path;
use std::process::{Command, ExitCode, Output};

use nalgebra::{DMatrix, DVector};

use mcforge_core::algebroid::{verify_poisson_algebroid_bridge, AlgebroidMCOneForm, AuxConnection, BridgeSample, ConnectionSample};
use mcforge_core::fixtures::{self, AlgebroidFixture};
use mcforge_core::numerics::{expm, solve_ivp, FdConfig, OdeConfig, QuadratureRule};
use mcforge_core::poisson::{BivectorField, PoissonMCOneForm};
use mcforge_core::prelie::{LieMCOneForm, PreLieAlgebra};
use mcforge_core::sampling::{halton_ball, Sampler};

/// Smallest `‖realization_defect‖_F / ‖ξ‖` for `nonpoisson_r3` over the frozen
/// sample (seed 11, 20 points, `x` in the unit ball, `‖ξ‖ ∈ [0.05, 0.2]`),
/// measured by block inversion of `dφ̃` and rounded down.
const NONPOISSON_REALIZATION_RATIO: f64 = 0.45;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

fn e(n: usize, i: usize) -> DVector<f64> {
    let mut out = DVector::zeros(n);
    out[i] = 1.0;
    out
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn lie_form(alg: &PreLieAlgebra) -> LieMCOneForm<'_> {
    LieMCOneForm::new(alg, QuadratureRule::default())
}

fn poisson_form(bv: &BivectorField) -> PoissonMCOneForm<'_> {
    PoissonMCOneForm::new(bv, QuadratureRule::default(), OdeConfig::default())
}

fn algebroid_form(fx: &AlgebroidFixture) -> AlgebroidMCOneForm<'_> {
    AlgebroidMCOneForm::new(&fx.algebroid, &fx.connection, QuadratureRule::default(), OdeConfig::default(), FdConfig::default())
}

fn prelie_so3() -> Outcome {
    let alg = PreLieAlgebra::so3();
    let f = lie_form(&alg);
    let fd = FdConfig::default();
    let defect = f.max_mc_defect(&halton_ball(3, 50, 1.0), &fd).map_err(err)?;
    ensure!(defect < 5e-7, "max mc defect {defect:e}");
    let got = f.solve_one_form(&v(&[FRAC_PI_2, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0])).map_err(err)?;
    let want = v(&[0.0, 2.0 / std::f64::consts::PI, -2.0 / std::f64::consts::PI]);
    let off = (&got - &want).amax();
    ensure!(off < 1e-10, "solution {got} off by {off:e}");
    Ok(format!("max mc defect {defect:.2e} over 50 points; closed form off by {off:.2e}"))
}

fn prelie_broken_bracket() -> Outcome {
    let alg = PreLieAlgebra::broken_bracket();
    let f = lie_form(&alg);
    let fd = FdConfig::default();
    let jac = alg.jacobiator(&e(3, 0), &e(3, 1), &e(3, 2)).map_err(err)?;
    ensure!(jac == v(&[0.0, 0.0, 1.0]), "Jac(e1,e2,e3) = {jac}");
    let mut s = Sampler::new(101);
    let (mut deriv, mut integral, mut weak) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..20 {
        let (x, y, z) = (s.in_ball(3, 1.0), s.in_ball(3, 1.0), s.in_ball(3, 1.0));
        deriv = deriv.max(f.verify_derivative_identity(&x, &y, &z, &fd).map_err(err)?.residual());
        integral = integral.max(f.verify_integral_identity(&x, &y, &z, &fd).map_err(err)?.residual());
        weak = weak.max(f.verify_weak_equation(&x, &y, &fd).map_err(err)?.amax());
    }
    ensure!(deriv < 1e-4, "derivative identity {deriv:e}");
    ensure!(integral < 1e-5, "integral identity {integral:e}");
    ensure!(weak < 5e-7, "weak equation {weak:e}");
    Ok(format!("Jac = e3 exactly; derivative {deriv:.2e}, integral {integral:.2e}, weak {weak:.2e} over 20 points"))
}

fn prelie_equivalence() -> Outcome {
    let fd = FdConfig::default();
    let points = halton_ball(3, 50, 1.0);
    let (mut lie, mut not_lie) = (0, 0);
    let mut summary = Vec::new();
    for name in fixtures::ALGEBRAS {
        let alg = fixtures::algebra(name).expect("registered");
        let defect = lie_form(&alg).max_mc_defect(&points, &fd).map_err(err)?;
        let is_lie = alg.is_lie(1e-10);
        ensure!(is_lie == (defect < 1e-4), "{name}: is_lie {is_lie}, defect {defect:e}");
        if is_lie {
            lie += 1;
        } else {
            not_lie += 1;
        }
        summary.push(format!("{name} {defect:.1e}"));
    }
    ensure!(lie > 0 && not_lie > 0, "only one direction exercised");
    Ok(summary.join(", "))
}

fn poisson_so3_dual() -> Outcome {
    let so3 = PreLieAlgebra::so3();
    let lie = lie_form(&so3);
    let bv = fixtures::so3_dual();
    let f = poisson_form(&bv);
    let fd = FdConfig::default();
    let mut s = Sampler::new(102);
    let mut bridge = 0.0_f64;
    for _ in 0..20 {
        let (x, xi, zeta) = (s.in_ball(3, 1.0), s.in_ball(3, 1.0), s.in_ball(3, 1.0));
        let want = lie.solve_one_form(&xi, &zeta).map_err(err)?.dot(&x);
        bridge = bridge.max((f.solve_one_form(&x, &xi, &zeta).map_err(err)? - want).abs());
    }
    ensure!(bridge < 1e-8, "linear bridge {bridge:e}");
    let mut realization = 0.0_f64;
    for _ in 0..20 {
        let (x, xi) = (s.in_ball(3, 1.0), s.in_ball(3, 0.2));
        realization = realization.max(f.realization_defect(&x, &xi, &fd).map_err(err)?.amax());
    }
    ensure!(realization < 1e-4, "realization defect {realization:e}");
    Ok(format!("linear bridge {bridge:.2e}, realization {realization:.2e}"))
}

fn poisson_nonpoisson() -> Outcome {
    let bv = fixtures::nonpoisson_r3();
    let f = poisson_form(&bv);
    let fd = FdConfig::default();
    let mut s = Sampler::new(103);
    for _ in 0..10 {
        let x = s.in_ball(3, 1.0);
        let jac = bv.jacobiator_linear(&e(3, 0), &e(3, 1), &e(3, 2), x.as_slice()).map_err(err)?;
        ensure!(jac == -1.0, "Jac at {x} is {jac}");
    }
    let (mut deriv, mut integral) = (0.0_f64, 0.0_f64);
    for _ in 0..5 {
        let (x, xi, z, w) = (s.in_ball(3, 1.0), s.in_ball(3, 0.5), s.in_ball(3, 1.0), s.in_ball(3, 1.0));
        deriv = deriv.max(f.verify_derivative_identity(&x, &xi, &z, &w, &fd).map_err(err)?.residual());
        integral = integral.max(f.verify_integral_identity(&x, &xi, &z, &w, &fd).map_err(err)?.residual());
    }
    ensure!(deriv < 2e-3, "derivative identity {deriv:e}");
    ensure!(integral < 1e-3, "integral identity {integral:e}");
    let mut frozen = Sampler::new(11);
    let mut ratio = f64::INFINITY;
    for _ in 0..20 {
        let x = frozen.in_ball(3, 1.0);
        let xi = frozen.in_shell(3, 0.05, 0.2);
        ratio = ratio.min(f.realization_defect(&x, &xi, &fd).map_err(err)?.norm() / xi.norm());
    }
    ensure!(ratio >= NONPOISSON_REALIZATION_RATIO, "realization ratio {ratio} below frozen {NONPOISSON_REALIZATION_RATIO}");
    Ok(format!("Jac = -1 at 10 points; derivative {deriv:.2e}, integral {integral:.2e}; realization ratio {ratio:.4} >= {NONPOISSON_REALIZATION_RATIO}"))
}

fn poisson_zero_section() -> Outcome {
    let fd = FdConfig::default();
    let mut worst = 0.0_f64;
    for name in fixtures::BIVECTORS {
        let bv = fixtures::bivector(name).expect("registered");
        let f = poisson_form(&bv);
        for x in halton_ball(bv.dim(), 10, 1.0) {
            let d = f.realization_defect(&x, &DVector::zeros(bv.dim()), &fd).map_err(err)?.amax();
            ensure!(d < 1e-6, "{name} at {x}: {d:e}");
            worst = worst.max(d);
        }
    }
    Ok(format!("max defect {worst:.2e} over {} bivectors", fixtures::BIVECTORS.len()))
}

fn algebroid_so3_bundle() -> Outcome {
    let alg = PreLieAlgebra::so3();
    let lie = lie_form(&alg);
    let fx = fixtures::algebroid("so3_bundle").expect("registered");
    let f = algebroid_form(&fx);
    let fd = FdConfig::default();
    let aux = AuxConnection::zero(3, 1);
    let x = v(&[0.0]);
    let mut s = Sampler::new(104);
    let (mut solve, mut mc, mut ident) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..5 {
        let (a, b, c) = (s.in_ball(3, 1.0), s.in_ball(3, 1.0), s.in_ball(3, 1.0));
        solve = solve.max((f.solve_one_form(&x, &a, &b).map_err(err)? - lie.solve_one_form(&a, &b).map_err(err)?).amax());
        mc = mc.max((f.mc_defect(&aux, &x, &a, &b, &c, &fd).map_err(err)? - lie.mc_defect(&a, &b, &c, &fd).map_err(err)?).amax());
        let (da, dl) = (f.verify_derivative_identity(&aux, &x, &a, &b, &c, &fd).map_err(err)?, lie.verify_derivative_identity(&a, &b, &c, &fd).map_err(err)?);
        let (ia, il) = (f.verify_integral_identity(&aux, &x, &a, &b, &c, &fd).map_err(err)?, lie.verify_integral_identity(&a, &b, &c, &fd).map_err(err)?);
        for (p, q) in [(&da, &dl), (&ia, &il)] {
            ident = ident.max((&p.lhs - &q.lhs).amax()).max((&p.rhs - &q.rhs).amax()).max(p.residual());
        }
    }
    ensure!(solve < 1e-7, "solve_one_form differs by {solve:e}");
    ensure!(mc < 1e-5, "mc_defect differs by {mc:e}");
    ensure!(ident < 2e-3, "identities differ by {ident:e}");
    Ok(format!("solve {solve:.2e}, mc {mc:.2e}, identities {ident:.2e}"))
}

fn algebroid_geodesics() -> Outcome {
    let ode = OdeConfig::default();
    let (mut scaling, mut a_path) = (0.0_f64, 0.0_f64);
    for name in ["tangent_r2", "so3_bundle", "geodesic_r1", "cotangent(so3_dual)"] {
        let fx = fixtures::algebroid(name).expect("registered");
        let (alg, conn) = (&fx.algebroid, &fx.connection);
        let (m, r) = (alg.base_dim(), alg.rank());
        let mut s = Sampler::new(105);
        for _ in 0..10 {
            let (x, a) = (s.in_ball(m, 0.5), s.in_ball(r, 0.5));
            for (scale, t) in [(0.5, 1.0), (0.3, 1.0), (2.0, 0.5), (0.7, 1.3)] {
                let (gn, vn) = alg.geodesic_state(conn, &x, &(&a * scale), t, &ode).map_err(err)?;
                let (gf, vf) = alg.geodesic_state(conn, &x, &a, scale * t, &ode).map_err(err)?;
                scaling = scaling.max((gn - gf).amax()).max((vn - vf * scale).amax());
            }
            let geo = alg.geodesic(conn, &x, &a, &ode).map_err(err)?;
            ensure!(geo.reached_time_one, "{name}: geodesic from {a} stopped early");
            a_path = a_path.max(alg.a_path_defect(&geo).map_err(err)?);
        }
    }
    ensure!(scaling < 1e-8, "scaling {scaling:e}");
    ensure!(a_path < 1e-7, "A-path {a_path:e}");
    let fx = fixtures::geodesic_r1();
    let (exp, _) = fx.algebroid.exp_and_target(&fx.connection, &v(&[0.0]), &v(&[1.0]), &ode).map_err(err)?;
    let off = (exp[0] - 0.5).abs();
    ensure!(off < 1e-8, "exp(1) = {}", exp[0]);
    Ok(format!("scaling {scaling:.2e}, A-path {a_path:.2e}, |exp(1) - 1/2| {off:.2e}"))
}

fn algebroid_connection_independence() -> Outcome {
    let fd = FdConfig::default();
    let mut out = Vec::new();
    for name in ["tangent_r2", "so3_bundle"] {
        let fx = fixtures::algebroid(name).expect("registered");
        let (m, r) = (fx.algebroid.base_dim(), fx.algebroid.rank());
        let mut s = Sampler::new(106);
        let mut aux = || AuxConnection::constant(r, m, &(0..r * m * r).map(|_| s.uniform(-1.0, 1.0)).collect::<Vec<_>>()).expect("sized");
        let (aux1, aux2) = (aux(), aux());
        let samples: Vec<_> =
            (0..40).map(|_| ConnectionSample { x: s.in_ball(m, 0.5), a: s.in_ball(r, 0.5), b: s.in_ball(r, 1.0), c: s.in_ball(r, 1.0) }).collect();
        let d = algebroid_form(&fx).verify_connection_independence(&aux1, &aux2, &samples, &fd).map_err(err)?;
        ensure!(d < 1e-5, "{name}: {d:e}");
        out.push(format!("{name} {d:.2e}"));
    }
    Ok(out.join(", "))
}

fn bridge() -> Outcome {
    let rule = QuadratureRule::default();
    let (ode, fd) = (OdeConfig::default(), FdConfig::default());
    let mut out = Vec::new();
    for name in ["so3_dual", "symplectic_r2"] {
        let bv = fixtures::bivector(name).expect("registered");
        let n = bv.dim();
        let mut s = Sampler::new(107);
        let samples: Vec<_> = (0..10).map(|_| BridgeSample { x: s.in_ball(n, 1.0), xi: s.in_ball(n, 0.5), zeta: s.in_ball(n, 1.0) }).collect();
        let d = verify_poisson_algebroid_bridge(&bv, &samples, &rule, &ode, &fd).map_err(err)?;
        ensure!(d < 1e-3, "{name}: {d:e}");
        out.push(format!("{name} {d:.2e}"));
    }
    let alg = fixtures::algebroid("cotangent(so3_dual)").expect("registered").algebroid;
    let so3 = PreLieAlgebra::so3();
    let mut worst = 0.0_f64;
    for x in halton_ball(3, 10, 2.0) {
        let c = alg.structure_at(x.as_slice()).map_err(err)?;
        for (got, want) in c.iter().zip(so3.structure_constants()) {
            worst = worst.max((got - want).abs());
        }
    }
    ensure!(worst < 1e-9, "cotangent structure functions off by {worst:e}");
    out.push(format!("cotangent(so3_dual) = eps_ijk within {worst:.1e}"));
    Ok(out.join(", "))
}

fn numerics() -> Outcome {
    let err_at = |n: usize| -> Result<f64, String> {
        let tr = solve_ivp(|_, y| Ok(y.clone()), 0.0, 1.0, &v(&[1.0]), &OdeConfig::new(n).map_err(err)?).map_err(err)?;
        Ok((tr.final_state()[0] - std::f64::consts::E).abs())
    };
    let ratio = err_at(10)? / err_at(20)?;
    ensure!((ratio - 16.0).abs() <= 2.0, "RK4 ratio {ratio}");
    let mut s = Sampler::new(108);
    let mut inverse = 0.0_f64;
    for _ in 0..10 {
        let a = DMatrix::from_fn(4, 4, |_, _| s.uniform(-1.0, 1.0));
        let prod = expm(&a).map_err(err)? * expm(&(-&a)).map_err(err)?;
        inverse = inverse.max((prod - DMatrix::identity(4, 4)).amax());
    }
    ensure!(inverse < 1e-10, "expm inverse {inverse:e}");
    let mut quad = 0.0_f64;
    for n in [3, 8, 32] {
        let rule = QuadratureRule::gauss_legendre(n).map_err(err)?;
        for k in 0..=5 {
            let got = rule.integrate_scalar(|t| Ok(t.powi(k))).map_err(err)?;
            quad = quad.max((got - 1.0 / (k as f64 + 1.0)).abs());
        }
    }
    ensure!(quad < 1e-13, "quadrature {quad:e}");
    Ok(format!("RK4 ratio {ratio:.3}, expm inverse {inverse:.2e}, degree-5 quadrature {quad:.2e}"))
}

fn mcforge(args: &[&str], threads: Option<&str>) -> Result<Output, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mcforge"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    cmd.output().map_err(err)
}

fn cli() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let write = |name: &str, body: &str| -> Result<String, String> {
        let p = dir.path().join(name);
        std::fs::write(&p, body).map_err(err)?;
        Ok(p.display().to_string())
    };
    let passing = write(
        "pass.json",
        r#"{"kind": "prelie", "fixture": "so3", "suite": ["mc_defect", "derivative_identity", "integral_identity"], "sample": {"seed": 5, "points": 16}}"#,
    )?;
    let failing = write("fail.json", r#"{"kind": "prelie", "fixture": "broken_bracket", "suite": ["jacobi"]}"#)?;
    let malformed = write("bad.json", r#"{"kind": "prelie", "fixture": "so3", "suite": ["boundary"], "extra": true}"#)?;

    let first = mcforge(&["run", &passing], None)?;
    let second = mcforge(&["run", &passing], None)?;
    let one = mcforge(&["run", &passing], Some("1"))?;
    let four = mcforge(&["run", &passing], Some("4"))?;
    ensure!(!first.stdout.is_empty(), "empty report");
    ensure!(first.stdout == second.stdout, "two runs differ");
    ensure!(one.stdout == four.stdout && one.stdout == first.stdout, "1 vs 4 threads differ");
    let codes = [
        first.status.code(),
        mcforge(&["run", &failing], None)?.status.code(),
        mcforge(&["run", &malformed], None)?.status.code(),
        mcforge(&["run", &Path::new(&malformed).with_extension("missing").display().to_string()], None)?.status.code(),
    ];
    ensure!(codes == [Some(0), Some(1), Some(2), Some(2)], "exit codes {codes:?}");
    Ok(format!("{} report bytes identical over 2 runs and 1/4 threads; exit codes 0/1/2", first.stdout.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("prelie/so3", prelie_so3),
        ("prelie/broken_bracket", prelie_broken_bracket),
        ("prelie equivalence", prelie_equivalence),
        ("poisson/so3_dual", poisson_so3_dual),
        ("poisson/nonpoisson_r3", poisson_nonpoisson),
        ("poisson zero section", poisson_zero_section),
        ("algebroid/so3_bundle", algebroid_so3_bundle),
        ("algebroid geodesics", algebroid_geodesics),
        ("algebroid connection independence", algebroid_connection_independence),
        ("bridge", bridge),
        ("numerics", numerics),
        ("cli", cli),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {reason}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
