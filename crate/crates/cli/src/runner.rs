//! Dispatch from scenario suites to the verifiers.
//!
//! Sample points for each suite are drawn up front from a ChaCha8 stream
//! seeded by `(seed, suite name)`, then evaluated with [`par::map`], which
//! keeps input order. The record list is therefore the same for any thread
//! count, and adding or removing a suite leaves the other suites' samples
//! unchanged.

use nalgebra::DVector;

use mcforge_core::algebroid::{cotangent_algebroid, AConnection, AlgebroidMCOneForm, AuxConnection, ConstantSection, ANCHORED_TOLERANCE};
use mcforge_core::fixtures::AlgebroidFixture;
use mcforge_core::numerics::{central_diff, gradient, solve_ivp, Discretization};
use mcforge_core::par;
use mcforge_core::poisson::{BivectorField, PoissonMCOneForm};
use mcforge_core::prelie::{LieMCOneForm, PreLieAlgebra};
use mcforge_core::sampling::Sampler;
use mcforge_core::{Error, Result};

use crate::registry::{self, Resolved};
use crate::report::{CheckRecord, Environment, Report};
use crate::scenario::{Kind, Scenario};
use crate::ConfigError;

/// Thresholds used by the `equivalence` verdicts: Jacobi holds when the
/// Jacobiator is below the first, the defect vanishes when below the second.
pub const PRELIE_EQUIVALENCE: (f64, f64) = (1e-10, 1e-4);
pub const POISSON_EQUIVALENCE: (f64, f64) = (1e-8, 1e-4);
pub const ALGEBROID_EQUIVALENCE: (f64, f64) = (1e-8, 1e-4);

/// Scale pairs `(s, t)` for the geodesic rescaling check; all have `s t ≤ 1`.
const SCALINGS: [(f64, f64); 4] = [(0.5, 1.0), (0.3, 1.0), (2.0, 0.5), (2.0, 0.25)];

pub fn run(scenario: &Scenario, disc: &Discretization) -> std::result::Result<Report, ConfigError> {
    let fixture = registry::resolve(scenario.kind, &scenario.fixture)?;
    let mut checks = Vec::new();
    for suite in &scenario.suite {
        let ctx = Ctx {
            name: suite,
            tol: scenario.tolerance(suite),
            points: scenario.sample.points,
            disc,
        };
        let mut s = Sampler::new(suite_seed(scenario.sample.seed, suite));
        let records = match (scenario.kind, &fixture) {
            (Kind::Prelie, Resolved::Algebra(a)) => prelie_suite(&ctx, a, &mut s),
            (Kind::Poisson, Resolved::Bivector(b)) => poisson_suite(&ctx, b, &mut s),
            (Kind::Bridge, Resolved::Bivector(b)) => bridge_suite(&ctx, b, &mut s),
            (Kind::Algebroid, Resolved::Algebroid(f)) => algebroid_suite(&ctx, f, &mut s),
            _ => unreachable!("registry resolves fixtures by kind"),
        };
        checks.extend(records);
    }
    Ok(Report::new(scenario.clone(), Environment::new(disc), checks))
}

/// FNV-1a of the suite name mixed into the scenario seed.
fn suite_seed(seed: u64, suite: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in suite.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    seed ^ h
}

struct Ctx<'a> {
    name: &'a str,
    tol: f64,
    points: usize,
    disc: &'a Discretization,
}

type Sides = (Vec<f64>, Vec<f64>);

impl Ctx<'_> {
    fn record(&self, point: Vec<f64>, outcome: Result<Sides>) -> CheckRecord {
        match outcome {
            Ok((lhs, rhs)) => CheckRecord::compare(self.name, point, lhs, rhs, self.tol),
            Err(e) => CheckRecord::failed(self.name, point, self.tol, e.to_string()),
        }
    }

    /// Evaluates `f` on every input in parallel, keeping input order.
    fn sweep<T, P, F>(&self, inputs: &[T], point: P, f: F) -> Vec<CheckRecord>
    where
        T: Sync,
        P: Fn(&T) -> Vec<f64> + Sync + Send,
        F: Fn(&T) -> Result<Sides> + Sync + Send,
    {
        par::map(inputs, |t| self.record(point(t), f(t)))
    }

    /// Jacobi holds iff the defect vanishes, as a 0/1 comparison.
    fn verdict(&self, jac: Result<f64>, mc: Result<f64>, thresholds: (f64, f64)) -> CheckRecord {
        match (jac, mc) {
            (Ok(jac), Ok(mc)) => {
                let holds = jac < thresholds.0;
                let vanishes = mc < thresholds.1;
                CheckRecord::compare(self.name, vec![], vec![indicator(holds)], vec![indicator(vanishes)], self.tol).with_detail(format!(
                    "max jacobiator {jac:.3e} (jacobi holds below {:.0e}), max mc defect {mc:.3e} (vanishes below {:.0e})",
                    thresholds.0, thresholds.1
                ))
            }
            (Err(e), _) | (_, Err(e)) => CheckRecord::failed(self.name, vec![], self.tol, e.to_string()),
        }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn cat(parts: &[&DVector<f64>]) -> Vec<f64> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

fn zeros_like(v: &[f64]) -> Vec<f64> {
    vec![0.0; v.len()]
}

fn basis(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

fn triples(n: usize) -> Vec<(usize, usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).flat_map(move |j| ((j + 1)..n).map(move |k| (i, j, k)))).collect()
}

fn draw<T>(n: usize, mut f: impl FnMut() -> T) -> Vec<T> {
    (0..n).map(|_| f()).collect()
}

fn prelie_suite(ctx: &Ctx, alg: &PreLieAlgebra, s: &mut Sampler) -> Vec<CheckRecord> {
    let n = alg.dim();
    let form = LieMCOneForm::new(alg, ctx.disc.rule.clone());
    let fd = &ctx.disc.fd;
    let e = |i| basis(n, i);
    match ctx.name {
        "jacobi" => {
            let t = triples(n);
            ctx.sweep(
                &t,
                |&(i, j, k)| vec![(i + 1) as f64, (j + 1) as f64, (k + 1) as f64],
                |&(i, j, k)| {
                    let jac = alg.jacobiator(&e(i), &e(j), &e(k))?;
                    Ok((cat(&[&jac]), vec![0.0; n]))
                },
            )
        }
        "boundary" => {
            let xs = draw(ctx.points, || s.in_ball(n, 1.0));
            ctx.sweep(&xs, |x| cat(&[x]), |x| Ok((cat(&[&form.solve_one_form(x, x)?]), cat(&[x]))))
        }
        "weak_equation" => {
            let xy = draw(ctx.points, || (s.in_ball(n, 1.0), s.in_ball(n, 1.0)));
            ctx.sweep(
                &xy,
                |(x, y)| cat(&[x, y]),
                |(x, y)| {
                    let r = cat(&[&form.verify_weak_equation(x, y, fd)?]);
                    let z = zeros_like(&r);
                    Ok((r, z))
                },
            )
        }
        "mc_defect" => {
            let xs = draw(ctx.points, || s.in_ball(n, 1.0));
            ctx.sweep(
                &xs,
                |x| cat(&[x]),
                |x| {
                    let mut lhs = Vec::new();
                    for (i, j) in pairs(n) {
                        lhs.extend(form.mc_defect(x, &e(i), &e(j), fd)?.iter());
                    }
                    let z = zeros_like(&lhs);
                    Ok((lhs, z))
                },
            )
        }
        "derivative_identity" | "integral_identity" => {
            let xyz = draw(ctx.points, || (s.in_ball(n, 1.0), s.in_ball(n, 1.0), s.in_ball(n, 1.0)));
            let derivative = ctx.name == "derivative_identity";
            ctx.sweep(
                &xyz,
                |(x, y, z)| cat(&[x, y, z]),
                |(x, y, z)| {
                    let p = if derivative { form.verify_derivative_identity(x, y, z, fd)? } else { form.verify_integral_identity(x, y, z, fd)? };
                    Ok((cat(&[&p.lhs]), cat(&[&p.rhs])))
                },
            )
        }
        "equivalence" => {
            let xs = draw(ctx.points, || s.in_ball(n, 1.0));
            vec![ctx.verdict(Ok(alg.max_basis_jacobiator()), form.max_mc_defect(&xs, fd), PRELIE_EQUIVALENCE)]
        }
        other => unreachable!("suite {other} validated against the registry"),
    }
}

/// Lie algebra with `[e_i, e_j] = Σ_k c^k_{ij} e_k` when `π^{ij} = Σ_k c^k_{ij} x_k`.
fn linear_part(bv: &BivectorField) -> Result<PreLieAlgebra> {
    let n = bv.dim();
    let mut brackets = Vec::new();
    for (i, j) in pairs(n) {
        let (coef, sign) = bv.coefficient(i, j).expect("off-diagonal");
        let lin = coef
            .as_polynomial()
            .and_then(|p| p.homogeneous_linear_coefficients())
            .ok_or_else(|| Error::InvalidArgument(format!("pi^{{{}{}}} is not linear in x", i + 1, j + 1)))?;
        brackets.push(((i, j), lin.into_iter().map(|c| c * sign).collect()));
    }
    PreLieAlgebra::from_brackets(n, &brackets)
}

fn poisson_suite(ctx: &Ctx, bv: &BivectorField, s: &mut Sampler) -> Vec<CheckRecord> {
    let n = bv.dim();
    let form = PoissonMCOneForm::new(bv, ctx.disc.rule.clone(), ctx.disc.ode);
    let fd = &ctx.disc.fd;
    let e = |i| basis(n, i);
    match ctx.name {
        "jacobi" => {
            let xs = draw(ctx.points, || s.in_ball(n, 1.0));
            ctx.sweep(
                &xs,
                |x| cat(&[x]),
                |x| {
                    let lhs = triples(n)
                        .into_iter()
                        .map(|(i, j, k)| bv.jacobiator_linear(&e(i), &e(j), &e(k), x.as_slice()))
                        .collect::<Result<Vec<_>>>()?;
                    let z = zeros_like(&lhs);
                    Ok((lhs, z))
                },
            )
        }
        "boundary" => {
            let xs = draw(ctx.points, || (s.in_ball(n, 1.0), s.in_ball(n, 0.5)));
            ctx.sweep(&xs, |(x, xi)| cat(&[x, xi]), |(x, xi)| Ok((vec![form.solve_one_form(x, xi, xi)?], vec![xi.dot(x)])))
        }
        "mc_defect" => {
            let xs = draw(ctx.points, || (s.in_ball(n, 1.0), s.in_ball(n, 0.5)));
            ctx.sweep(
                &xs,
                |(x, xi)| cat(&[x, xi]),
                |(x, xi)| {
                    let lhs = pairs(n).into_iter().map(|(i, j)| form.mc_defect(x, xi, &e(i), &e(j), fd)).collect::<Result<Vec<_>>>()?;
                    let z = zeros_like(&lhs);
                    Ok((lhs, z))
                },
            )
        }
        "derivative_identity" | "integral_identity" => {
            let xs = draw(ctx.points, || (s.in_ball(n, 1.0), s.in_ball(n, 0.5), s.in_ball(n, 1.0), s.in_ball(n, 1.0)));
            let derivative = ctx.name == "derivative_identity";
            ctx.sweep(
                &xs,
                |(x, xi, z, w)| cat(&[x, xi, z, w]),
                |(x, xi, z, w)| {
                    let p = if derivative { form.verify_derivative_identity(x, xi, z, w, fd)? } else { form.verify_integral_identity(x, xi, z, w, fd)? };
                    Ok((cat(&[&p.lhs]), cat(&[&p.rhs])))
                },
            )
        }
        "realization" | "zero_section" => {
            let zero = ctx.name == "zero_section";
            let xs = draw(ctx.points, || {
                let x = s.in_ball(n, 1.0);
                let xi = if zero { DVector::zeros(n) } else { s.in_ball(n, 0.2) };
                (x, xi)
            });
            ctx.sweep(
                &xs,
                |(x, xi)| cat(&[x, xi]),
                |(x, xi)| {
                    let big = form.symplectic_matrix(x, xi, fd)?.poisson_tensor()?;
                    let induced = big.view((0, 0), (n, n)).into_owned();
                    Ok((induced.as_slice().to_vec(), bv.pi(x.as_slice())?.as_slice().to_vec()))
                },
            )
        }
        "linear_bridge" => {
            let lie = match linear_part(bv) {
                Ok(a) => a,
                Err(err) => return vec![CheckRecord::failed(ctx.name, vec![], ctx.tol, err.to_string())],
            };
            let lie_form = LieMCOneForm::new(&lie, ctx.disc.rule.clone());
            let xs = draw(ctx.points, || (s.in_ball(n, 1.0), s.in_ball(n, 1.0), s.in_ball(n, 1.0)));
            ctx.sweep(
                &xs,
                |(x, xi, z)| cat(&[x, xi, z]),
                |(x, xi, z)| Ok((vec![form.solve_one_form(x, xi, z)?], vec![lie_form.solve_one_form(xi, z)?.dot(x)])),
            )
        }
        "equivalence" => {
            let xs = draw(ctx.points, || (s.in_ball(n, 1.0), s.in_ball(n, 0.5)));
            let points: Vec<_> = xs.iter().map(|(x, _)| x.clone()).collect();
            vec![ctx.verdict(bv.max_basis_jacobiator(&points), form.max_basis_mc_defect(&xs, fd), POISSON_EQUIVALENCE)]
        }
        other => unreachable!("suite {other} validated against the registry"),
    }
}

fn bridge_suite(ctx: &Ctx, bv: &BivectorField, s: &mut Sampler) -> Vec<CheckRecord> {
    let n = bv.dim();
    let fd = &ctx.disc.fd;
    let alg = cotangent_algebroid(bv);
    match ctx.name {
        "bridge" => {
            let poisson = PoissonMCOneForm::new(bv, ctx.disc.rule.clone(), ctx.disc.ode);
            let conn = AConnection::zero(n, n);
            let form = AlgebroidMCOneForm::new(&alg, &conn, ctx.disc.rule.clone(), ctx.disc.ode, *fd);
            let xs = draw(ctx.points, || (s.in_ball(n, 1.0), s.in_ball(n, 0.5), s.in_ball(n, 1.0)));
            ctx.sweep(
                &xs,
                |(x, xi, z)| cat(&[x, xi, z]),
                |(x, xi, z)| {
                    let lhs = gradient(|y| poisson.solve_one_form(y, xi, z), x, fd)?;
                    let rhs = form.solve_one_form(x, xi, z)?;
                    Ok((cat(&[&lhs]), cat(&[&rhs])))
                },
            )
        }
        "cotangent_structure" => {
            let xs = draw(ctx.points, || s.in_ball(n, 1.0));
            ctx.sweep(
                &xs,
                |x| cat(&[x]),
                |x| {
                    let c = alg.structure_at(x.as_slice())?;
                    let mut lhs = Vec::new();
                    let mut rhs = Vec::new();
                    for k in 0..n {
                        let dpi = central_diff(|t| Ok(DVector::from_column_slice(bv.pi((x + basis(n, k) * t).as_slice())?.as_slice())), 0.0, fd)?;
                        for (i, j) in pairs(n) {
                            lhs.push(c[(k * n + i) * n + j]);
                            rhs.push(dpi[j * n + i]);
                        }
                    }
                    Ok((lhs, rhs))
                },
            )
        }
        other => unreachable!("suite {other} validated against the registry"),
    }
}

fn algebroid_suite(ctx: &Ctx, fx: &AlgebroidFixture, s: &mut Sampler) -> Vec<CheckRecord> {
    let alg = &fx.algebroid;
    let conn = &fx.connection;
    let (m, r) = (alg.base_dim(), alg.rank());
    let disc = ctx.disc;
    let (ode, fd) = (&disc.ode, &disc.fd);
    let form = AlgebroidMCOneForm::new(alg, conn, disc.rule.clone(), disc.ode, disc.fd);
    let half = alg.domain().lo().iter().zip(alg.domain().hi()).map(|(lo, hi)| 0.5 * (hi - lo)).fold(f64::INFINITY, f64::min);
    let rx = (0.5 * half).min(0.5);
    let zero_aux = AuxConnection::zero(r, m);
    let e = |i| basis(r, i);
    let base_fiber = |k: usize, s: &mut Sampler| -> Vec<(DVector<f64>, Vec<DVector<f64>>)> {
        draw(ctx.points, || (s.in_ball(m, rx), (0..k).map(|_| s.in_ball(r, 0.5)).collect()))
    };
    let point = |(x, fs): &(DVector<f64>, Vec<DVector<f64>>)| {
        let mut p = cat(&[x]);
        for f in fs {
            p.extend(f.iter());
        }
        p
    };
    match ctx.name {
        "jacobi" => {
            let xs = base_fiber(0, s);
            ctx.sweep(
                &xs,
                point,
                |(x, _)| {
                    let mut lhs = Vec::new();
                    for (i, j, k) in triples(r) {
                        lhs.extend(alg.jacobiator_frame(x.as_slice(), i, j, k)?.iter());
                    }
                    let z = zeros_like(&lhs);
                    Ok((lhs, z))
                },
            )
        }
        "geodesic_scaling" => {
            let xs = base_fiber(1, s);
            ctx.sweep(
                &xs,
                point,
                |(x, fs)| {
                    let a = &fs[0];
                    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
                    for (scale, t) in SCALINGS {
                        let (gn, vn) = alg.geodesic_state(conn, x, &(a * scale), t, ode)?;
                        let (gf, vf) = alg.geodesic_state(conn, x, a, scale * t, ode)?;
                        lhs.extend(cat(&[&gn, &vn]));
                        rhs.extend(cat(&[&gf, &(vf * scale)]));
                    }
                    Ok((lhs, rhs))
                },
            )
        }
        "a_path" => {
            let xs = base_fiber(1, s);
            ctx.sweep(
                &xs,
                point,
                |(x, fs)| {
                    let geo = alg.geodesic(conn, x, &fs[0], ode)?;
                    if let Some(err) = geo.stopped.clone() {
                        return Err(err);
                    }
                    Ok((vec![alg.a_path_defect(&geo)?], vec![0.0]))
                },
            )
        }
        "transport_composition" => {
            let xs = base_fiber(2, s);
            ctx.sweep(
                &xs,
                point,
                |(x, fs)| {
                    let (a, u0) = (&fs[0], &fs[1]);
                    let section = ConstantSection { value: a.clone(), base_dim: m };
                    let base = solve_ivp(|_, y| Ok(alg.anchor_at(y.as_slice())? * a), 0.0, 1.0, x, ode)?;
                    let step = |from: f64, to: f64, u: &DVector<f64>| alg.transport(&section, &base, from, to, u, ode);
                    let direct = step(0.1, 0.9, u0)?;
                    let composed = step(0.5, 0.9, &step(0.1, 0.5, u0)?)?;
                    Ok((cat(&[&direct]), cat(&[&composed])))
                },
            )
        }
        "anchored" => {
            let xs = base_fiber(2, s);
            ctx.sweep(
                &xs,
                point,
                |(x, fs)| {
                    let (a, b) = (&fs[0], &fs[1]);
                    let tau = form.target(x, a)?;
                    let lhs = alg.anchor_at(tau.as_slice())? * form.solve_one_form(x, a, b)?;
                    let rhs = form.target_differential(x, a, b, fd)?;
                    Ok((cat(&[&lhs]), cat(&[&rhs])))
                },
            )
        }
        "boundary" => {
            let xs = base_fiber(1, s);
            ctx.sweep(
                &xs,
                point,
                |(x, fs)| {
                    let a = &fs[0];
                    let (exp, _) = alg.exp_and_target(conn, x, a, ode)?;
                    Ok((cat(&[&form.solve_one_form(x, a, a)?]), cat(&[&exp])))
                },
            )
        }
        "mc_defect" => {
            let xs = base_fiber(1, s);
            ctx.sweep(
                &xs,
                point,
                |(x, fs)| {
                    let mut lhs = Vec::new();
                    for (i, j) in pairs(r) {
                        lhs.extend(form.mc_defect(&zero_aux, x, &fs[0], &e(i), &e(j), fd)?.iter());
                    }
                    let z = zeros_like(&lhs);
                    Ok((lhs, z))
                },
            )
        }
        "derivative_identity" | "integral_identity" => {
            let xs = base_fiber(3, s);
            let derivative = ctx.name == "derivative_identity";
            ctx.sweep(
                &xs,
                point,
                |(x, fs)| {
                    let (a, b, c) = (&fs[0], &fs[1], &fs[2]);
                    let p = if derivative {
                        form.verify_derivative_identity(&zero_aux, x, a, b, c, fd)?
                    } else {
                        form.verify_integral_identity(&zero_aux, x, a, b, c, fd)?
                    };
                    Ok((cat(&[&p.lhs]), cat(&[&p.rhs])))
                },
            )
        }
        "connection_independence" => {
            let mut aux = || {
                let g: Vec<f64> = (0..r * m * r).map(|_| s.uniform(-1.0, 1.0)).collect();
                AuxConnection::constant(r, m, &g).expect("r * m * r entries")
            };
            let (aux1, aux2) = (aux(), aux());
            let xs = base_fiber(3, s);
            ctx.sweep(
                &xs,
                point,
                |(x, fs)| {
                    let (a, b, c) = (&fs[0], &fs[1], &fs[2]);
                    for dir in [b, c] {
                        let deviation = form.anchoredness_defect(x, a, dir, fd)?;
                        if deviation > ANCHORED_TOLERANCE {
                            return Err(Error::NotAnchored { deviation, tolerance: ANCHORED_TOLERANCE });
                        }
                    }
                    let d1 = form.mc_defect(&aux1, x, a, b, c, fd)?;
                    let d2 = form.mc_defect(&aux2, x, a, b, c, fd)?;
                    Ok((cat(&[&d1]), cat(&[&d2])))
                },
            )
        }
        "equivalence" => {
            let xs: Vec<_> = base_fiber(1, s).into_iter().map(|(x, mut fs)| (x, fs.remove(0))).collect();
            let points: Vec<_> = xs.iter().map(|(x, _)| x.clone()).collect();
            vec![ctx.verdict(alg.max_frame_jacobiator(&points), form.max_basis_mc_defect(&zero_aux, &xs, fd), ALGEBROID_EQUIVALENCE)]
        }
        other => unreachable!("suite {other} validated against the registry"),
    }
}
