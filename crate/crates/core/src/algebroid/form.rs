use nalgebra::{DMatrix, DVector};

use super::geodesic::not_in_a0;
use super::transport::steps_for;
use super::{AConnection, AuxConnection, PreLieAlgebroid};
use crate::error::{check_len, Error, Result};
use crate::numerics::{central_diff, integrate_partial, FdConfig, OdeConfig, QuadratureRule};
use crate::{par, IdentityPair};

/// Evaluator for the solution
/// `φ_a(b) = ∫₀¹ ψ^{1,t}_{ξ₀} d/dε|₀ ξ_ε^t(γ_a(t)) dt`, with each `ξ_ε^t`
/// the spatially constant extension of `g_{a+εb}(t)`.
#[derive(Debug, Clone)]
pub struct AlgebroidMCOneForm<'a> {
    algebroid: &'a PreLieAlgebroid,
    conn: &'a AConnection,
    rule: QuadratureRule,
    ode: OdeConfig,
    fd: FdConfig,
    order: Vec<usize>,
}

/// One point of a connection-independence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionSample {
    pub x: DVector<f64>,
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
}

/// Geodesic (and optionally transport) states at the quadrature nodes, in
/// rule order, plus the state at `t = 1`.
struct NodeStates {
    gamma: Vec<DVector<f64>>,
    g: Vec<DVector<f64>>,
    psi: Vec<DMatrix<f64>>,
    psi_one: DMatrix<f64>,
}

/// Tolerance on `‖ρ(φ_a(b)) − dτ_a(b)‖` for the anchoredness precondition.
pub const ANCHORED_TOLERANCE: f64 = 1e-5;

impl<'a> AlgebroidMCOneForm<'a> {
    pub fn new(algebroid: &'a PreLieAlgebroid, conn: &'a AConnection, rule: QuadratureRule, ode: OdeConfig, fd: FdConfig) -> Self {
        let mut order: Vec<usize> = (0..rule.len()).collect();
        order.sort_by(|&p, &q| rule.nodes()[p].total_cmp(&rule.nodes()[q]));
        Self { algebroid, conn, rule, ode, fd, order }
    }

    pub fn algebroid(&self) -> &PreLieAlgebroid {
        self.algebroid
    }

    pub fn connection(&self) -> &AConnection {
        self.conn
    }

    fn dims(&self) -> (usize, usize) {
        (self.algebroid.base_dim, self.algebroid.rank)
    }

    /// Integrates the geodesic from node to node; with `transport` the
    /// fundamental matrix `Ψ(t) = ψ^{t,0}` rides along, generated by the
    /// extension with spatial slope `slope` (`None` for constant).
    fn integrate_nodes(&self, x: &DVector<f64>, a: &DVector<f64>, transport: bool, slope: Option<&DMatrix<f64>>) -> Result<NodeStates> {
        let (m, r) = self.dims();
        check_len(m, x.len())?;
        check_len(r, a.len())?;
        self.algebroid.domain.check(x.as_slice())?;
        let width = m + r + if transport { r * r } else { 0 };
        let mut y = DVector::zeros(width);
        y.rows_mut(0, m).copy_from(x);
        y.rows_mut(m, r).copy_from(a);
        if transport {
            for i in 0..r {
                y[m + r + i * r + i] = 1.0;
            }
        }
        let rhs = |_: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
            let head = y.rows(0, m + r).into_owned();
            let mut out = DVector::zeros(width);
            out.rows_mut(0, m + r).copy_from(&self.algebroid.geodesic_rhs(self.conn, &head)?);
            if transport {
                let gamma = y.rows(0, m).into_owned();
                let g = y.rows(m, r).into_owned();
                let gen = self.algebroid.transport_generator(gamma.as_slice(), &g, slope)?;
                let psi = DMatrix::from_column_slice(r, r, &y.as_slice()[m + r..]);
                out.rows_mut(m + r, r * r).copy_from_slice((gen * psi).as_slice());
            }
            Ok(out)
        };
        let n = self.rule.len();
        let mut gamma = vec![DVector::zeros(m); n];
        let mut g = vec![DVector::zeros(r); n];
        let mut psi = vec![DMatrix::zeros(0, 0); n];
        let mut tau = 0.0;
        let mut stops: Vec<(Option<usize>, f64)> = self.order.iter().map(|&k| (Some(k), self.rule.nodes()[k])).collect();
        stops.push((None, 1.0));
        for (slot, t) in stops {
            if t > tau {
                let cfg = OdeConfig { step_count: steps_for(&self.ode, t - tau), method: self.ode.method };
                let sol = integrate_partial(rhs, tau, t, &y, &cfg);
                if let Some(e) = sol.stopped {
                    return Err(not_in_a0(e, a));
                }
                y = sol.trajectory.final_state().clone();
                tau = t;
            }
            match slot {
                Some(k) => {
                    gamma[k] = y.rows(0, m).into_owned();
                    g[k] = y.rows(m, r).into_owned();
                    if transport {
                        psi[k] = DMatrix::from_column_slice(r, r, &y.as_slice()[m + r..]);
                    }
                }
                None => {
                    let psi_one = if transport { DMatrix::from_column_slice(r, r, &y.as_slice()[m + r..]) } else { DMatrix::zeros(0, 0) };
                    return Ok(NodeStates { gamma, g, psi, psi_one });
                }
            }
        }
        unreachable!("the final stop at t = 1 returns")
    }

    /// `φ_a(b) ∈ A_{τ(a)}`.
    pub fn solve_one_form(&self, x: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        self.solve_one_form_extended(x, a, b, None)
    }

    /// `φ_a(b)` computed with the affine extensions
    /// `ξ_ε^t(y) = g_{a+εb}(t) + L (y − γ_{a+εb}(t))`, `L = slope` (`r × m`).
    /// The result does not depend on `L`.
    pub fn solve_one_form_extended(
        &self,
        x: &DVector<f64>,
        a: &DVector<f64>,
        b: &DVector<f64>,
        slope: Option<&DMatrix<f64>>,
    ) -> Result<DVector<f64>> {
        let (m, r) = self.dims();
        check_len(r, b.len())?;
        if let Some(l) = slope {
            if l.shape() != (r, m) {
                return Err(Error::InvalidArgument(format!("extension slope must be {r}x{m}")));
            }
        }
        let base = self.integrate_nodes(x, a, true, slope)?;
        let n = self.rule.len();
        let stacked = central_diff(
            |eps| {
                let p = self.integrate_nodes(x, &(a + b * eps), false, None)?;
                let mut v = DVector::zeros(n * (m + r));
                for k in 0..n {
                    v.rows_mut(k * (m + r), m).copy_from(&p.gamma[k]);
                    v.rows_mut(k * (m + r) + m, r).copy_from(&p.g[k]);
                }
                Ok(v)
            },
            0.0,
            &self.fd,
        )?;
        let mut acc = DVector::zeros(r);
        for k in 0..n {
            let mut d = stacked.rows(k * (m + r) + m, r).into_owned();
            if let Some(l) = slope {
                d -= l * stacked.rows(k * (m + r), m);
            }
            let back = base.psi[k].clone().lu().solve(&d).ok_or(Error::Singular { pivot: 0.0, threshold: 0.0 })?;
            acc += back * self.rule.weights()[k];
        }
        Ok(&base.psi_one * acc)
    }

    /// `τ(a) = γ_a(1)`.
    pub fn target(&self, x: &DVector<f64>, a: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.algebroid.exp_and_target(self.conn, x, a, &self.ode)?.1)
    }

    /// `dτ_a(b)` by central differences.
    pub fn target_differential(&self, x: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>, fd: &FdConfig) -> Result<DVector<f64>> {
        central_diff(|s| self.target(x, &(a + b * s)), 0.0, fd)
    }

    /// `‖ρ(φ_a(b)) − dτ_a(b)‖_∞`.
    pub fn anchoredness_defect(&self, x: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>, fd: &FdConfig) -> Result<f64> {
        let tau = self.target(x, a)?;
        let rho = self.algebroid.anchor_at(tau.as_slice())?;
        Ok((rho * self.solve_one_form(x, a, b)? - self.target_differential(x, a, b, fd)?).amax())
    }

    /// `(MC_φ)_a(b, c) = d_{τ*∇}φ(b, c) + [φ_a(b), φ_a(c)]_∇` with constant
    /// vertical directions `b, c`.
    pub fn mc_defect(
        &self,
        aux: &AuxConnection,
        x: &DVector<f64>,
        a: &DVector<f64>,
        b: &DVector<f64>,
        c: &DVector<f64>,
        fd: &FdConfig,
    ) -> Result<DVector<f64>> {
        let tau = self.target(x, a)?;
        let pb = self.solve_one_form(x, a, b)?;
        let pc = self.solve_one_form(x, a, c)?;
        let db = central_diff(|s| self.solve_one_form(x, &(a + b * s), c), 0.0, fd)?;
        let dc = central_diff(|s| self.solve_one_form(x, &(a + c * s), b), 0.0, fd)?;
        let tb = self.target_differential(x, a, b, fd)?;
        let tc = self.target_differential(x, a, c, fd)?;
        let p = tau.as_slice();
        let cov_b = db + aux.apply(p, &tb, &pc);
        let cov_c = dc + aux.apply(p, &tc, &pb);
        Ok(cov_b - cov_c + self.algebroid.torsion_bracket(aux, p, &pb, &pc)?)
    }

    /// Largest `‖mc_defect(aux1) − mc_defect(aux2)‖_∞` over the samples,
    /// after checking that the form is anchored at each of them.
    pub fn verify_connection_independence(
        &self,
        aux1: &AuxConnection,
        aux2: &AuxConnection,
        samples: &[ConnectionSample],
        fd: &FdConfig,
    ) -> Result<f64> {
        let per = par::map(samples, |s| -> Result<f64> {
            for dir in [&s.b, &s.c] {
                let deviation = self.anchoredness_defect(&s.x, &s.a, dir, fd)?;
                if deviation > ANCHORED_TOLERANCE {
                    return Err(Error::NotAnchored { deviation, tolerance: ANCHORED_TOLERANCE });
                }
            }
            let d1 = self.mc_defect(aux1, &s.x, &s.a, &s.b, &s.c, fd)?;
            let d2 = self.mc_defect(aux2, &s.x, &s.a, &s.b, &s.c, fd)?;
            Ok((d1 - d2).amax())
        });
        per.into_iter().try_fold(0.0_f64, |acc, v| Ok(acc.max(v?)))
    }

    /// `ψ^{t,0}` along `γ_a`, with exactly `ode.step_count` steps for any `t`.
    fn transport_from_origin(&self, x: &DVector<f64>, a: &DVector<f64>, t: f64) -> Result<DMatrix<f64>> {
        let (m, r) = (self.algebroid.base_dim, self.algebroid.rank);
        if t == 0.0 {
            return Ok(DMatrix::identity(r, r));
        }
        let mut y = DVector::zeros(m + r + r * r);
        y.rows_mut(0, m).copy_from(x);
        y.rows_mut(m, r).copy_from(a);
        for i in 0..r {
            y[m + r + i * r + i] = 1.0;
        }
        let sol = integrate_partial(
            |_, y| {
                let head = y.rows(0, m + r).into_owned();
                let gamma = y.rows(0, m).into_owned();
                let g = y.rows(m, r).into_owned();
                let gen = self.algebroid.transport_generator(gamma.as_slice(), &g, None)?;
                let psi = DMatrix::from_column_slice(r, r, &y.as_slice()[m + r..]);
                let mut out = DVector::zeros(m + r + r * r);
                out.rows_mut(0, m + r).copy_from(&self.algebroid.geodesic_rhs(self.conn, &head)?);
                out.rows_mut(m + r, r * r).copy_from_slice((gen * psi).as_slice());
                Ok(out)
            },
            0.0,
            t,
            &y,
            &self.ode,
        );
        if let Some(e) = sol.stopped {
            return Err(e);
        }
        Ok(DMatrix::from_column_slice(r, r, &sol.trajectory.final_state().as_slice()[m + r..]))
    }

    /// `Jac(a, b, c)(x)` against `-3 d/dt (ψ^{0,t} (MC_φ)_{ta}(b, c)) |_{t=0}`.
    #[allow(clippy::too_many_arguments)]
    pub fn verify_derivative_identity(
        &self,
        aux: &AuxConnection,
        x: &DVector<f64>,
        a: &DVector<f64>,
        b: &DVector<f64>,
        c: &DVector<f64>,
        fd: &FdConfig,
    ) -> Result<IdentityPair> {
        let lhs = self.algebroid.jacobiator(x.as_slice(), a, b, c)?;
        let rhs = central_diff(
            |t| {
                let mc = self.mc_defect(aux, x, &(a * t), b, c, fd)?;
                let psi = self.transport_from_origin(x, a, t)?;
                psi.lu().solve(&mc).ok_or(Error::Singular { pivot: 0.0, threshold: 0.0 })
            },
            0.0,
            fd,
        )? * -3.0;
        Ok(IdentityPair { lhs, rhs })
    }

    /// `(MC_φ)_a(b, c)` against
    /// `-∫₀¹ ψ^{1,t} Jac((1/t) exp(ta), φ_{ta}(tb), φ_{ta}(tc)) dt`, the
    /// Jacobiator taken at `τ(ta)`.
    #[allow(clippy::too_many_arguments)]
    pub fn verify_integral_identity(
        &self,
        aux: &AuxConnection,
        x: &DVector<f64>,
        a: &DVector<f64>,
        b: &DVector<f64>,
        c: &DVector<f64>,
        fd: &FdConfig,
    ) -> Result<IdentityPair> {
        let lhs = self.mc_defect(aux, x, a, b, c, fd)?;
        let nodes = self.integrate_nodes(x, a, true, None)?;
        let mut acc = DVector::zeros(self.algebroid.rank);
        for k in 0..self.rule.len() {
            let t = self.rule.nodes()[k];
            let (dir, at) = if t == 0.0 {
                (a.clone(), x.clone())
            } else {
                let (e, p) = self.algebroid.exp_and_target(self.conn, x, &(a * t), &self.ode)?;
                (e / t, p)
            };
            let pb = self.solve_one_form(x, &(a * t), &(b * t))?;
            let pc = self.solve_one_form(x, &(a * t), &(c * t))?;
            let jac = self.algebroid.jacobiator(at.as_slice(), &dir, &pb, &pc)?;
            let back = nodes.psi[k].clone().lu().solve(&jac).ok_or(Error::Singular { pivot: 0.0, threshold: 0.0 })?;
            acc += back * self.rule.weights()[k];
        }
        let rhs = -(&nodes.psi_one * acc);
        Ok(IdentityPair { lhs, rhs })
    }

    /// Largest `‖(MC_φ)_a(e_i, e_j)‖_∞` over `(x, a)` samples and frame pairs.
    pub fn max_basis_mc_defect(&self, aux: &AuxConnection, samples: &[(DVector<f64>, DVector<f64>)], fd: &FdConfig) -> Result<f64> {
        let r = self.algebroid.rank;
        let e = |i: usize| {
            let mut v = DVector::zeros(r);
            v[i] = 1.0;
            v
        };
        let per = par::map(samples, |(x, a)| -> Result<f64> {
            let mut worst: f64 = 0.0;
            for i in 0..r {
                for j in (i + 1)..r {
                    worst = worst.max(self.mc_defect(aux, x, a, &e(i), &e(j), fd)?.amax());
                }
            }
            Ok(worst)
        });
        per.into_iter().try_fold(0.0_f64, |acc, v| Ok(acc.max(v?)))
    }
}
