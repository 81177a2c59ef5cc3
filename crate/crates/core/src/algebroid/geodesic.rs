use nalgebra::DVector;

use super::{AConnection, PreLieAlgebroid};
use crate::error::{check_len, Error, Result};
use crate::numerics::{integrate_partial, OdeConfig, Trajectory};

/// Geodesic `t ↦ (γ_a(t), g_a(t))` on `[0, 1]`, possibly cut short at the
/// domain boundary.
#[derive(Debug, Clone)]
pub struct GeodesicResult {
    pub base: Trajectory,
    pub fiber: Trajectory,
    pub reached_time_one: bool,
    pub stopped: Option<Error>,
}

impl PreLieAlgebroid {
    /// Right-hand side of `γ̇ = ρ(γ) g`, `ġ^k = −Γ^k_{ij}(γ) g^i g^j` on the
    /// stacked state `(γ, g)`.
    pub(crate) fn geodesic_rhs(&self, conn: &AConnection, y: &DVector<f64>) -> Result<DVector<f64>> {
        let (m, r) = (self.base_dim, self.rank);
        let gamma = y.rows(0, m);
        let g = y.rows(m, r).into_owned();
        let rho = self.anchor_at(gamma.as_slice())?;
        let mut out = DVector::zeros(m + r);
        out.rows_mut(0, m).copy_from(&(&rho * &g));
        out.rows_mut(m, r).copy_from(&(-conn.apply(gamma.as_slice(), &g, &g)));
        Ok(out)
    }

    fn stack(&self, x: &DVector<f64>, a: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.base_dim, x.len())?;
        check_len(self.rank, a.len())?;
        self.domain.check(x.as_slice())?;
        let mut y0 = DVector::zeros(self.base_dim + self.rank);
        y0.rows_mut(0, self.base_dim).copy_from(x);
        y0.rows_mut(self.base_dim, self.rank).copy_from(a);
        Ok(y0)
    }

    /// Integrates the geodesic from `(x, a)` over `[0, 1]`.
    pub fn geodesic(&self, conn: &AConnection, x: &DVector<f64>, a: &DVector<f64>, ode: &OdeConfig) -> Result<GeodesicResult> {
        let y0 = self.stack(x, a)?;
        let sol = integrate_partial(|_, y| self.geodesic_rhs(conn, y), 0.0, 1.0, &y0, ode);
        let m = self.base_dim;
        let split = |lo: usize, len: usize| Trajectory {
            times: sol.trajectory.times.clone(),
            states: sol.trajectory.states.iter().map(|s| s.rows(lo, len).into_owned()).collect(),
        };
        Ok(GeodesicResult {
            base: split(0, m),
            fiber: split(m, self.rank),
            reached_time_one: sol.stopped.is_none(),
            stopped: sol.stopped,
        })
    }

    /// `(γ_a(t), g_a(t))` for any real `t` (negative allowed), using exactly
    /// `ode.step_count` steps regardless of `|t|`.
    pub fn geodesic_state(
        &self,
        conn: &AConnection,
        x: &DVector<f64>,
        a: &DVector<f64>,
        t: f64,
        ode: &OdeConfig,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let y0 = self.stack(x, a)?;
        let y = if t == 0.0 {
            y0
        } else {
            let sol = integrate_partial(|_, y| self.geodesic_rhs(conn, y), 0.0, t, &y0, ode);
            if let Some(e) = sol.stopped {
                return Err(e);
            }
            sol.trajectory.final_state().clone()
        };
        Ok((y.rows(0, self.base_dim).into_owned(), y.rows(self.base_dim, self.rank).into_owned()))
    }

    /// `(exp(a), τ(a)) = (g_a(1), γ_a(1))`; errors with [`Error::NotInA0`]
    /// when the geodesic leaves the box first.
    pub fn exp_and_target(
        &self,
        conn: &AConnection,
        x: &DVector<f64>,
        a: &DVector<f64>,
        ode: &OdeConfig,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        self.geodesic_state(conn, x, a, 1.0, ode)
            .map(|(gamma, g)| (g, gamma))
            .map_err(|e| not_in_a0(e, a))
    }

    /// `max_t ‖γ̇(t) − ρ(γ(t)) g(t)‖_∞` with `γ̇` from a fourth-order
    /// five-point stencil on the recorded trajectory.
    pub fn a_path_defect(&self, geo: &GeodesicResult) -> Result<f64> {
        let n = geo.base.len();
        if n < 5 {
            return Err(Error::InvalidArgument("need at least 5 trajectory samples".into()));
        }
        let mut worst: f64 = 0.0;
        for i in 2..n - 2 {
            let h = geo.base.times[i + 1] - geo.base.times[i];
            let s = &geo.base.states;
            let vel = (&s[i - 2] - &s[i - 1] * 8.0 + &s[i + 1] * 8.0 - &s[i + 2]) / (12.0 * h);
            let rho = self.anchor_at(s[i].as_slice())?;
            worst = worst.max((vel - rho * &geo.fiber.states[i]).amax());
        }
        Ok(worst)
    }
}

pub(crate) fn not_in_a0(e: Error, a: &DVector<f64>) -> Error {
    match e {
        Error::OutOfDomain { time, .. } => Error::NotInA0 { a: a.as_slice().to_vec(), reached: time.unwrap_or(0.0) },
        Error::Divergence { last_time } => Error::NotInA0 { a: a.as_slice().to_vec(), reached: last_time },
        other => other,
    }
}
