use nalgebra::{DMatrix, DVector};

use super::PreLieAlgebroid;
use crate::error::{check_len, Error, Result};
use crate::numerics::{solve_ivp, OdeConfig, Trajectory};

/// A time-dependent section `ξ^t` in the trivializing frame.
pub trait TimeDependentSection: Sync {
    fn value(&self, t: f64, x: &[f64]) -> DVector<f64>;

    /// `∂_l ξ^k` as an `r × m` matrix.
    fn spatial_jacobian(&self, t: f64, x: &[f64]) -> DMatrix<f64>;
}

/// A section that is constant in both time and space.
#[derive(Debug, Clone)]
pub struct ConstantSection {
    pub value: DVector<f64>,
    pub base_dim: usize,
}

impl TimeDependentSection for ConstantSection {
    fn value(&self, _: f64, _: &[f64]) -> DVector<f64> {
        self.value.clone()
    }

    fn spatial_jacobian(&self, _: f64, _: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(self.value.len(), self.base_dim)
    }
}

/// A section given by closures for its value and spatial Jacobian.
pub struct FnSection<V, J> {
    pub value: V,
    pub jacobian: J,
}

impl<V, J> TimeDependentSection for FnSection<V, J>
where
    V: Fn(f64, &[f64]) -> DVector<f64> + Sync,
    J: Fn(f64, &[f64]) -> DMatrix<f64> + Sync,
{
    fn value(&self, t: f64, x: &[f64]) -> DVector<f64> {
        (self.value)(t, x)
    }

    fn spatial_jacobian(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        (self.jacobian)(t, x)
    }
}

/// Tolerance for recognising a supplied base curve as an integral curve.
const BASE_TOLERANCE: f64 = 1e-6;

impl PreLieAlgebroid {
    /// Generator `A` of the transport `du/dt = A u`:
    /// `A^k_j = −Σ_i c^k_{ij} ξ^i + Σ_l (∂_l ξ^k) ρ^l_j`.
    pub(crate) fn transport_generator(&self, x: &[f64], xi: &DVector<f64>, dxi: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
        let r = self.rank;
        let c = self.structure_at(x)?;
        let mut a = DMatrix::from_fn(r, r, |k, j| -(0..r).map(|i| c[(k * r + i) * r + j] * xi[i]).sum::<f64>());
        if let Some(d) = dxi {
            a += d * self.anchor_at(x)?;
        }
        Ok(a)
    }

    fn base_flow(&self, xi: &dyn TimeDependentSection, t0: f64, t1: f64, x0: &DVector<f64>, ode: &OdeConfig) -> Result<DVector<f64>> {
        if t0 == t1 {
            return Ok(x0.clone());
        }
        let steps = OdeConfig { step_count: steps_for(ode, t1 - t0), method: ode.method };
        let tr = solve_ivp(
            |t, y| {
                let rho = self.anchor_at(y.as_slice())?;
                Ok(rho * xi.value(t, y.as_slice()))
            },
            t0,
            t1,
            x0,
            &steps,
        )?;
        Ok(tr.final_state().clone())
    }

    /// `ψ^{t,s}_ξ u0`: transports `u0 ∈ A_{γ(s)}` to `A_{γ(t)}` along the
    /// base curve `γ`, which must be an integral curve of `ρ(ξ)`.
    pub fn transport(
        &self,
        xi: &dyn TimeDependentSection,
        base: &Trajectory,
        s: f64,
        t: f64,
        u0: &DVector<f64>,
        ode: &OdeConfig,
    ) -> Result<DVector<f64>> {
        check_len(self.rank, u0.len())?;
        if base.is_empty() {
            return Err(Error::InvalidArgument("empty base trajectory".into()));
        }
        let (m, r) = (self.base_dim, self.rank);
        let t_start = base.start_time();
        let x_start = &base.states[0];
        check_len(m, x_start.len())?;
        let mut deviation: f64 = 0.0;
        let mut prev = (t_start, x_start.clone());
        for (ti, xi_state) in base.times.iter().zip(&base.states).skip(1) {
            let next = self.base_flow(xi, prev.0, *ti, &prev.1, ode)?;
            deviation = deviation.max((&next - xi_state).amax() / (1.0 + xi_state.amax()));
            prev = (*ti, next);
        }
        if deviation > BASE_TOLERANCE {
            return Err(Error::InconsistentBase { deviation });
        }
        if s == t {
            return Ok(u0.clone());
        }
        let gs = self.base_flow(xi, t_start, s, x_start, ode)?;
        let mut y0 = DVector::zeros(m + r);
        y0.rows_mut(0, m).copy_from(&gs);
        y0.rows_mut(m, r).copy_from(u0);
        let steps = OdeConfig { step_count: steps_for(ode, t - s), method: ode.method };
        let tr = solve_ivp(
            |time, y| {
                let gamma = y.rows(0, m).into_owned();
                let u = y.rows(m, r).into_owned();
                let val = xi.value(time, gamma.as_slice());
                let jac = xi.spatial_jacobian(time, gamma.as_slice());
                let gen = self.transport_generator(gamma.as_slice(), &val, Some(&jac))?;
                let mut out = DVector::zeros(m + r);
                out.rows_mut(0, m).copy_from(&(self.anchor_at(gamma.as_slice())? * val));
                out.rows_mut(m, r).copy_from(&(gen * u));
                Ok(out)
            },
            s,
            t,
            &y0,
            &steps,
        )?;
        Ok(tr.final_state().rows(m, r).into_owned())
    }
}

pub(crate) fn steps_for(ode: &OdeConfig, span: f64) -> usize {
    ((ode.step_count as f64) * span.abs()).ceil().max(1.0) as usize
}
