//! Shared numerical kernels: quadrature on `[0, 1]`, fixed-step RK4,
//! small dense matrix exponential and inverse, central differences.
//!
//! Everything here is a pure function of its inputs.

mod diff;
mod linalg;
mod ode;
mod quadrature;

pub use diff::{
    central_diff, central_diff_scalar, gradient, FdConfig, DEFAULT_FD_STEP, DEFAULT_RICHARDSON_STEP,
};
pub use linalg::{expm, invert};
pub use ode::{
    integrate_partial, solve_ivp, state_at, OdeConfig, OdeMethod, PartialSolution, Trajectory,
    DEFAULT_ODE_STEPS,
};
pub use quadrature::{QuadratureRule, RuleKind, DEFAULT_GAUSS_ORDER};

/// Discretization settings shared by the solution-form evaluators.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Discretization {
    pub rule: QuadratureRule,
    pub ode: OdeConfig,
    pub fd: FdConfig,
}

