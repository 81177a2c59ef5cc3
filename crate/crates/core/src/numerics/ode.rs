use nalgebra::DVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeMethod {
    Rk4,
}

/// Fixed-step integrator settings. `step_count` steps are taken over every
/// integration interval, whatever its length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OdeConfig {
    pub step_count: usize,
    pub method: OdeMethod,
}

pub const DEFAULT_ODE_STEPS: usize = 200;

impl Default for OdeConfig {
    fn default() -> Self {
        Self { step_count: DEFAULT_ODE_STEPS, method: OdeMethod::Rk4 }
    }
}

impl OdeConfig {
    pub fn new(step_count: usize) -> Result<Self> {
        if step_count == 0 {
            return Err(Error::InvalidArgument("ODE step count must be at least 1".into()));
        }
        Ok(Self { step_count, method: OdeMethod::Rk4 })
    }
}

/// Sampled solution of an initial value problem on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Integration that stopped early keeps everything computed so far.
#[derive(Debug, Clone)]
pub struct PartialSolution {
    pub trajectory: Trajectory,
    pub stopped: Option<Error>,
}

fn rk4_step<F>(field: &F, t: f64, y: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: Fn(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let k1 = field(t, y)?;
    let k2 = field(t + 0.5 * h, &(y + &k1 * (0.5 * h)))?;
    let k3 = field(t + 0.5 * h, &(y + &k2 * (0.5 * h)))?;
    let k4 = field(t + h, &(y + &k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Integrates as far as possible, stopping at the first failed field
/// evaluation or non-finite state.
pub fn integrate_partial<F>(field: F, t0: f64, t1: f64, y0: &DVector<f64>, cfg: &OdeConfig) -> PartialSolution
where
    F: Fn(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let n = cfg.step_count.max(1);
    let h = (t1 - t0) / n as f64;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(t0);
    states.push(y0.clone());
    let mut stopped = None;
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let y = states.last().expect("seeded");
        match rk4_step(&field, t, y, h) {
            Ok(next) if next.iter().all(|v| v.is_finite()) => {
                times.push(if i + 1 == n { t1 } else { t0 + (i + 1) as f64 * h });
                states.push(next);
            }
            Ok(_) => {
                stopped = Some(Error::Divergence { last_time: t });
                break;
            }
            Err(Error::OutOfDomain { point, .. }) => {
                stopped = Some(Error::OutOfDomain { point, time: Some(t) });
                break;
            }
            Err(e) => {
                stopped = Some(e);
                break;
            }
        }
    }
    PartialSolution { trajectory: Trajectory { times, states }, stopped }
}

/// Classical RK4 with `cfg.step_count` uniform steps from `t0` to `t1`
/// (`t1 < t0` integrates backwards).
pub fn solve_ivp<F>(field: F, t0: f64, t1: f64, y0: &DVector<f64>, cfg: &OdeConfig) -> Result<Trajectory>
where
    F: Fn(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let sol = integrate_partial(field, t0, t1, y0, cfg);
    match sol.stopped {
        None => Ok(sol.trajectory),
        Some(e) => Err(e),
    }
}

/// Dense output: the state at `t`, obtained by re-integrating from `t0`.
pub fn state_at<F>(field: F, t0: f64, y0: &DVector<f64>, t: f64, cfg: &OdeConfig) -> Result<DVector<f64>>
where
    F: Fn(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    if t == t0 {
        return Ok(y0.clone());
    }
    Ok(solve_ivp(field, t0, t, y0, cfg)?.final_state().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    #[test]
    fn zero_field_is_constant() {
        let y0 = DVector::from_vec(vec![1.0, -2.0]);
        let tr = solve_ivp(|_, y| Ok(y * 0.0), 0.0, 1.0, &y0, &OdeConfig::new(10).unwrap()).unwrap();
        assert_eq!(tr.len(), 11);
        assert!(tr.states.iter().all(|s| s == &y0));
        assert_eq!(tr.start_time(), 0.0);
        assert_eq!(tr.end_time(), 1.0);
    }

    #[test]
    fn exponential_growth() {
        let tr = solve_ivp(|_, y| Ok(y.clone()), 0.0, 1.0, &one(1.0), &OdeConfig::new(100).unwrap()).unwrap();
        assert!((tr.final_state()[0] - std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn riccati_decay() {
        // y' = -y^2, y(0) = 1  =>  y(t) = 1 / (1 + t)
        let y = state_at(|_, y| Ok(y.map(|v| -v * v)), 0.0, &one(1.0), 1.0, &OdeConfig::default()).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn backwards_integration() {
        let y = state_at(|_, y| Ok(y.clone()), 1.0, &one(std::f64::consts::E), 0.0, &OdeConfig::default()).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn divergence_reports_last_time() {
        // y' = y^2 from 1 blows up at t = 1
        let err = solve_ivp(|_, y| Ok(y.map(|v| v * v)), 0.0, 2.0, &one(1.0), &OdeConfig::new(40).unwrap())
            .unwrap_err();
        match err {
            Error::Divergence { last_time } => assert!(last_time > 0.9 && last_time < 2.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn domain_exit_carries_time() {
        let field = |_: f64, y: &DVector<f64>| {
            if y[0] > 1.5 {
                Err(Error::OutOfDomain { point: y.as_slice().to_vec(), time: None })
            } else {
                Ok(one(1.0))
            }
        };
        let sol = integrate_partial(field, 0.0, 1.0, &one(1.0), &OdeConfig::new(10).unwrap());
        match sol.stopped {
            Some(Error::OutOfDomain { time: Some(t), .. }) => assert!((t - 0.5).abs() < 0.11),
            other => panic!("unexpected {other:?}"),
        }
        assert!(sol.trajectory.len() > 1);
    }

    #[test]
    fn rejects_zero_steps() {
        assert!(OdeConfig::new(0).is_err());
    }
}
