use nalgebra::DVector;

use crate::error::{Error, Result};

/// Central finite-difference settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub step: f64,
    pub richardson: bool,
}

pub const DEFAULT_FD_STEP: f64 = 1e-4;
pub const DEFAULT_RICHARDSON_STEP: f64 = 1e-3;

impl Default for FdConfig {
    fn default() -> Self {
        Self { step: DEFAULT_FD_STEP, richardson: false }
    }
}

impl FdConfig {
    pub fn new(step: f64, richardson: bool) -> Result<Self> {
        if !(step > 0.0 && step < 1.0) {
            return Err(Error::InvalidArgument(format!("finite-difference step must lie in (0, 1), got {step}")));
        }
        Ok(Self { step, richardson })
    }

    pub fn richardson() -> Self {
        Self { step: DEFAULT_RICHARDSON_STEP, richardson: true }
    }
}

/// Derivative of `f` at `at`: the second-order central quotient, or with
/// `richardson` the fourth-order extrapolant `(4 D(h/2) − D(h)) / 3`.
pub fn central_diff<F>(mut f: F, at: f64, cfg: &FdConfig) -> Result<DVector<f64>>
where
    F: FnMut(f64) -> Result<DVector<f64>>,
{
    let h = cfg.step;
    let coarse = (f(at + h)? - f(at - h)?) / (2.0 * h);
    if !cfg.richardson {
        return Ok(coarse);
    }
    let fine = (f(at + 0.5 * h)? - f(at - 0.5 * h)?) / h;
    Ok((fine * 4.0 - coarse) / 3.0)
}

pub fn central_diff_scalar<F>(mut f: F, at: f64, cfg: &FdConfig) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    Ok(central_diff(|s| Ok(DVector::from_element(1, f(s)?)), at, cfg)?[0])
}

/// Gradient of a scalar function of a point by coordinate-wise central differences.
pub fn gradient<F>(mut f: F, x: &DVector<f64>, cfg: &FdConfig) -> Result<DVector<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<f64>,
{
    let mut g = DVector::zeros(x.len());
    for i in 0..x.len() {
        let mut y = x.clone();
        g[i] = central_diff_scalar(
            |s| {
                y[i] = x[i] + s;
                f(&y)
            },
            0.0,
            cfg,
        )?;
    }
    Ok(g)
}
