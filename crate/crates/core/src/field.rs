//! Coefficient functions on an open box in ℝⁿ.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{gradient, FdConfig};
use crate::poly::Polynomial;
use nalgebra::DVector;

/// Axis-aligned open box `Π (lo_i, hi_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidArgument("box bounds must be non-empty and of equal length".into()));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidArgument("box needs lo < hi in every coordinate".into()));
        }
        Ok(Self { lo, hi })
    }

    /// `(-half_width, half_width)ⁿ`.
    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self::new(vec![-half_width; dim], vec![half_width; dim]).expect("positive half width")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a < *v && *v < *b)
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { point: x.to_vec(), time: None })
        }
    }
}

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A smooth coefficient function: either a polynomial (exact derivatives) or
/// an opaque closed-form callable (derivatives by central differences).
#[derive(Clone)]
pub enum Coefficient {
    Poly(Arc<CompiledPoly>),
    Func(Arc<ScalarFn>),
}

/// Polynomial flattened for fast evaluation.
#[derive(Debug)]
pub struct CompiledPoly {
    source: Polynomial,
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    fn new(source: Polynomial) -> Self {
        let terms = source
            .terms()
            .map(|(e, c)| {
                let f = e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k as i32)).collect();
                (c, f)
            })
            .collect();
        Self { source, terms }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (c, f) in &self.terms {
            let mut m = *c;
            for &(i, k) in f {
                m *= if k == 1 { x[i] } else { x[i].powi(k) };
            }
            s += m;
        }
        s
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.source
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Poly(p) => write!(f, "Poly({})", p.source),
            Coefficient::Func(_) => write!(f, "Func(..)"),
        }
    }
}

impl From<Polynomial> for Coefficient {
    fn from(p: Polynomial) -> Self {
        Coefficient::Poly(Arc::new(CompiledPoly::new(p)))
    }
}

impl Coefficient {
    pub fn zero(nvars: usize) -> Self {
        Polynomial::zero(nvars).into()
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Polynomial::constant(nvars, c).into()
    }

    pub fn func<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Coefficient::Func(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Coefficient::Poly(p) => p.eval(x),
            Coefficient::Func(f) => f(x),
        }
    }

    /// `Some(c)` when the coefficient is a known constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Coefficient::Poly(p) if p.source.degree() == 0 => Some(p.source.eval(&vec![0.0; p.source.nvars()])),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Poly(p) if p.source.is_zero())
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match self {
            Coefficient::Poly(p) => Some(&p.source),
            Coefficient::Func(_) => None,
        }
    }

    /// Partial derivative in coordinate `k`: exact for polynomials, a central
    /// difference with step `fd.step` otherwise.
    pub fn partial(&self, k: usize, fd: FdConfig) -> Coefficient {
        match self {
            Coefficient::Poly(p) => p.source.partial(k).into(),
            Coefficient::Func(f) => {
                let f = f.clone();
                Coefficient::func(move |x| {
                    let mut y = x.to_vec();
                    let h = fd.step;
                    y[k] = x[k] + h;
                    let up = f(&y);
                    y[k] = x[k] - h;
                    let dn = f(&y);
                    (up - dn) / (2.0 * h)
                })
            }
        }
    }

    pub fn gradient(&self, x: &[f64], fd: &FdConfig) -> Vec<f64> {
        match self {
            Coefficient::Poly(p) => (0..x.len()).map(|k| p.source.partial(k).eval(x)).collect(),
            Coefficient::Func(f) => {
                let xv = DVector::from_column_slice(x);
                gradient(|y| Ok(f(y.as_slice())), &xv, fd).expect("infallible").as_slice().to_vec()
            }
        }
    }
}

/// Row-major array of coefficient functions with a fixed shape.
#[derive(Debug, Clone)]
pub struct TensorField {
    shape: Vec<usize>,
    entries: Vec<Coefficient>,
    constant: Option<Vec<f64>>,
}

impl TensorField {
    pub fn new(shape: Vec<usize>, entries: Vec<Coefficient>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != entries.len() {
            return Err(Error::DimensionMismatch { expected: n, got: entries.len() });
        }
        let constant = entries.iter().map(|c| c.as_constant()).collect::<Option<Vec<f64>>>();
        Ok(Self { shape, entries, constant })
    }

    pub fn zeros(shape: Vec<usize>, nvars: usize) -> Self {
        let n = shape.iter().product();
        Self::new(shape, vec![Coefficient::zero(nvars); n]).expect("shape matches")
    }

    pub fn constant(shape: Vec<usize>, nvars: usize, values: &[f64]) -> Result<Self> {
        Self::new(shape, values.iter().map(|&v| Coefficient::constant(nvars, v)).collect())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn entries(&self) -> &[Coefficient] {
        &self.entries
    }

    pub fn entry(&self, flat: usize) -> &Coefficient {
        &self.entries[flat]
    }

    pub fn is_constant(&self) -> bool {
        self.constant.is_some()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|c| c.is_zero())
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        if let Some(c) = &self.constant {
            return c.clone();
        }
        self.entries.iter().map(|c| if c.is_zero() { 0.0 } else { c.eval(x) }).collect()
    }
}
