//! Pre-Lie algebroids on a trivialized bundle `A = Ω × ℝʳ` over an open box
//! `Ω ⊂ ℝᵐ`: anchor, frame structure functions, connections, geodesics,
//! infinitesimal-flow transport and the explicit Maurer–Cartan solution.
//!
//! Index layout of flat coefficient arrays:
//! anchor `ρ^l_i` at `l * r + i`, structure `c^k_{ij}` at `(k * r + i) * r + j`,
//! A-connection `Γ^k_{ij}` at `(k * r + i) * r + j`, auxiliary connection
//! `Γ̃^k_{lj}` at `(k * m + l) * r + j`.

mod bridges;
mod form;
mod geodesic;
mod transport;

pub use bridges::{cotangent_algebroid, from_lie_algebra, verify_poisson_algebroid_bridge, BridgeSample};
pub use form::{AlgebroidMCOneForm, ConnectionSample, ANCHORED_TOLERANCE};
pub use geodesic::GeodesicResult;
pub use transport::{ConstantSection, FnSection, TimeDependentSection};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::field::{Coefficient, DomainBox, TensorField};
use crate::numerics::{gradient, FdConfig};
use crate::par;

fn pair_index(r: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    i * r - i * (i + 1) / 2 + (j - i - 1)
}

/// Anchored bundle with an antisymmetric frame bracket
/// `[e_i, e_j] = Σ_k c^k_{ij}(x) e_k`, extended to sections by Leibniz.
/// Neither the Jacobi identity nor anchor compatibility is assumed.
#[derive(Debug, Clone)]
pub struct PreLieAlgebroid {
    base_dim: usize,
    rank: usize,
    domain: DomainBox,
    anchor: TensorField,
    structure: Vec<Coefficient>,
    fd: FdConfig,
}

impl PreLieAlgebroid {
    /// `anchor` has shape `[m, r]`; `structure_upper[k * P + p]` holds
    /// `c^k_{ij}` for the `p`-th pair `i < j` in row order, `P = r(r-1)/2`.
    pub fn new(domain: DomainBox, rank: usize, anchor: TensorField, structure_upper: Vec<Coefficient>) -> Result<Self> {
        let m = domain.dim();
        if rank == 0 {
            return Err(Error::InvalidArgument("algebroid rank must be positive".into()));
        }
        if anchor.shape() != [m, rank] {
            return Err(Error::InvalidArgument(format!("anchor shape {:?}, expected [{m}, {rank}]", anchor.shape())));
        }
        check_len(rank * rank * (rank - 1) / 2, structure_upper.len())?;
        Ok(Self { base_dim: m, rank, domain, anchor, structure: structure_upper, fd: FdConfig::default() })
    }

    /// Builds from frame brackets `((i, j), [c^1_{ij}, …, c^r_{ij}])`, `i ≠ j`.
    pub fn from_brackets(
        domain: DomainBox,
        rank: usize,
        anchor: TensorField,
        brackets: Vec<((usize, usize), Vec<Coefficient>)>,
    ) -> Result<Self> {
        let m = domain.dim();
        let np = rank * rank.saturating_sub(1) / 2;
        let mut upper = vec![Coefficient::zero(m); rank * np];
        for ((i, j), cs) in brackets {
            if i == j || i >= rank || j >= rank {
                return Err(Error::InvalidArgument(format!("bad frame pair ({i}, {j})")));
            }
            check_len(rank, cs.len())?;
            let (lo, hi, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
            let p = pair_index(rank, lo, hi);
            for (k, c) in cs.into_iter().enumerate() {
                upper[k * np + p] = if sign > 0.0 {
                    c
                } else {
                    match c.as_polynomial() {
                        Some(poly) => poly.scale(-1.0).into(),
                        None => Coefficient::func(move |x| -c.eval(x)),
                    }
                };
            }
        }
        Self::new(domain, rank, anchor, upper)
    }

    /// Step for derivatives of non-polynomial coefficients.
    pub fn with_coefficient_fd(mut self, fd: FdConfig) -> Self {
        self.fd = fd;
        self
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn anchor_field(&self) -> &TensorField {
        &self.anchor
    }

    /// `ρ(x)` as an `m × r` matrix.
    pub fn anchor_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.domain.check(x)?;
        Ok(DMatrix::from_row_slice(self.base_dim, self.rank, &self.anchor.eval(x)))
    }

    fn structure_from(&self, value: impl Fn(&Coefficient) -> f64) -> Vec<f64> {
        let r = self.rank;
        let np = r * (r - 1) / 2;
        let mut c = vec![0.0; r * r * r];
        for k in 0..r {
            for i in 0..r {
                for j in (i + 1)..r {
                    let coef = &self.structure[k * np + pair_index(r, i, j)];
                    if coef.is_zero() {
                        continue;
                    }
                    let v = value(coef);
                    c[(k * r + i) * r + j] = v;
                    c[(k * r + j) * r + i] = -v;
                }
            }
        }
        c
    }

    /// All `c^k_{ij}(x)`, exactly antisymmetric.
    pub fn structure_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.domain.check(x)?;
        Ok(self.structure_from(|c| c.eval(x)))
    }

    /// `∂_l c^k_{ij}(x)` for each `l`.
    pub fn structure_gradient_at(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.domain.check(x)?;
        let r = self.rank;
        let np = r * (r - 1) / 2;
        let grads: Vec<Vec<f64>> = self.structure.iter().map(|c| if c.is_zero() { vec![0.0; self.base_dim] } else { c.gradient(x, &self.fd) }).collect();
        Ok((0..self.base_dim)
            .map(|l| {
                let mut out = vec![0.0; r * r * r];
                for k in 0..r {
                    for i in 0..r {
                        for j in (i + 1)..r {
                            let v = grads[k * np + pair_index(r, i, j)][l];
                            out[(k * r + i) * r + j] = v;
                            out[(k * r + j) * r + i] = -v;
                        }
                    }
                }
                out
            })
            .collect())
    }

    /// `Σ c^k_{ij} u^i v^j`, summed over `i < j` so antisymmetry is exact.
    pub fn contract(&self, c: &[f64], u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        contract_pairs(self.rank, c, u, v)
    }

    /// `[α, β](x)` for sections given in the frame; spatial derivatives by
    /// central differences.
    pub fn section_bracket<A, B>(&self, alpha: A, beta: B, x: &[f64], fd: &FdConfig) -> Result<DVector<f64>>
    where
        A: Fn(&DVector<f64>) -> Result<DVector<f64>>,
        B: Fn(&DVector<f64>) -> Result<DVector<f64>>,
    {
        let r = self.rank;
        let xv = DVector::from_column_slice(x);
        let a = alpha(&xv)?;
        let b = beta(&xv)?;
        check_len(r, a.len())?;
        check_len(r, b.len())?;
        let rho = self.anchor_at(x)?;
        let c = self.structure_at(x)?;
        let ra = &rho * &a;
        let rb = &rho * &b;
        let mut out = self.contract(&c, &a, &b);
        for k in 0..r {
            let gb = gradient(|y| Ok(beta(y)?[k]), &xv, fd)?;
            let ga = gradient(|y| Ok(alpha(y)?[k]), &xv, fd)?;
            out[k] += ra.dot(&gb) - rb.dot(&ga);
        }
        Ok(out)
    }

    /// `Jac(e_i, e_j, e_k)(x)` from the structure functions and their exact
    /// (or coefficient-level) derivatives.
    pub fn jacobiator_frame(&self, x: &[f64], i: usize, j: usize, k: usize) -> Result<DVector<f64>> {
        let r = self.rank;
        if i >= r || j >= r || k >= r {
            return Err(Error::InvalidArgument(format!("frame index out of range ({i}, {j}, {k})")));
        }
        let c = self.structure_at(x)?;
        let dc = self.structure_gradient_at(x)?;
        let rho = self.anchor_at(x)?;
        // [[e_i,e_j],e_k]^q = Σ_p c^q_{pk} c^p_{ij} − Σ_l ρ^l_k ∂_l c^q_{ij}
        let term = |i: usize, j: usize, k: usize| {
            DVector::from_iterator(
                r,
                (0..r).map(|q| {
                    let alg: f64 = (0..r).map(|p| c[(q * r + p) * r + k] * c[(p * r + i) * r + j]).sum();
                    let der: f64 = (0..self.base_dim).map(|l| rho[(l, k)] * dc[l][(q * r + i) * r + j]).sum();
                    alg - der
                }),
            )
        };
        Ok(term(i, j, k) + term(j, k, i) + term(k, i, j))
    }

    /// Frame Jacobiator contracted with `(a, b, c)` at `x`.
    pub fn jacobiator(&self, x: &[f64], a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Result<DVector<f64>> {
        let r = self.rank;
        check_len(r, a.len())?;
        check_len(r, b.len())?;
        check_len(r, c.len())?;
        let mut out = DVector::zeros(r);
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    let w = a[i] * b[j] * c[k];
                    if w != 0.0 {
                        out += self.jacobiator_frame(x, i, j, k)? * w;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest `‖Jac(e_i, e_j, e_k)(x)‖_∞` over frame triples and points.
    pub fn max_frame_jacobiator(&self, points: &[DVector<f64>]) -> Result<f64> {
        let r = self.rank;
        let per = par::map(points, |x| -> Result<f64> {
            let mut worst: f64 = 0.0;
            for i in 0..r {
                for j in (i + 1)..r {
                    for k in (j + 1)..r {
                        worst = worst.max(self.jacobiator_frame(x.as_slice(), i, j, k)?.amax());
                    }
                }
            }
            Ok(worst)
        });
        per.into_iter().try_fold(0.0_f64, |acc, v| Ok(acc.max(v?)))
    }

    /// `max ‖ρ([e_i, e_j]) − [ρ(e_i), ρ(e_j)]‖_∞` at `x`. Reported, not
    /// enforced: cotangent algebroids of non-Poisson bivectors violate it.
    pub fn anchor_compatibility_defect(&self, x: &[f64]) -> Result<f64> {
        let (m, r) = (self.base_dim, self.rank);
        let rho = self.anchor_at(x)?;
        let c = self.structure_at(x)?;
        let drho: Vec<Vec<f64>> = self.anchor.entries().iter().map(|e| if e.is_zero() { vec![0.0; m] } else { e.gradient(x, &self.fd) }).collect();
        let d = |l: usize, i: usize, n: usize| drho[l * r + i][n];
        let mut worst: f64 = 0.0;
        for i in 0..r {
            for j in (i + 1)..r {
                for l in 0..m {
                    let lhs: f64 = (0..r).map(|k| rho[(l, k)] * c[(k * r + i) * r + j]).sum();
                    let rhs: f64 = (0..m).map(|n| rho[(n, i)] * d(l, j, n) - rho[(n, j)] * d(l, i, n)).sum();
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
        Ok(worst)
    }
}

pub(crate) fn contract_pairs(r: usize, c: &[f64], u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(r);
    for i in 0..r {
        for j in (i + 1)..r {
            let w = u[i] * v[j] - u[j] * v[i];
            if w == 0.0 {
                continue;
            }
            for k in 0..r {
                out[k] += c[(k * r + i) * r + j] * w;
            }
        }
    }
    out
}

/// A-connection `∇̄_{e_i} e_j = Σ_k Γ^k_{ij} e_k`.
#[derive(Debug, Clone)]
pub struct AConnection {
    rank: usize,
    gamma: TensorField,
}

impl AConnection {
    pub fn new(rank: usize, gamma: TensorField) -> Result<Self> {
        if gamma.shape() != [rank, rank, rank] {
            return Err(Error::InvalidArgument(format!("A-connection shape {:?}, expected [{rank}; 3]", gamma.shape())));
        }
        Ok(Self { rank, gamma })
    }

    pub fn zero(rank: usize, base_dim: usize) -> Self {
        Self { rank, gamma: TensorField::zeros(vec![rank, rank, rank], base_dim) }
    }

    pub fn constant(rank: usize, base_dim: usize, values: &[f64]) -> Result<Self> {
        Self::new(rank, TensorField::constant(vec![rank, rank, rank], base_dim, values)?)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.is_zero()
    }

    /// `Σ Γ^k_{ij}(x) u^i v^j`.
    pub fn apply(&self, x: &[f64], u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let r = self.rank;
        let mut out = DVector::zeros(r);
        if self.gamma.is_zero() {
            return out;
        }
        let g = self.gamma.eval(x);
        for k in 0..r {
            let mut s = 0.0;
            for i in 0..r {
                for j in 0..r {
                    s += g[(k * r + i) * r + j] * u[i] * v[j];
                }
            }
            out[k] = s;
        }
        out
    }
}

/// Auxiliary vector bundle connection `∇_{∂_l} e_j = Σ_k Γ̃^k_{lj} e_k`.
#[derive(Debug, Clone)]
pub struct AuxConnection {
    rank: usize,
    base_dim: usize,
    gamma_tilde: TensorField,
}

impl AuxConnection {
    pub fn new(rank: usize, base_dim: usize, gamma_tilde: TensorField) -> Result<Self> {
        if gamma_tilde.shape() != [rank, base_dim, rank] {
            return Err(Error::InvalidArgument(format!(
                "auxiliary connection shape {:?}, expected [{rank}, {base_dim}, {rank}]",
                gamma_tilde.shape()
            )));
        }
        Ok(Self { rank, base_dim, gamma_tilde })
    }

    pub fn zero(rank: usize, base_dim: usize) -> Self {
        Self { rank, base_dim, gamma_tilde: TensorField::zeros(vec![rank, base_dim, rank], base_dim) }
    }

    pub fn constant(rank: usize, base_dim: usize, values: &[f64]) -> Result<Self> {
        Self::new(rank, base_dim, TensorField::constant(vec![rank, base_dim, rank], base_dim, values)?)
    }

    /// `Γ̃(v) w = Σ_{l,j} v^l Γ̃^k_{lj}(x) w^j` for a base vector `v`.
    pub fn apply(&self, x: &[f64], v: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let (r, m) = (self.rank, self.base_dim);
        let mut out = DVector::zeros(r);
        if self.gamma_tilde.is_zero() {
            return out;
        }
        let g = self.gamma_tilde.eval(x);
        for k in 0..r {
            let mut s = 0.0;
            for l in 0..m {
                for j in 0..r {
                    s += g[(k * m + l) * r + j] * v[l] * w[j];
                }
            }
            out[k] = s;
        }
        out
    }
}

impl PreLieAlgebroid {
    /// `[u, v]_∇ = [u, v] − ∇_{ρ(u)} v + ∇_{ρ(v)} u` on frame-constant
    /// vectors at `x`.
    pub fn torsion_bracket(&self, aux: &AuxConnection, x: &[f64], u: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.rank, u.len())?;
        check_len(self.rank, v.len())?;
        let c = self.structure_at(x)?;
        let rho = self.anchor_at(x)?;
        Ok(self.contract(&c, u, v) - aux.apply(x, &(&rho * u), v) + aux.apply(x, &(&rho * v), u))
    }
}
