//! Pre-Lie algebras given by structure constants, the explicit solution
//! `φ_x(y) = ∫₀¹ e^{-t ad_x} y dt` of the weak Maurer–Cartan problem, its
//! Maurer–Cartan defect, and the two identities tying the defect to the
//! Jacobiator.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::numerics::{central_diff, expm, FdConfig, QuadratureRule};
use crate::{par, IdentityPair};

/// Finite-dimensional vector space with an antisymmetric bilinear bracket
/// `[e_i, e_j] = Σ_k c[k][i][j] e_k`. The Jacobi identity is not assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct PreLieAlgebra {
    dim: usize,
    c: Vec<f64>,
}

impl PreLieAlgebra {
    /// `c` is indexed `c[(k * n + i) * n + j]`. Antisymmetry in `(i, j)` is
    /// checked exactly.
    pub fn new(dim: usize, c: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("algebra dimension must be positive".into()));
        }
        check_len(dim * dim * dim, c.len())?;
        let alg = Self { dim, c };
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    if alg.structure(k, i, j) != -alg.structure(k, j, i) {
                        return Err(Error::NotAntisymmetric(format!(
                            "c[{k}][{i}][{j}] = {} but c[{k}][{j}][{i}] = {}",
                            alg.structure(k, i, j),
                            alg.structure(k, j, i)
                        )));
                    }
                }
            }
        }
        Ok(alg)
    }

    /// Builds the algebra from the brackets of basis pairs `i < j`
    /// (0-based); unlisted pairs bracket to zero.
    pub fn from_brackets(dim: usize, brackets: &[((usize, usize), Vec<f64>)]) -> Result<Self> {
        let mut c = vec![0.0; dim * dim * dim];
        for ((i, j), v) in brackets {
            let (i, j) = (*i, *j);
            if i >= dim || j >= dim || i == j {
                return Err(Error::InvalidArgument(format!("bad basis pair ({i}, {j})")));
            }
            check_len(dim, v.len())?;
            for (k, &val) in v.iter().enumerate() {
                c[(k * dim + i) * dim + j] = val;
                c[(k * dim + j) * dim + i] = -val;
            }
        }
        Self::new(dim, c)
    }

    pub fn abelian(dim: usize) -> Self {
        Self::new(dim, vec![0.0; dim * dim * dim]).expect("zero bracket is antisymmetric")
    }

    /// so(3): `c[k][i][j] = ε_{ijk}`.
    pub fn so3() -> Self {
        let mut c = vec![0.0; 27];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    c[(k * 3 + i) * 3 + j] = levi_civita(i, j, k);
                }
            }
        }
        Self::new(3, c).expect("so(3) is antisymmetric")
    }

    /// `[e1,e2] = e3, [e2,e3] = e1, [e3,e1] = e1`; Jacobiator `Jac(e1,e2,e3) = e3`.
    pub fn broken_bracket() -> Self {
        Self::from_brackets(
            3,
            &[((0, 1), vec![0.0, 0.0, 1.0]), ((1, 2), vec![1.0, 0.0, 0.0]), ((2, 0), vec![1.0, 0.0, 0.0])],
        )
        .expect("valid bracket table")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[(k * self.dim + i) * self.dim + j]
    }

    pub fn structure_constants(&self) -> &[f64] {
        &self.c
    }

    pub fn basis(&self, i: usize) -> DVector<f64> {
        let mut e = DVector::zeros(self.dim);
        e[i] = 1.0;
        e
    }

    /// `[x, y]`. Summed over pairs `i < j`, so `[y, x] = -[x, y]` holds bit
    /// for bit and `[x, x] = 0` exactly.
    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.dim, x.len())?;
        check_len(self.dim, y.len())?;
        Ok(self.bracket_unchecked(x, y))
    }

    fn bracket_unchecked(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let w = x[i] * y[j] - x[j] * y[i];
                if w == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += self.structure(k, i, j) * w;
                }
            }
        }
        out
    }

    /// `ad_x`, the matrix of `y ↦ [x, y]`.
    pub fn ad(&self, x: &DVector<f64>) -> Result<AdOperator> {
        check_len(self.dim, x.len())?;
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for k in 0..n {
            for j in 0..n {
                m[(k, j)] = (0..n).map(|i| self.structure(k, i, j) * x[i]).sum();
            }
        }
        Ok(AdOperator { matrix: m })
    }

    /// `[[x,y],z] + [[y,z],x] + [[z,x],y]`.
    pub fn jacobiator(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.dim, x.len())?;
        check_len(self.dim, y.len())?;
        check_len(self.dim, z.len())?;
        let b = |u: &DVector<f64>, v: &DVector<f64>| self.bracket_unchecked(u, v);
        Ok(b(&b(x, y), z) + b(&b(y, z), x) + b(&b(z, x), y))
    }

    /// Largest `‖Jac(e_i, e_j, e_k)‖_∞` over basis triples.
    pub fn max_basis_jacobiator(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let jac = self
                        .jacobiator(&self.basis(i), &self.basis(j), &self.basis(k))
                        .expect("basis vectors have the right length");
                    worst = worst.max(jac.amax());
                }
            }
        }
        worst
    }

    pub fn is_lie(&self, tol: f64) -> bool {
        self.max_basis_jacobiator() <= tol
    }
}

pub(crate) fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Matrix of `ad_x`; column `j` is `[x, e_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdOperator {
    pub matrix: DMatrix<f64>,
}

impl AdOperator {
    pub fn apply(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.matrix * y
    }
}

/// Evaluator for `φ ∈ Ω¹(𝔤; 𝔤)`, `φ_x(y) = ∫₀¹ e^{-t ad_x} y dt`.
#[derive(Debug, Clone)]
pub struct LieMCOneForm<'a> {
    algebra: &'a PreLieAlgebra,
    rule: QuadratureRule,
}

impl<'a> LieMCOneForm<'a> {
    pub fn new(algebra: &'a PreLieAlgebra, rule: QuadratureRule) -> Self {
        Self { algebra, rule }
    }

    pub fn algebra(&self) -> &PreLieAlgebra {
        self.algebra
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn solve_one_form(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.algebra.dim, y.len())?;
        let minus_ad = -self.algebra.ad(x)?.matrix;
        self.rule.integrate(|t| Ok(expm(&(&minus_ad * t))? * y))
    }

    /// `(MC_φ)_x(y, z) = dφ_x(y, z) + [φ_x(y), φ_x(z)]`, with `y, z` constant
    /// coordinate directions so the commutator term of `d` vanishes.
    pub fn mc_defect(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>, fd: &FdConfig) -> Result<DVector<f64>> {
        check_len(self.algebra.dim, z.len())?;
        let dy = central_diff(|s| self.solve_one_form(&(x + y * s), z), 0.0, fd)?;
        let dz = central_diff(|s| self.solve_one_form(&(x + z * s), y), 0.0, fd)?;
        let py = self.solve_one_form(x, y)?;
        let pz = self.solve_one_form(x, z)?;
        Ok((dy - dz) + self.algebra.bracket_unchecked(&py, &pz))
    }

    /// Residual of the weak equation `(MC_φ)_x(x, y) = 0`.
    pub fn verify_weak_equation(&self, x: &DVector<f64>, y: &DVector<f64>, fd: &FdConfig) -> Result<DVector<f64>> {
        self.mc_defect(x, x, y, fd)
    }

    /// `Jac(x,y,z)` against `-3 d/dt (MC_φ)_{tx}(y,z) |_{t=0}`.
    pub fn verify_derivative_identity(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
        fd: &FdConfig,
    ) -> Result<IdentityPair> {
        let lhs = self.algebra.jacobiator(x, y, z)?;
        let rhs = central_diff(|t| self.mc_defect(&(x * t), y, z, fd), 0.0, fd)? * -3.0;
        Ok(IdentityPair { lhs, rhs })
    }

    /// `(MC_φ)_x(y,z)` against `-∫₀¹ e^{(t-1) ad_x} Jac(x, φ_{tx}(ty), φ_{tx}(tz)) dt`.
    pub fn verify_integral_identity(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
        fd: &FdConfig,
    ) -> Result<IdentityPair> {
        let lhs = self.mc_defect(x, y, z, fd)?;
        let ad = self.algebra.ad(x)?.matrix;
        let rhs = self.rule.integrate(|t| {
            let tx = x * t;
            let py = self.solve_one_form(&tx, &(y * t))?;
            let pz = self.solve_one_form(&tx, &(z * t))?;
            let jac = self.algebra.jacobiator(x, &py, &pz)?;
            Ok(expm(&(&ad * (t - 1.0)))? * jac)
        })? * -1.0;
        Ok(IdentityPair { lhs, rhs })
    }

    /// Largest `‖(MC_φ)_x(e_i, e_j)‖_∞` over the sample points and basis
    /// pairs `i < j`. Points are processed in parallel.
    pub fn max_mc_defect(&self, points: &[DVector<f64>], fd: &FdConfig) -> Result<f64> {
        let n = self.algebra.dim;
        let per_point = par::map(points, |x| -> Result<f64> {
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = self.mc_defect(x, &self.algebra.basis(i), &self.algebra.basis(j), fd)?;
                    worst = worst.max(d.amax());
                }
            }
            Ok(worst)
        });
        per_point.into_iter().try_fold(0.0_f64, |acc, r| Ok(acc.max(r?)))
    }
}
