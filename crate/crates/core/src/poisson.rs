//! Bivector fields on an open box, Hamiltonian flows of linear functionals,
//! the flow-averaged solution 1-form `φ_ξ(ζ) = ∫₀¹ (Φ^{-t}_{X_ξ})^* ζ dt`,
//! its Maurer–Cartan defect, and the symplectic-realization test.
//!
//! Conventions: `{f, g} = Σ π^{ij} ∂_i f ∂_j g`, `X_ξ^j = Σ_i π^{ij} ξ_i`.
//! On `(x, ξ)`-space the candidate form is `ω = dφ̃` with
//! `ω[x_i, ξ_j] = ∂F_j/∂x_i`, `F_j(x, ξ) = φ_ξ(e_j)(x)`; the induced Poisson
//! tensor is `Π = -ω⁻¹`. At the zero section `ω = [[0, I], [-I, -π(x)]]`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::field::{Coefficient, DomainBox};
use crate::numerics::{central_diff, central_diff_scalar, invert, solve_ivp, FdConfig, OdeConfig, QuadratureRule};
use crate::poly::Polynomial;
use crate::{par, IdentityPair};

/// A linear functional on the model space.
pub type Covector = DVector<f64>;

/// Sign conventions, recorded verbatim in CLI reports.
pub const SIGN_CONVENTION: &str =
    "{f,g} = pi^{ij} d_i f d_j g; X_xi^j = pi^{ij} xi_i; omega = d(phi~) with omega[x_i,xi_j] = dF_j/dx_i; \
     Poisson tensor = -omega^{-1}; zero section omega = [[0, I], [-I, -pi(x)]]";

/// Antisymmetric bivector `π^{ij}` on an open box, stored as its upper
/// triangle.
#[derive(Debug, Clone)]
pub struct BivectorField {
    dim: usize,
    domain: DomainBox,
    upper: Vec<Coefficient>,
    fd: FdConfig,
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl BivectorField {
    /// `upper` lists `π^{ij}` for `i < j` in row order:
    /// `π^{12}, π^{13}, …, π^{1n}, π^{23}, …`.
    pub fn new(domain: DomainBox, upper: Vec<Coefficient>) -> Result<Self> {
        let dim = domain.dim();
        check_len(dim * (dim - 1) / 2, upper.len())?;
        Ok(Self { dim, domain, upper, fd: FdConfig::default() })
    }

    /// Builds from `((i, j), π^{ij})` pairs with `i < j` (0-based); unlisted
    /// entries are zero.
    pub fn from_entries(domain: DomainBox, entries: Vec<((usize, usize), Coefficient)>) -> Result<Self> {
        let n = domain.dim();
        let mut upper = vec![Coefficient::zero(n); n * (n - 1) / 2];
        for ((i, j), c) in entries {
            if i >= j || j >= n {
                return Err(Error::InvalidArgument(format!("bivector entry ({i}, {j}) must satisfy i < j < {n}")));
            }
            upper[upper_index(n, i, j)] = c;
        }
        Self::new(domain, upper)
    }

    pub fn zero(domain: DomainBox) -> Self {
        let n = domain.dim();
        Self::new(domain, vec![Coefficient::zero(n); n * (n - 1) / 2]).expect("sizes match")
    }

    /// Step used for gradients of non-polynomial coefficients.
    pub fn with_coefficient_fd(mut self, fd: FdConfig) -> Self {
        self.fd = fd;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    /// `π^{ij}` as a coefficient (`i ≠ j`); `None` on the diagonal.
    pub fn coefficient(&self, i: usize, j: usize) -> Option<(&Coefficient, f64)> {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => Some((&self.upper[upper_index(self.dim, i, j)], 1.0)),
            std::cmp::Ordering::Greater => Some((&self.upper[upper_index(self.dim, j, i)], -1.0)),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// The matrix `π(x)`; errors outside the box.
    pub fn pi(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.domain.check(x)?;
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let c = &self.upper[upper_index(n, i, j)];
                let v = if c.is_zero() { 0.0 } else { c.eval(x) };
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        Ok(m)
    }

    /// `∂_k π(x)` for each `k`.
    pub fn pi_gradient(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        self.domain.check(x)?;
        let n = self.dim;
        let mut out = vec![DMatrix::zeros(n, n); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let c = &self.upper[upper_index(n, i, j)];
                if c.is_zero() {
                    continue;
                }
                for (k, g) in c.gradient(x, &self.fd).into_iter().enumerate() {
                    out[k][(i, j)] = g;
                    out[k][(j, i)] = -g;
                }
            }
        }
        Ok(out)
    }

    /// `X_ξ(x)`, with `X_ξ^j = Σ_i π^{ij}(x) ξ_i`.
    pub fn hamiltonian_vector(&self, x: &[f64], xi: &Covector) -> Result<DVector<f64>> {
        check_len(self.dim, xi.len())?;
        Ok(self.pi(x)?.tr_mul(xi))
    }

    /// The vector field `X_ξ` as a callable.
    pub fn hamiltonian_field<'a>(&'a self, xi: &'a Covector) -> impl Fn(&DVector<f64>) -> Result<DVector<f64>> + 'a {
        move |x| self.hamiltonian_vector(x.as_slice(), xi)
    }

    /// `{ξ, ζ}(x) = ξᵀ π(x) ζ`.
    pub fn bracket_linear(&self, xi: &Covector, zeta: &Covector, x: &[f64]) -> Result<f64> {
        check_len(self.dim, xi.len())?;
        check_len(self.dim, zeta.len())?;
        Ok(xi.dot(&(self.pi(x)? * zeta)))
    }

    /// Cyclic sum `{{ξ,ζ},η} + {{ζ,η},ξ} + {{η,ξ},ζ}` at `x`, for constant
    /// covectors. Since the Jacobiator is tensorial this is also the
    /// Jacobiator of any three functions with these differentials at `x`.
    pub fn jacobiator_linear(&self, xi: &Covector, zeta: &Covector, eta: &Covector, x: &[f64]) -> Result<f64> {
        check_len(self.dim, xi.len())?;
        check_len(self.dim, zeta.len())?;
        check_len(self.dim, eta.len())?;
        let p = self.pi(x)?;
        let dp = self.pi_gradient(x)?;
        // d{a,b} = (a ᵀ ∂_k π b)_k, then {{a,b},c} = d{a,b}ᵀ π c
        let outer = |a: &Covector, b: &Covector, c: &Covector| {
            let d = DVector::from_iterator(self.dim, dp.iter().map(|m| a.dot(&(m * b))));
            d.dot(&(&p * c))
        };
        Ok(outer(xi, zeta, eta) + outer(zeta, eta, xi) + outer(eta, xi, zeta))
    }

    pub fn max_basis_jacobiator(&self, points: &[DVector<f64>]) -> Result<f64> {
        let n = self.dim;
        let per_point = par::map(points, |x| -> Result<f64> {
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        let v = self.jacobiator_linear(&basis(n, i), &basis(n, j), &basis(n, k), x.as_slice())?;
                        worst = worst.max(v.abs());
                    }
                }
            }
            Ok(worst)
        });
        per_point.into_iter().try_fold(0.0_f64, |acc, r| Ok(acc.max(r?)))
    }
}

fn basis(n: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    e[i] = 1.0;
    e
}

/// Linear bivector `π^{ij}(x) = Σ_k c^k_{ij} x_k` on the dual of a Lie
/// algebra with structure constants `c[(k * n + i) * n + j]`.
pub fn linear_bivector(domain: DomainBox, c: &[f64]) -> Result<BivectorField> {
    let n = domain.dim();
    check_len(n * n * n, c.len())?;
    let mut entries = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let coeffs: Vec<f64> = (0..n).map(|k| c[(k * n + i) * n + j]).collect();
            entries.push(((i, j), Polynomial::linear(&coeffs).into()));
        }
    }
    BivectorField::from_entries(domain, entries)
}

/// Evaluator for `φ ∈ Ω¹(V*; C^∞)`.
#[derive(Debug, Clone)]
pub struct PoissonMCOneForm<'a> {
    bivector: &'a BivectorField,
    rule: QuadratureRule,
    ode: OdeConfig,
    order: Vec<usize>,
}

/// `dφ̃` at one point of `(x, ξ)`-space.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticCandidate {
    pub base_point: DVector<f64>,
    pub fiber_point: Covector,
    pub omega: DMatrix<f64>,
}

impl SymplecticCandidate {
    /// `-ω⁻¹`.
    pub fn poisson_tensor(&self) -> Result<DMatrix<f64>> {
        Ok(-invert(&self.omega)?)
    }
}

impl<'a> PoissonMCOneForm<'a> {
    pub fn new(bivector: &'a BivectorField, rule: QuadratureRule, ode: OdeConfig) -> Self {
        let mut order: Vec<usize> = (0..rule.len()).collect();
        order.sort_by(|&a, &b| rule.nodes()[a].total_cmp(&rule.nodes()[b]));
        Self { bivector, rule, ode, order }
    }

    pub fn bivector(&self) -> &BivectorField {
        self.bivector
    }

    fn dim(&self) -> usize {
        self.bivector.dim
    }

    fn steps_for(&self, span: f64) -> OdeConfig {
        let steps = ((self.ode.step_count as f64) * span.abs()).ceil().max(1.0) as usize;
        OdeConfig { step_count: steps, method: self.ode.method }
    }

    /// Flow of `X_ξ` from `x` for signed time `time`. The number of RK4 steps
    /// is proportional to `|time|`.
    pub fn flow(&self, x: &DVector<f64>, xi: &Covector, time: f64) -> Result<DVector<f64>> {
        self.bivector.domain.check(x.as_slice())?;
        if time == 0.0 {
            return Ok(x.clone());
        }
        let field = self.bivector.hamiltonian_field(xi);
        let tr = solve_ivp(|_, y| field(y), 0.0, time, x, &self.steps_for(time))?;
        Ok(tr.final_state().clone())
    }

    /// `W(x, ξ) = ∫₀¹ Φ^{-t}_{X_ξ}(x) dt`, so that `φ_ξ(ζ)(x) = ⟨ζ, W⟩`.
    /// The backward flow is carried from node to node with a fixed step
    /// schedule.
    pub fn averaged_flow(&self, x: &DVector<f64>, xi: &Covector) -> Result<DVector<f64>> {
        check_len(self.dim(), x.len())?;
        check_len(self.dim(), xi.len())?;
        self.bivector.domain.check(x.as_slice())?;
        let field = self.bivector.hamiltonian_field(xi);
        let back = |_: f64, y: &DVector<f64>| Ok(-field(y)?);
        let nodes = self.rule.nodes();
        let weights = self.rule.weights();
        let mut y = x.clone();
        let mut tau = 0.0;
        let mut acc = DVector::zeros(self.dim());
        for &k in &self.order {
            let t = nodes[k];
            if t > tau {
                let tr = solve_ivp(back, tau, t, &y, &self.steps_for(t - tau)).map_err(|e| match e {
                    Error::OutOfDomain { point, time } => Error::OutOfDomain { point, time: time.map(|s| -s) },
                    other => other,
                })?;
                y = tr.final_state().clone();
                tau = t;
            }
            acc += &y * weights[k];
        }
        Ok(acc)
    }

    /// `φ_ξ(ζ)(x)`.
    pub fn solve_one_form(&self, x: &DVector<f64>, xi: &Covector, zeta: &Covector) -> Result<f64> {
        check_len(self.dim(), zeta.len())?;
        Ok(zeta.dot(&self.averaged_flow(x, xi)?))
    }

    /// Spatial Jacobian `J[j][k] = ∂_k W_j(x, ξ)`.
    fn spatial_jacobian(&self, x: &DVector<f64>, xi: &Covector, fd: &FdConfig) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut j = DMatrix::zeros(n, n);
        for k in 0..n {
            let col = central_diff(|s| self.averaged_flow(&(x + basis(n, k) * s), xi), 0.0, fd)?;
            j.set_column(k, &col);
        }
        Ok(j)
    }

    /// `(MC_φ)_ξ(ζ, η)(x) = dφ_ξ(ζ, η)(x) + {φ_ξ(ζ), φ_ξ(η)}(x)`.
    pub fn mc_defect(&self, x: &DVector<f64>, xi: &Covector, zeta: &Covector, eta: &Covector, fd: &FdConfig) -> Result<f64> {
        check_len(self.dim(), zeta.len())?;
        check_len(self.dim(), eta.len())?;
        let d_zeta = central_diff_scalar(|s| self.solve_one_form(x, &(xi + zeta * s), eta), 0.0, fd)?;
        let d_eta = central_diff_scalar(|s| self.solve_one_form(x, &(xi + eta * s), zeta), 0.0, fd)?;
        let jac = self.spatial_jacobian(x, xi, fd)?;
        let gz = jac.tr_mul(zeta);
        let ge = jac.tr_mul(eta);
        let br = gz.dot(&(self.bivector.pi(x.as_slice())? * ge));
        Ok(d_zeta - d_eta + br)
    }

    /// `Jac(ξ,ζ,η)(x)` against `-3 d/dt (MC_φ)_{tξ}(ζ,η)(x) |_{t=0}`.
    pub fn verify_derivative_identity(
        &self,
        x: &DVector<f64>,
        xi: &Covector,
        zeta: &Covector,
        eta: &Covector,
        fd: &FdConfig,
    ) -> Result<IdentityPair> {
        let lhs = self.bivector.jacobiator_linear(xi, zeta, eta, x.as_slice())?;
        let rhs = -3.0 * central_diff_scalar(|t| self.mc_defect(x, &(xi * t), zeta, eta, fd), 0.0, fd)?;
        Ok(scalar_pair(lhs, rhs))
    }

    /// `(MC_φ)_ξ(ζ,η)(x)` against
    /// `-∫₀¹ Jac(ξ, φ_{tξ}(tζ), φ_{tξ}(tη))(Φ^{t-1}_{X_ξ}(x)) dt`.
    pub fn verify_integral_identity(
        &self,
        x: &DVector<f64>,
        xi: &Covector,
        zeta: &Covector,
        eta: &Covector,
        fd: &FdConfig,
    ) -> Result<IdentityPair> {
        let lhs = self.mc_defect(x, xi, zeta, eta, fd)?;
        let rhs = -self.rule.integrate_scalar(|t| {
            let y = self.flow(x, xi, t - 1.0)?;
            let txi = xi * t;
            let jac = self.spatial_jacobian(&y, &txi, fd)?;
            let gz = jac.tr_mul(zeta) * t;
            let ge = jac.tr_mul(eta) * t;
            self.bivector.jacobiator_linear(xi, &gz, &ge, y.as_slice())
        })?;
        Ok(scalar_pair(lhs, rhs))
    }

    /// The matrix of `dφ̃` at `(x, ξ)` by central differences, antisymmetrized.
    pub fn symplectic_matrix(&self, x: &DVector<f64>, xi: &Covector, fd: &FdConfig) -> Result<SymplecticCandidate> {
        let n = self.dim();
        let dx = self.spatial_jacobian(x, xi, fd)?;
        let mut dxi = DMatrix::zeros(n, n);
        for i in 0..n {
            let col = central_diff(|s| self.averaged_flow(x, &(xi + basis(n, i) * s)), 0.0, fd)?;
            dxi.set_column(i, &col);
        }
        // dx[(j, i)] = ∂F_j/∂x_i, dxi[(j, i)] = ∂F_j/∂ξ_i
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                m[(i, n + j)] = dx[(j, i)];
                m[(n + j, i)] = -dx[(j, i)];
                m[(n + i, n + j)] = dxi[(j, i)] - dxi[(i, j)];
            }
        }
        let omega = (&m - m.transpose()) * 0.5;
        Ok(SymplecticCandidate { base_point: x.clone(), fiber_point: xi.clone(), omega })
    }

    /// Base block of `-ω⁻¹` minus `π(x)`; zero exactly when the projection
    /// `(x, ξ) ↦ x` is Poisson at this point.
    pub fn realization_defect(&self, x: &DVector<f64>, xi: &Covector, fd: &FdConfig) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let big = self.symplectic_matrix(x, xi, fd)?.poisson_tensor()?;
        Ok(big.view((0, 0), (n, n)).into_owned() - self.bivector.pi(x.as_slice())?)
    }

    /// Largest `‖(MC_φ)_ξ(e_i, e_j)(x)‖` over the `(x, ξ)` samples and basis
    /// pairs `i < j`.
    pub fn max_basis_mc_defect(&self, samples: &[(DVector<f64>, Covector)], fd: &FdConfig) -> Result<f64> {
        let n = self.dim();
        let per = par::map(samples, |(x, xi)| -> Result<f64> {
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    worst = worst.max(self.mc_defect(x, xi, &basis(n, i), &basis(n, j), fd)?.abs());
                }
            }
            Ok(worst)
        });
        per.into_iter().try_fold(0.0_f64, |acc, r| Ok(acc.max(r?)))
    }

    /// Largest sampled `‖ξ‖` at which `dφ̃` could be inverted.
    pub fn largest_invertible_fiber_norm(&self, samples: &[(DVector<f64>, Covector)], fd: &FdConfig) -> f64 {
        par::map(samples, |(x, xi)| match self.symplectic_matrix(x, xi, fd).and_then(|c| invert(&c.omega)) {
            Ok(_) => xi.norm(),
            Err(_) => 0.0,
        })
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn scalar_pair(lhs: f64, rhs: f64) -> IdentityPair {
    IdentityPair { lhs: DVector::from_element(1, lhs), rhs: DVector::from_element(1, rhs) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn planar() -> BivectorField {
        BivectorField::from_entries(DomainBox::cube(2, 5.0), vec![((0, 1), Coefficient::constant(2, 1.0))]).unwrap()
    }

    fn nonpoisson() -> BivectorField {
        BivectorField::from_entries(
            DomainBox::cube(3, 5.0),
            vec![((0, 1), Polynomial::var(3, 0).into()), ((0, 2), Coefficient::constant(3, -1.0))],
        )
        .unwrap()
    }

    fn form(bv: &BivectorField) -> PoissonMCOneForm<'_> {
        PoissonMCOneForm::new(bv, QuadratureRule::default(), OdeConfig::default())
    }

    #[test]
    fn pi_is_antisymmetric_and_domain_checked() {
        let bv = nonpoisson();
        let p = bv.pi(&[0.3, 1.0, -2.0]).unwrap();
        assert_eq!(p, -p.transpose());
        assert_eq!(p[(0, 1)], 0.3);
        assert!(matches!(bv.pi(&[6.0, 0.0, 0.0]), Err(Error::OutOfDomain { .. })));
        assert!(BivectorField::from_entries(DomainBox::cube(2, 1.0), vec![((1, 0), Coefficient::zero(2))]).is_err());
    }

    #[test]
    fn hamiltonian_field_examples() {
        let bv = planar();
        assert_eq!(bv.hamiltonian_vector(&[0.2, 0.4], &v(&[1.0, 0.0])).unwrap(), v(&[0.0, 1.0]));
        let z = BivectorField::zero(DomainBox::cube(3, 1.0));
        assert_eq!(z.hamiltonian_vector(&[0.1, 0.2, 0.3], &v(&[1.0, 2.0, 3.0])).unwrap(), DVector::zeros(3));
    }

    #[test]
    fn planar_solution_is_affine() {
        let bv = planar();
        let f = form(&bv);
        let got = f.solve_one_form(&v(&[0.0, 0.0]), &v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        assert!((got + 0.5).abs() < 1e-12, "{got}");
    }

    #[test]
    fn zero_fiber_returns_the_functional() {
        let bv = nonpoisson();
        let f = form(&bv);
        let x = v(&[0.4, -0.2, 1.0]);
        let zeta = v(&[1.0, 2.0, -1.0]);
        assert!((f.solve_one_form(&x, &DVector::zeros(3), &zeta).unwrap() - zeta.dot(&x)).abs() < 1e-14);
    }

    #[test]
    fn leaving_the_box_is_reported_with_time() {
        let bv = BivectorField::from_entries(DomainBox::cube(2, 1.0), vec![((0, 1), Coefficient::constant(2, 1.0))]).unwrap();
        let f = form(&bv);
        // X = (0, 3): the backward flow reaches y = -1 at t = 1/3 + 0.9/3
        let err = f.solve_one_form(&v(&[0.0, -0.1]), &v(&[3.0, 0.0]), &v(&[1.0, 0.0])).unwrap_err();
        match err {
            Error::OutOfDomain { time: Some(t), .. } => assert!(t < 0.0 && t > -1.0, "{t}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jacobiator_examples() {
        let bv = nonpoisson();
        let e = |i| basis(3, i);
        for x in [[0.0, 0.0, 0.0], [1.0, -2.0, 0.5], [-3.0, 4.0, 2.0]] {
            assert_eq!(bv.jacobiator_linear(&e(0), &e(1), &e(2), &x).unwrap(), -1.0);
        }
        let p = planar();
        assert_eq!(p.jacobiator_linear(&v(&[1.0, 2.0]), &v(&[0.5, 1.0]), &v(&[3.0, -1.0]), &[0.1, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn zero_section_form() {
        let bv = planar();
        let f = form(&bv);
        let c = f.symplectic_matrix(&v(&[0.3, -0.4]), &DVector::zeros(2), &FdConfig::default()).unwrap();
        let want = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            -1.0, 0.0, 0.0, -1.0, //
            0.0, -1.0, 1.0, 0.0,
        ]);
        assert!((&c.omega - &want).amax() < 1e-8, "{}", c.omega);
        assert_eq!(c.omega, -c.omega.transpose());
        let d = f.realization_defect(&v(&[0.3, -0.4]), &DVector::zeros(2), &FdConfig::default()).unwrap();
        assert!(d.amax() < 1e-6);
    }

    #[test]
    fn nonpoisson_defect_matches_integral_identity() {
        let bv = nonpoisson();
        let f = form(&bv);
        let fd = FdConfig::default();
        let x = v(&[0.2, -0.1, 0.3]);
        let xi = v(&[0.3, 0.2, -0.4]);
        let p = f.verify_integral_identity(&x, &xi, &basis(3, 0), &basis(3, 1), &fd).unwrap();
        assert!(p.lhs[0].abs() > 1e-3, "{p:?}");
        assert!(p.residual() < 1e-3, "{p:?}");
    }

    #[test]
    fn nonpoisson_derivative_identity() {
        let bv = nonpoisson();
        let f = form(&bv);
        let fd = FdConfig::default();
        let x = v(&[0.5, 0.1, -0.2]);
        let p = f.verify_derivative_identity(&x, &basis(3, 0), &basis(3, 1), &basis(3, 2), &fd).unwrap();
        assert_eq!(p.lhs[0], -1.0);
        assert!(p.residual() < 2e-3, "{p:?}");
    }
}
