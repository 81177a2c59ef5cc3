//! Fixture lookup, inline fixture construction, and the suite catalogue.

use std::collections::BTreeSet;

use mcforge_core::algebroid::{cotangent_algebroid, AConnection};
use mcforge_core::field::{Coefficient, DomainBox};
use mcforge_core::fixtures::{self, AlgebroidFixture};
use mcforge_core::poisson::BivectorField;
use mcforge_core::poly::Polynomial;
use mcforge_core::prelie::PreLieAlgebra;

use crate::scenario::{CoefficientSpec, FixtureRef, InlineFixture, Kind};
use crate::ConfigError;

/// Half width of the box `(-w, w)ⁿ` for inline bivectors.
pub const INLINE_BOX: f64 = 10.0;

pub const PRELIE_SUITES: [&str; 7] = ["jacobi", "boundary", "weak_equation", "mc_defect", "derivative_identity", "integral_identity", "equivalence"];
pub const POISSON_SUITES: [&str; 9] = [
    "jacobi",
    "boundary",
    "mc_defect",
    "derivative_identity",
    "integral_identity",
    "realization",
    "zero_section",
    "linear_bridge",
    "equivalence",
];
pub const ALGEBROID_SUITES: [&str; 11] = [
    "jacobi",
    "geodesic_scaling",
    "a_path",
    "transport_composition",
    "anchored",
    "boundary",
    "mc_defect",
    "derivative_identity",
    "integral_identity",
    "connection_independence",
    "equivalence",
];
pub const BRIDGE_SUITES: [&str; 2] = ["bridge", "cotangent_structure"];

pub fn suites(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::Prelie => &PRELIE_SUITES,
        Kind::Poisson => &POISSON_SUITES,
        Kind::Algebroid => &ALGEBROID_SUITES,
        Kind::Bridge => &BRIDGE_SUITES,
    }
}

pub fn default_tolerance(kind: Kind, suite: &str) -> f64 {
    match (kind, suite) {
        (_, "equivalence") => 0.0,
        (Kind::Prelie, "jacobi") => 1e-10,
        (Kind::Prelie, "boundary") => 1e-12,
        (Kind::Prelie, "weak_equation" | "mc_defect") => 5e-7,
        (Kind::Prelie, "derivative_identity") => 1e-4,
        (Kind::Prelie, "integral_identity") => 1e-5,
        (Kind::Poisson, "jacobi") => 1e-8,
        (Kind::Poisson, "boundary") => 1e-10,
        (Kind::Poisson, "mc_defect" | "realization") => 1e-4,
        (Kind::Poisson, "derivative_identity") => 2e-3,
        (Kind::Poisson, "integral_identity") => 1e-3,
        (Kind::Poisson, "zero_section") => 1e-6,
        (Kind::Poisson, "linear_bridge") => 1e-8,
        (Kind::Algebroid, "jacobi" | "geodesic_scaling" | "boundary" | "transport_composition") => 1e-8,
        (Kind::Algebroid, "a_path") => 1e-7,
        (Kind::Algebroid, "anchored" | "connection_independence") => 1e-5,
        (Kind::Algebroid, "mc_defect") => 1e-4,
        (Kind::Algebroid, "derivative_identity") => 2e-3,
        (Kind::Algebroid, "integral_identity") => 1e-3,
        (Kind::Bridge, "bridge") => 1e-3,
        (Kind::Bridge, "cotangent_structure") => 1e-6,
        _ => 0.0,
    }
}

/// A fixture resolved for the scenario kind.
#[derive(Debug, Clone)]
pub enum Resolved {
    Algebra(PreLieAlgebra),
    Bivector(BivectorField),
    Algebroid(AlgebroidFixture),
}

pub fn resolve(kind: Kind, fixture: &FixtureRef) -> Result<Resolved, ConfigError> {
    match fixture {
        FixtureRef::Name(name) => resolve_name(kind, name),
        FixtureRef::Inline(inline) => resolve_inline(kind, inline),
    }
}

fn resolve_name(kind: Kind, name: &str) -> Result<Resolved, ConfigError> {
    let found = match kind {
        Kind::Prelie => fixtures::algebra(name).map(Resolved::Algebra),
        Kind::Poisson | Kind::Bridge => fixtures::bivector(name).map(Resolved::Bivector),
        Kind::Algebroid => fixtures::algebroid(name).map(Resolved::Algebroid),
    };
    found.ok_or_else(|| {
        let names: Vec<&str> = match kind {
            Kind::Prelie => fixtures::ALGEBRAS.to_vec(),
            Kind::Poisson | Kind::Bridge => fixtures::BIVECTORS.to_vec(),
            Kind::Algebroid => fixtures::ALGEBROIDS.to_vec(),
        };
        ConfigError::Invalid { field: "fixture".into(), message: format!("no {kind} fixture named {name:?}; known: {}", names.join(", ")) }
    })
}

/// `"12"` or `"1,2"` → `(0, 1)`.
fn parse_pair(key: &str, dim: usize) -> Result<(usize, usize), ConfigError> {
    let bad = || ConfigError::Invalid {
        field: format!("fixture.coefficients.{key}"),
        message: format!("key must name two distinct indices in 1..={dim}, as \"ij\" or \"i,j\""),
    };
    let parts: Vec<&str> = if key.contains(',') {
        key.split(',').map(str::trim).collect()
    } else if key.len() == 2 && key.is_ascii() {
        vec![&key[0..1], &key[1..2]]
    } else {
        return Err(bad());
    };
    if parts.len() != 2 {
        return Err(bad());
    }
    let i: usize = parts[0].parse().map_err(|_| bad())?;
    let j: usize = parts[1].parse().map_err(|_| bad())?;
    if i == 0 || j == 0 || i > dim || j > dim || i == j {
        return Err(bad());
    }
    Ok((i - 1, j - 1))
}

fn parse_coefficient(key: &str, spec: &CoefficientSpec, dim: usize) -> Result<Polynomial, ConfigError> {
    match spec {
        CoefficientSpec::Number(v) => Ok(Polynomial::constant(dim, *v)),
        CoefficientSpec::Expr(src) => Polynomial::parse(src, dim)
            .map_err(|e| ConfigError::Invalid { field: format!("fixture.coefficients.{key}"), message: e.to_string() }),
    }
}

type Entries = Vec<((usize, usize), Polynomial)>;

/// Inline pairs in key order, oriented so that `i < j`.
fn oriented_entries(inline: &InlineFixture) -> Result<Entries, ConfigError> {
    let dim = inline.dim;
    if dim < 2 {
        return Err(ConfigError::Invalid { field: "fixture.dim".into(), message: "must be at least 2".into() });
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (key, spec) in &inline.coefficients {
        let (i, j) = parse_pair(key, dim)?;
        let (lo, hi) = (i.min(j), i.max(j));
        if !seen.insert((lo, hi)) {
            return Err(ConfigError::Invalid { field: format!("fixture.coefficients.{key}"), message: "pair given twice".into() });
        }
        let p = parse_coefficient(key, spec, dim)?;
        out.push(((lo, hi), if i < j { p } else { p.scale(-1.0) }));
    }
    Ok(out)
}

fn inline_bivector(inline: &InlineFixture) -> Result<BivectorField, ConfigError> {
    let entries = oriented_entries(inline)?.into_iter().map(|(k, p)| (k, Coefficient::from(p))).collect();
    BivectorField::from_entries(DomainBox::cube(inline.dim, INLINE_BOX), entries)
        .map_err(|e| ConfigError::Invalid { field: "fixture".into(), message: e.to_string() })
}

fn resolve_inline(kind: Kind, inline: &InlineFixture) -> Result<Resolved, ConfigError> {
    match kind {
        Kind::Prelie => {
            let mut brackets = Vec::new();
            for ((i, j), p) in oriented_entries(inline)? {
                let v = p.homogeneous_linear_coefficients().ok_or_else(|| ConfigError::Invalid {
                    field: format!("fixture.coefficients.{}{}", i + 1, j + 1),
                    message: "a bracket must be a linear combination of x1..xn (standing for the basis)".into(),
                })?;
                brackets.push(((i, j), v));
            }
            PreLieAlgebra::from_brackets(inline.dim, &brackets)
                .map(Resolved::Algebra)
                .map_err(|e| ConfigError::Invalid { field: "fixture".into(), message: e.to_string() })
        }
        Kind::Poisson | Kind::Bridge => inline_bivector(inline).map(Resolved::Bivector),
        Kind::Algebroid => {
            let bv = inline_bivector(inline)?;
            let n = bv.dim();
            Ok(Resolved::Algebroid(AlgebroidFixture { algebroid: cotangent_algebroid(&bv), connection: AConnection::zero(n, n) }))
        }
    }
}
