//! Numerical verification of Maurer–Cartan type equations on pre-Lie
//! algebras, almost-Poisson manifolds and pre-Lie algebroids.
//!
//! Each structure comes with an explicit solution 1-form, its
//! Maurer–Cartan defect, and checks relating the defect to the Jacobiator.

pub mod algebroid;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod numerics;
pub mod par;
pub mod poisson;
pub mod poly;
pub mod prelie;
pub mod sampling;

use nalgebra::DVector;

pub use error::{Error, Result};

/// Two sides of a numerical identity.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityPair {
    pub lhs: DVector<f64>,
    pub rhs: DVector<f64>,
}

impl IdentityPair {
    /// `‖lhs - rhs‖_∞`.
    pub fn residual(&self) -> f64 {
        (&self.lhs - &self.rhs).amax()
    }
}
