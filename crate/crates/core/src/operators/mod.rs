//! Catalog of maximal monotone operators with exact resolvents.
//!
//! Three families cover the applications: affine monotone maps (including
//! bilinear saddle operators), subdifferentials of convex functions with
//! closed-form proximity operators, and normal cones of simple convex sets.

mod function;
mod operator;
mod set;

use alloc::vec::Vec;

pub use function::{soft_threshold, ConvexFn};
pub use operator::OperatorSpec;
pub use set::{ConvexSet, Position, MEMBERSHIP_TOL};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Free-function form of [`OperatorSpec::resolvent`].
pub fn resolvent(op: &OperatorSpec, lambda: f64, x: &Vector) -> Result<Vector> {
    op.resolvent(lambda, x)
}

pub fn yosida(op: &OperatorSpec, lambda: f64, x: &Vector) -> Result<Vector> {
    op.yosida(lambda, x)
}

pub fn least_norm(op: &OperatorSpec, x: &Vector) -> Result<Vector> {
    op.least_norm(x)
}

pub fn domain_projection(op: &OperatorSpec, x: &Vector) -> Result<Vector> {
    op.domain_projection(x)
}

pub fn prox(f: &ConvexFn, lambda: f64, x: &Vector) -> Result<Vector> {
    f.prox(lambda, x)
}

/// Euclidean projection; intersections go through Dykstra's algorithm.
pub fn project(set: &ConvexSet, x: &Vector) -> Result<Vector> {
    match set {
        ConvexSet::Intersection(_) => crate::problems::dykstra::project_exact(set, x),
        _ => set.project(x),
    }
}

/// Weighted sum `F = Σ wₛ fₛ` of convex functions, used as the reported
/// objective of a stochastic program.
#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    terms: Vec<(f64, ConvexFn)>,
}

impl Objective {
    pub fn new(terms: Vec<(f64, ConvexFn)>) -> Result<Self> {
        let dim = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("objective needs at least one term".into()))?
            .1
            .dim();
        for (w, f) in &terms {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidWeights("objective weights must be nonnegative".into()));
            }
            if f.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: f.dim() });
            }
        }
        Ok(Objective { terms })
    }

    pub fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }

    pub fn terms(&self) -> &[(f64, ConvexFn)] {
        &self.terms
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        self.terms.iter().try_fold(0.0, |acc, (w, f)| Ok(acc + w * f.value(x)?))
    }

    /// `(Q̄, b̄, c̄)` when every term is a smooth quadratic.
    pub fn as_mean_quadratic(&self) -> Option<(Matrix, Vector, f64)> {
        let d = self.dim();
        let mut q = Matrix::zeros(d, d);
        let mut b = Vector::zeros(d);
        let mut c = 0.0;
        for (w, f) in &self.terms {
            let (qs, bs, cs) = f.as_quadratic()?;
            q = q.add(&qs.scaled(*w));
            b = b.axpy(*w, &bs);
            c += w * cs;
        }
        Some((q, b, c))
    }
}
