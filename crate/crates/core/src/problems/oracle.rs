use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::operators::{ConvexSet, Objective};

use super::dykstra::{dykstra_project, EXACT_MAX_CYCLES};

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSolution {
    pub point: Vector,
    /// `‖x - P(x - ∇F(x)/L)‖` at the returned point.
    pub residual: f64,
    pub iterations: usize,
}

/// Minimizes a mean quadratic over a feasible set (the whole space when
/// `feasible` is `None`) by projected gradient steps of length `1/L`, `L`
/// the largest eigenvalue of `Q̄`.
///
/// Projections onto intersections use Dykstra at a tolerance well below
/// `tol`, so the reported residual is not polluted by projection error.
pub fn projected_gradient_oracle(
    objective: &Objective,
    feasible: Option<&ConvexSet>,
    tol: f64,
    max_iter: usize,
) -> Result<OracleSolution> {
    let (q, b, _) = objective
        .as_mean_quadratic()
        .ok_or_else(|| Error::InvalidArgument("oracle needs a mean of smooth quadratics".into()))?;
    let lipschitz = q.max_sym_eigenvalue();
    if !(lipschitz > 0.0) {
        return Err(Error::InvalidArgument("mean quadratic has no curvature".into()));
    }
    if let Some(set) = feasible {
        set.validate()?;
        if set.dim() != objective.dim() {
            return Err(Error::DimensionMismatch { expected: objective.dim(), found: set.dim() });
        }
    }
    let project = |x: &Vector| -> Result<Vector> {
        match feasible {
            None => Ok(x.clone()),
            Some(set) => dykstra_project(set, x, 1e-3 * tol, EXACT_MAX_CYCLES).map(|p| p.point),
        }
    };
    let step = 1.0 / lipschitz;
    let mut x = project(&Vector::zeros(objective.dim()))?;
    let mut residual = f64::INFINITY;
    for iteration in 0..max_iter {
        let grad = &q.mul_vec(&x) + &b;
        let next = project(&x.axpy(-step, &grad))?;
        residual = x.distance(&next);
        if residual <= tol {
            return Ok(OracleSolution { point: x, residual, iterations: iteration });
        }
        x = next;
    }
    Err(Error::NoConvergence { iterations: max_iter, residual })
}

/// KKT residual `‖x - P(x - ∇F(x)/L)‖` of a mean quadratic.
pub fn kkt_residual(objective: &Objective, feasible: Option<&ConvexSet>, x: &Vector) -> Result<f64> {
    let (q, b, _) = objective
        .as_mean_quadratic()
        .ok_or_else(|| Error::InvalidArgument("KKT residual needs a mean quadratic".into()))?;
    let lipschitz = q.max_sym_eigenvalue();
    let grad = &q.mul_vec(x) + &b;
    let moved = x.axpy(-1.0 / lipschitz, &grad);
    let projected = match feasible {
        None => moved,
        Some(set) => dykstra_project(set, &moved, 1e-13, EXACT_MAX_CYCLES)?.point,
    };
    Ok(x.distance(&projected))
}
