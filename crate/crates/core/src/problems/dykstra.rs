//! Projection onto an intersection of simple convex sets.
//!
//! Plain alternating projections only reach *some* point of the
//! intersection. Dykstra's correction terms make the cyclic scheme converge
//! to the nearest point, which is what distance diagnostics need.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::operators::ConvexSet;

/// Tolerance used when an exact intersection projection is needed inside an
/// operator (resolvent of a normal cone, domain projection).
pub const EXACT_TOL: f64 = 1e-13;
pub const EXACT_MAX_CYCLES: usize = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub point: Vector,
    /// `‖x - point‖`
    pub distance: f64,
    /// Number of full cycles through the member sets.
    pub cycles: usize,
}

/// Dykstra's cyclic projection onto `set` (any variant; intersections are
/// flattened).
///
/// Stops once a full cycle moves both the iterate and the correction terms
/// by at most `tol (1 + ‖x‖)` and every member is violated by at most the
/// same amount. A still moving correction means the iterate is only
/// momentarily parked on a feasible point that is not the projection. Fails with
/// `NoConvergence` after `max_cycles`, which is what happens for empty
/// intersections.
pub fn dykstra_project(set: &ConvexSet, x: &Vector, tol: f64, max_cycles: usize) -> Result<Projection> {
    x.check_dim(set.dim())?;
    let members = set.members();
    if let [single] = members.as_slice() {
        let point = single.project(x)?;
        return Ok(Projection { distance: x.distance(&point), point, cycles: 1 });
    }
    let threshold = tol * (1.0 + x.norm());
    let mut current = x.clone();
    let mut increments: Vec<Vector> = members.iter().map(|_| Vector::zeros(x.dim())).collect();
    let mut residual = f64::INFINITY;
    for cycle in 1..=max_cycles {
        let start = current.clone();
        let mut correction_moved = 0.0;
        for (member, inc) in members.iter().zip(increments.iter_mut()) {
            let shifted = &current + inc;
            let projected = member.project(&shifted)?;
            let next_inc = &shifted - &projected;
            correction_moved += next_inc.distance(inc);
            *inc = next_inc;
            current = projected;
        }
        let moved = current.distance(&start);
        if moved <= threshold && correction_moved <= threshold {
            residual = violation(&members, &current)?;
            if residual <= threshold {
                return Ok(Projection { distance: x.distance(&current), point: current, cycles: cycle });
            }
        }
    }
    if !residual.is_finite() {
        residual = violation(&members, &current)?;
    }
    Err(Error::NoConvergence { iterations: max_cycles, residual })
}

/// `max_i d(x, X_i)`
pub(crate) fn violation(members: &[&ConvexSet], x: &Vector) -> Result<f64> {
    members.iter().try_fold(0.0_f64, |acc, m| Ok(acc.max(x.distance(&m.project(x)?))))
}

/// Projection at [`EXACT_TOL`], for callers that treat it as exact.
pub(crate) fn project_exact(set: &ConvexSet, x: &Vector) -> Result<Vector> {
    dykstra_project(set, x, EXACT_TOL, EXACT_MAX_CYCLES).map(|p| p.point)
}

/// `d(x, set)` at [`EXACT_TOL`].
pub fn distance_to(set: &ConvexSet, x: &Vector) -> Result<f64> {
    dykstra_project(set, x, EXACT_TOL, EXACT_MAX_CYCLES).map(|p| p.distance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    fn unit_box() -> ConvexSet {
        ConvexSet::boxed(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap()
    }

    #[test]
    fn single_member_is_closed_form() {
        let set = ConvexSet::intersection(vec![unit_box()]).unwrap();
        let p = dykstra_project(&set, &v(&[2.0, -1.0]), 1e-12, 10).unwrap();
        assert_eq!(p.point, v(&[1.0, 0.0]));
    }

    #[test]
    fn box_and_halfspace() {
        let set = ConvexSet::intersection(vec![
            unit_box(),
            ConvexSet::halfspace(v(&[1.0, 1.0]), 1.0).unwrap(),
        ])
        .unwrap();
        let p = dykstra_project(&set, &v(&[1.0, 1.0]), 1e-12, 10_000).unwrap();
        assert!(p.point.distance(&v(&[0.5, 0.5])) < 1e-10);
        assert!((p.distance - 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn touching_boxes_meet_at_corner() {
        let set = ConvexSet::intersection(vec![
            unit_box(),
            ConvexSet::boxed(v(&[1.0, 1.0]), v(&[2.0, 2.0])).unwrap(),
        ])
        .unwrap();
        for x in [v(&[0.0, 0.0]), v(&[3.0, -2.0]), v(&[1.5, 0.2])] {
            let p = dykstra_project(&set, &x, 1e-12, 10_000).unwrap();
            assert!(p.point.distance(&v(&[1.0, 1.0])) < 1e-10, "{:?}", p.point);
        }
    }

    #[test]
    fn disjoint_sets_do_not_converge() {
        let set = ConvexSet::intersection(vec![
            unit_box(),
            ConvexSet::boxed(v(&[2.0, 2.0]), v(&[3.0, 3.0])).unwrap(),
        ])
        .unwrap();
        let err = dykstra_project(&set, &v(&[0.0, 0.0]), 1e-10, 500).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 500, residual } if residual > 1.0));
    }

    #[test]
    fn feasible_point_is_fixed() {
        let set = ConvexSet::intersection(vec![
            unit_box(),
            ConvexSet::ball(v(&[0.5, 0.5]), 0.6).unwrap(),
        ])
        .unwrap();
        let p = dykstra_project(&set, &v(&[0.4, 0.6]), 1e-12, 10).unwrap();
        assert_eq!(p.point, v(&[0.4, 0.6]));
        assert_eq!(p.cycles, 1);
    }
}
