use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Slack used to decide whether a point sits on the boundary of a set.
pub(crate) const BOUNDARY_TOL: f64 = 1e-12;

/// Slack used for membership tests on computed points (projections are
/// exact only up to rounding).
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Closed convex subsets of `R^d`.
///
/// Every variant except `Intersection` has an exact closed-form projection.
/// Use the checked constructors; the public fields are for pattern matching.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexSet {
    Box { lower: Vector, upper: Vector },
    /// `{x : ⟨normal, x⟩ <= offset}`
    Halfspace { normal: Vector, offset: f64 },
    /// `{x : ⟨normal, x⟩ = offset}`
    Hyperplane { normal: Vector, offset: f64 },
    Ball { center: Vector, radius: f64 },
    Intersection(Vec<ConvexSet>),
}

/// Where a point lies relative to a set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Position {
    Interior,
    Boundary,
    Outside,
}

impl ConvexSet {
    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        let set = ConvexSet::Box { lower, upper };
        set.validate()?;
        Ok(set)
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        let set = ConvexSet::Halfspace { normal, offset };
        set.validate()?;
        Ok(set)
    }

    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self> {
        let set = ConvexSet::Hyperplane { normal, offset };
        set.validate()?;
        Ok(set)
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        let set = ConvexSet::Ball { center, radius };
        set.validate()?;
        Ok(set)
    }

    pub fn intersection(members: Vec<ConvexSet>) -> Result<Self> {
        let set = ConvexSet::Intersection(members);
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexSet::Box { lower, upper } => {
                upper.check_dim(lower.dim())?;
                if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
                    return Err(Error::InvalidArgument("box lower bound exceeds upper bound".into()));
                }
            }
            ConvexSet::Halfspace { normal, offset } | ConvexSet::Hyperplane { normal, offset } => {
                if !offset.is_finite() {
                    return Err(Error::NonFinite("set offset"));
                }
                if normal.norm_sq() == 0.0 {
                    return Err(Error::InvalidArgument("normal vector must be nonzero".into()));
                }
            }
            ConvexSet::Ball { radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidArgument("ball radius must be positive".into()));
                }
            }
            ConvexSet::Intersection(members) => {
                let first = members.first().ok_or_else(|| {
                    Error::InvalidArgument("intersection needs at least one member".into())
                })?;
                let dim = first.dim();
                for m in members {
                    m.validate()?;
                    if m.dim() != dim {
                        return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Box { lower, .. } => lower.dim(),
            ConvexSet::Halfspace { normal, .. } | ConvexSet::Hyperplane { normal, .. } => normal.dim(),
            ConvexSet::Ball { center, .. } => center.dim(),
            ConvexSet::Intersection(members) => members.first().map_or(0, ConvexSet::dim),
        }
    }

    /// Non-intersection members, with nested intersections flattened.
    pub fn members(&self) -> Vec<&ConvexSet> {
        match self {
            ConvexSet::Intersection(members) => members.iter().flat_map(|m| m.members()).collect(),
            other => alloc::vec![other],
        }
    }

    /// Exact projection. Intersections go through
    /// [`dykstra_project`](crate::problems::dykstra_project) instead.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim())?;
        let p = match self {
            ConvexSet::Box { lower, upper } => Vector::from_raw(
                x.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(&xi, (&l, &u))| xi.max(l).min(u))
                    .collect(),
            ),
            ConvexSet::Halfspace { normal, offset } => {
                let excess = normal.dot(x) - offset;
                if excess <= 0.0 {
                    x.clone()
                } else {
                    x.axpy(-excess / normal.norm_sq(), normal)
                }
            }
            ConvexSet::Hyperplane { normal, offset } => {
                x.axpy(-(normal.dot(x) - offset) / normal.norm_sq(), normal)
            }
            ConvexSet::Ball { center, radius } => {
                let r = x.distance(center);
                if r <= *radius {
                    x.clone()
                } else {
                    center.axpy(radius / r, &(x - center))
                }
            }
            ConvexSet::Intersection(_) => return Err(Error::UnsupportedSet),
        };
        p.ensure_finite("projection")
    }

    /// Membership up to `tol`, scaled by the magnitude of the data involved.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        match self {
            ConvexSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(&xi, (&l, &u))| xi >= l - tol * (1.0 + l.abs()) && xi <= u + tol * (1.0 + u.abs())),
            ConvexSet::Halfspace { normal, offset } => {
                normal.dot(x) - offset <= tol * normal.norm() * (1.0 + x.norm())
            }
            ConvexSet::Hyperplane { normal, offset } => {
                (normal.dot(x) - offset).abs() <= tol * normal.norm() * (1.0 + x.norm())
            }
            ConvexSet::Ball { center, radius } => x.distance(center) <= radius + tol * (1.0 + radius),
            ConvexSet::Intersection(members) => members.iter().all(|m| m.contains(x, tol)),
        }
    }

    pub fn position(&self, x: &Vector) -> Result<Position> {
        x.check_dim(self.dim())?;
        let tol = BOUNDARY_TOL;
        let pos = match self {
            ConvexSet::Box { lower, upper } => {
                let mut pos = Position::Interior;
                for (&xi, (&l, &u)) in x.iter().zip(lower.iter().zip(upper.iter())) {
                    let sl = tol * (1.0 + l.abs());
                    let su = tol * (1.0 + u.abs());
                    if xi < l - sl || xi > u + su {
                        return Ok(Position::Outside);
                    }
                    if xi <= l + sl || xi >= u - su {
                        pos = Position::Boundary;
                    }
                }
                pos
            }
            ConvexSet::Halfspace { normal, offset } => {
                let slack = (normal.dot(x) - offset) / normal.norm();
                let s = tol * (1.0 + x.norm() + offset.abs());
                classify(slack, s)
            }
            ConvexSet::Hyperplane { normal, offset } => {
                let slack = ((normal.dot(x) - offset) / normal.norm()).abs();
                let s = tol * (1.0 + x.norm() + offset.abs());
                if slack > s { Position::Outside } else { Position::Boundary }
            }
            ConvexSet::Ball { center, radius } => {
                classify(x.distance(center) - radius, tol * (1.0 + radius))
            }
            ConvexSet::Intersection(members) => {
                let mut pos = Position::Interior;
                for m in members {
                    match m.position(x)? {
                        Position::Outside => return Ok(Position::Outside),
                        Position::Boundary => pos = Position::Boundary,
                        Position::Interior => {}
                    }
                }
                pos
            }
        };
        Ok(pos)
    }

    /// Projection of `z` onto the normal cone of the set at `at`.
    ///
    /// Used to pick least-norm elements of `v + N(at)`.
    pub fn project_onto_normal_cone(&self, at: &Vector, z: &Vector) -> Result<Vector> {
        z.check_dim(self.dim())?;
        let zero = || Vector::zeros(z.dim());
        match (self, self.position(at)?) {
            (_, Position::Outside) => Err(Error::DomainError),
            (ConvexSet::Intersection(_), Position::Boundary) => Err(Error::UnsupportedSet),
            (_, Position::Interior) => Ok(zero()),
            (ConvexSet::Box { lower, upper }, Position::Boundary) => Ok(Vector::from_raw(
                at.iter()
                    .zip(z.iter())
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|((&xi, &zi), (&l, &u))| {
                        let at_lower = xi <= l + BOUNDARY_TOL * (1.0 + l.abs());
                        let at_upper = xi >= u - BOUNDARY_TOL * (1.0 + u.abs());
                        match (at_lower, at_upper) {
                            (true, true) => zi,
                            (true, false) => zi.min(0.0),
                            (false, true) => zi.max(0.0),
                            (false, false) => 0.0,
                        }
                    })
                    .collect(),
            )),
            (ConvexSet::Halfspace { normal, .. }, Position::Boundary) => {
                Ok(normal.scale(normal.dot(z).max(0.0) / normal.norm_sq()))
            }
            (ConvexSet::Hyperplane { normal, .. }, Position::Boundary) => {
                Ok(normal.scale(normal.dot(z) / normal.norm_sq()))
            }
            (ConvexSet::Ball { center, radius }, Position::Boundary) => {
                let u = (at - center).scale(1.0 / radius);
                Ok(u.scale(u.dot(z).max(0.0)))
            }
        }
    }

    /// The set `{x + shift : x ∈ self}`.
    pub fn translate(&self, shift: &Vector) -> ConvexSet {
        match self {
            ConvexSet::Box { lower, upper } => {
                ConvexSet::Box { lower: lower + shift, upper: upper + shift }
            }
            ConvexSet::Halfspace { normal, offset } => ConvexSet::Halfspace {
                normal: normal.clone(),
                offset: offset + normal.dot(shift),
            },
            ConvexSet::Hyperplane { normal, offset } => ConvexSet::Hyperplane {
                normal: normal.clone(),
                offset: offset + normal.dot(shift),
            },
            ConvexSet::Ball { center, radius } => {
                ConvexSet::Ball { center: center + shift, radius: *radius }
            }
            ConvexSet::Intersection(members) => {
                ConvexSet::Intersection(members.iter().map(|m| m.translate(shift)).collect())
            }
        }
    }
}

fn classify(signed_gap: f64, slack: f64) -> Position {
    if signed_gap > slack {
        Position::Outside
    } else if signed_gap >= -slack {
        Position::Boundary
    } else {
        Position::Interior
    }
}
