use alloc::boxed::Box;

use super::function::{check_step, ConvexFn};
use super::set::{ConvexSet, Position};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::problems::dykstra;

/// A maximal monotone operator on `R^d` with a closed-form resolvent.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorSpec {
    /// `x ↦ Mx + b` with `sym(M)` positive semidefinite.
    AffineMonotone { m: Matrix, b: Vector },
    Subdifferential(ConvexFn),
    NormalCone(ConvexSet),
    /// `(x, y) ↦ (Px + Ky + c, Ry - Kᵀx + d)`, the monotone operator of the
    /// convex-concave function `½xᵀPx + xᵀKy - ½yᵀRy + cᵀx - dᵀy`.
    SaddleBilinear { p: Matrix, r: Matrix, k: Matrix, c: Vector, d: Vector },
    /// `α A` with `α > 0`.
    Scaled { alpha: f64, inner: Box<OperatorSpec> },
}

impl OperatorSpec {
    pub fn affine(m: Matrix, b: Vector) -> Result<Self> {
        let op = OperatorSpec::AffineMonotone { m, b };
        op.validate()?;
        Ok(op)
    }

    /// Quarter-turn rotation of the plane; monotone but with no
    /// strongly monotone part.
    pub fn rotation_2d() -> Self {
        let m = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).expect("static matrix");
        OperatorSpec::AffineMonotone { m, b: Vector::zeros(2) }
    }

    pub fn subdifferential(f: ConvexFn) -> Result<Self> {
        f.validate()?;
        Ok(OperatorSpec::Subdifferential(f))
    }

    pub fn normal_cone(set: ConvexSet) -> Result<Self> {
        set.validate()?;
        Ok(OperatorSpec::NormalCone(set))
    }

    pub fn saddle(p: Matrix, r: Matrix, k: Matrix, c: Vector, d: Vector) -> Result<Self> {
        let op = OperatorSpec::SaddleBilinear { p, r, k, c, d };
        op.validate()?;
        Ok(op)
    }

    pub fn scaled(alpha: f64, inner: OperatorSpec) -> Result<Self> {
        let op = OperatorSpec::Scaled { alpha, inner: Box::new(inner) };
        op.validate()?;
        Ok(op)
    }

    /// Shapes, finiteness and the monotonicity certificate.
    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorSpec::AffineMonotone { m, b } => {
                if !m.is_square() {
                    return Err(Error::DimensionMismatch { expected: m.rows(), found: m.cols() });
                }
                b.check_dim(m.rows())?;
                m.check_monotone()
            }
            OperatorSpec::Subdifferential(f) => f.validate(),
            OperatorSpec::NormalCone(set) => set.validate(),
            OperatorSpec::SaddleBilinear { p, r, k, c, d } => {
                if !p.is_square() || !r.is_square() {
                    return Err(Error::InvalidArgument("saddle blocks P and R must be square".into()));
                }
                if k.rows() != p.rows() || k.cols() != r.rows() {
                    return Err(Error::InvalidArgument("saddle coupling K must be dx by dy".into()));
                }
                c.check_dim(p.rows())?;
                d.check_dim(r.rows())?;
                self.saddle_matrix()?.check_monotone()
            }
            OperatorSpec::Scaled { alpha, inner } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(Error::InvalidArgument("scale factor must be positive".into()));
                }
                inner.validate()
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            OperatorSpec::AffineMonotone { b, .. } => b.dim(),
            OperatorSpec::Subdifferential(f) => f.dim(),
            OperatorSpec::NormalCone(set) => set.dim(),
            OperatorSpec::SaddleBilinear { c, d, .. } => c.dim() + d.dim(),
            OperatorSpec::Scaled { inner, .. } => inner.dim(),
        }
    }

    /// `T = [[P, K], [-Kᵀ, R]]` for the saddle variant.
    pub fn saddle_matrix(&self) -> Result<Matrix> {
        match self {
            OperatorSpec::SaddleBilinear { p, r, k, .. } => {
                Matrix::from_blocks(p, k, &k.transpose().scaled(-1.0), r)
            }
            _ => Err(Error::InvalidArgument("not a saddle operator".into())),
        }
    }

    /// Linear part and offset when the operator is affine and single-valued
    /// everywhere (affine and saddle variants, possibly scaled).
    pub fn affine_parts(&self) -> Option<(Matrix, Vector)> {
        match self {
            OperatorSpec::AffineMonotone { m, b } => Some((m.clone(), b.clone())),
            OperatorSpec::SaddleBilinear { c, d, .. } => Some((self.saddle_matrix().ok()?, c.concat(d))),
            OperatorSpec::Scaled { alpha, inner } => {
                inner.affine_parts().map(|(m, b)| (m.scaled(*alpha), b.scale(*alpha)))
            }
            _ => None,
        }
    }

    /// `J_λ(x) = (I + λA)⁻¹ x`, the unique `y` with `(x - y)/λ ∈ A(y)`.
    pub fn resolvent(&self, lambda: f64, x: &Vector) -> Result<Vector> {
        check_step(lambda)?;
        x.check_dim(self.dim())?;
        match self {
            OperatorSpec::AffineMonotone { m, b } => m.shifted_identity(lambda).solve(&x.axpy(-lambda, b)),
            OperatorSpec::Subdifferential(f) => f.prox(lambda, x),
            OperatorSpec::NormalCone(set) => match set {
                ConvexSet::Intersection(_) => dykstra::project_exact(set, x),
                _ => set.project(x),
            },
            OperatorSpec::SaddleBilinear { c, d, .. } => {
                let t = self.saddle_matrix()?;
                t.shifted_identity(lambda).solve(&x.axpy(-lambda, &c.concat(d)))
            }
            OperatorSpec::Scaled { alpha, inner } => inner.resolvent(alpha * lambda, x),
        }
    }

    /// Yosida approximation `(x - J_λ(x)) / λ`.
    pub fn yosida(&self, lambda: f64, x: &Vector) -> Result<Vector> {
        let j = self.resolvent(lambda, x)?;
        (x - &j).scale(1.0 / lambda).ensure_finite("yosida approximation")
    }

    /// Element of least norm in `A(x)`; `DomainError` outside the domain.
    pub fn least_norm(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim())?;
        match self {
            OperatorSpec::AffineMonotone { .. } | OperatorSpec::SaddleBilinear { .. } => self.apply(x),
            OperatorSpec::Subdifferential(f) => f.least_norm_subgradient(x),
            OperatorSpec::NormalCone(set) => match set.position(x)? {
                Position::Outside => Err(Error::DomainError),
                _ => Ok(Vector::zeros(x.dim())),
            },
            OperatorSpec::Scaled { alpha, inner } => Ok(inner.least_norm(x)?.scale(*alpha)),
        }
    }

    /// `A(x)` when it is a singleton; `SetValuedAt` or `DomainError`
    /// otherwise.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim())?;
        match self {
            OperatorSpec::AffineMonotone { m, b } => Ok(&m.mul_vec(x) + b),
            OperatorSpec::SaddleBilinear { c, d, .. } => Ok(&self.saddle_matrix()?.mul_vec(x) + &c.concat(d)),
            OperatorSpec::Subdifferential(f) => f.single_valued_gradient(x),
            OperatorSpec::NormalCone(set) => match set.position(x)? {
                Position::Interior => Ok(Vector::zeros(x.dim())),
                Position::Boundary => Err(Error::SetValuedAt),
                Position::Outside => Err(Error::DomainError),
            },
            OperatorSpec::Scaled { alpha, inner } => Ok(inner.apply(x)?.scale(*alpha)),
        }
    }

    /// Closure of the domain, `None` for the whole space.
    pub fn domain_set(&self) -> Option<ConvexSet> {
        match self {
            OperatorSpec::AffineMonotone { .. } | OperatorSpec::SaddleBilinear { .. } => None,
            OperatorSpec::Subdifferential(f) => f.domain_set(),
            OperatorSpec::NormalCone(set) => Some(set.clone()),
            OperatorSpec::Scaled { inner, .. } => inner.domain_set(),
        }
    }

    /// Projection onto the closure of the domain, the limit of `J_λ(x)` as
    /// `λ ↓ 0`.
    pub fn domain_projection(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim())?;
        match self.domain_set() {
            None => Ok(x.clone()),
            Some(set @ ConvexSet::Intersection(_)) => dykstra::project_exact(&set, x),
            Some(set) => set.project(x),
        }
    }
}
