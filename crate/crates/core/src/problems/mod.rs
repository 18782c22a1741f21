//! Problem builders and deterministic reference solvers.
//!
//! Each builder turns an application (random feasibility, constrained
//! stochastic programs, bilinear saddle points, strongly monotone affine
//! equations) into a [`RandomFamily`] and, where an exact route exists,
//! attaches a certified reference solution computed without the stochastic
//! iteration.

pub mod dykstra;
mod oracle;

use alloc::vec::Vec;

pub use dykstra::{distance_to, dykstra_project, Projection};
pub use oracle::{kkt_residual, projected_gradient_oracle, OracleSolution};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::operators::{ConvexFn, ConvexSet, Objective, OperatorSpec};
use crate::random_family::{RandomFamily, SampleStream, WEIGHT_SUM_TOL};

/// Internal residual of the reference solvers.
pub const ORACLE_TOL: f64 = 1e-10;
/// Bound a stored solution must meet when re-verified.
pub const CERTIFICATE_TOL: f64 = 1e-9;
/// Cycle cap used when certifying feasibility.
pub const FEASIBILITY_MAX_CYCLES: usize = 100_000;
const ORACLE_MAX_ITER: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct KnownSolution {
    pub point: Vector,
    pub residual: f64,
}

/// Mean blocks of a bilinear saddle family.
#[derive(Clone, Debug, PartialEq)]
pub struct SaddleBlocks {
    pub p: Matrix,
    pub r: Matrix,
    pub k: Matrix,
    pub c: Vector,
    pub d: Vector,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemKind {
    Feasibility,
    /// Members `0..prox_members` are subdifferentials of the sampled
    /// functions, the rest are normal cones of the constraint sets.
    ConstrainedProgram { prox_members: usize },
    Saddle(SaddleBlocks),
    /// Pointwise convergence is expected; `modulus` is the smallest
    /// eigenvalue of the symmetric part of the mean linear map.
    StronglyMonotone { modulus: f64 },
    Custom,
}

/// What a sampled index does in a constrained program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemberRole {
    /// Proximity operator of function `s`.
    Prox(usize),
    /// Projection onto constraint set `j`.
    Projection(usize),
    Other,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub family: RandomFamily,
    pub known_solution: Option<KnownSolution>,
    /// Objective `F` reported at the averaged iterate.
    pub objective: Option<Objective>,
    pub feasible_set: Option<ConvexSet>,
    pub kind: ProblemKind,
}

impl ProblemInstance {
    /// Recomputes the certificate of the stored solution. Returns the
    /// residual, or `CertificateFailed` when it exceeds [`CERTIFICATE_TOL`].
    pub fn verify(&self) -> Result<Option<f64>> {
        let Some(sol) = &self.known_solution else { return Ok(None) };
        let residual = self.certificate_residual(&sol.point)?;
        if residual <= CERTIFICATE_TOL {
            Ok(Some(residual))
        } else {
            Err(Error::CertificateFailed { residual, tolerance: CERTIFICATE_TOL })
        }
    }

    /// Residual of `x` as a solution of this instance: largest constraint
    /// violation for feasibility, KKT residual for constrained programs,
    /// `‖Σ w_i A(i, x)‖` otherwise.
    pub fn certificate_residual(&self, x: &Vector) -> Result<f64> {
        match &self.kind {
            ProblemKind::Feasibility => {
                let set = self.feasible_set.as_ref().ok_or(Error::UnsupportedSet)?;
                dykstra::violation(&set.members(), x)
            }
            ProblemKind::ConstrainedProgram { .. } => {
                let objective = self.objective.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("constrained program has no objective".into())
                })?;
                kkt_residual(objective, self.feasible_set.as_ref(), x)
            }
            _ => Ok(self.family.mean_apply(x)?.norm()),
        }
    }

    pub fn member_role(&self, index: usize) -> MemberRole {
        match self.kind {
            ProblemKind::ConstrainedProgram { prox_members } if index < prox_members => MemberRole::Prox(index),
            ProblemKind::ConstrainedProgram { prox_members } if index < self.family.len() => {
                MemberRole::Projection(index - prox_members)
            }
            _ => MemberRole::Other,
        }
    }

    pub fn solution(&self) -> Option<&Vector> {
        self.known_solution.as_ref().map(|s| &s.point)
    }

    /// Primal-dual gap `sup_y L(x̄, y) - inf_x L(x, ȳ)` of the mean saddle
    /// function at `z = (x̄, ȳ)`; `None` unless both diagonal blocks are
    /// positive definite.
    pub fn saddle_gap(&self, z: &Vector) -> Option<f64> {
        let ProblemKind::Saddle(blocks) = &self.kind else { return None };
        let SaddleBlocks { p, r, k, c, d } = blocks;
        if z.dim() != c.dim() + d.dim() || p.min_sym_eigenvalue() <= 0.0 || r.min_sym_eigenvalue() <= 0.0 {
            return None;
        }
        let (x, y) = z.split_at(c.dim());
        let lagrangian = |x: &Vector, y: &Vector| {
            0.5 * p.mul_vec(x).dot(x) + k.mul_vec(y).dot(x) - 0.5 * r.mul_vec(y).dot(y) + c.dot(x) - d.dot(y)
        };
        let best_y = r.solve(&(&k.transpose().mul_vec(&x) - d)).ok()?;
        let best_x = p.solve(&(&k.mul_vec(&y) + c).scale(-1.0)).ok()?;
        Some(lagrangian(&x, &best_y) - lagrangian(&best_x, &y))
    }
}

/// Random projections onto `sets`: the family of their normal cones.
pub fn build_feasibility(sets: Vec<ConvexSet>, weights: Vec<f64>) -> Result<ProblemInstance> {
    let members = sets.iter().cloned().map(OperatorSpec::normal_cone).collect::<Result<Vec<_>>>()?;
    let family = RandomFamily::new(members, weights)?;
    let feasible = ConvexSet::intersection(sets)?;
    let origin = Vector::zeros(feasible.dim());
    let point = match dykstra_project(&feasible, &origin, ORACLE_TOL * 1e-2, FEASIBILITY_MAX_CYCLES) {
        Ok(p) => p.point,
        Err(Error::NoConvergence { iterations, residual }) => {
            return Err(Error::EmptyIntersection { iterations, residual })
        }
        Err(e) => return Err(e),
    };
    let mut instance = ProblemInstance {
        family,
        known_solution: None,
        objective: None,
        feasible_set: Some(feasible),
        kind: ProblemKind::Feasibility,
    };
    let residual = instance.certificate_residual(&point)?;
    instance.known_solution = Some(KnownSolution { point, residual });
    instance.verify()?;
    Ok(instance)
}

/// `min Σ wₛ fₛ(x)` over `∩ Xᵢ`, realized as one random family: with
/// probability `p0 wₛ` the proximity operator of `fₛ`, with probability
/// `pᵢ` the projection onto `Xᵢ`.
///
/// `functions` carries `(fₛ, wₛ)` with `Σ wₛ = 1`; `sets` carries
/// `(Xᵢ, pᵢ)` with `p0 + Σ pᵢ = 1`.
pub fn build_constrained_program(
    functions: Vec<(ConvexFn, f64)>,
    sets: Vec<(ConvexSet, f64)>,
    p0: f64,
) -> Result<ProblemInstance> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::InvalidWeights("p0 must lie in (0, 1)".into()));
    }
    if functions.is_empty() || sets.is_empty() {
        return Err(Error::InvalidArgument("need at least one function and one set".into()));
    }
    let fsum: f64 = functions.iter().map(|(_, w)| w).sum();
    if (fsum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidWeights(alloc::format!("function weights sum to {fsum}, not 1")));
    }
    let psum: f64 = p0 + sets.iter().map(|(_, p)| p).sum::<f64>();
    if (psum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidWeights(alloc::format!("p0 plus set weights sum to {psum}, not 1")));
    }
    if functions.iter().any(|(f, _)| f.domain_set().is_some()) {
        return Err(Error::InvalidArgument("sampled functions must be finite everywhere".into()));
    }
    let prox_members = functions.len();
    let mut members = Vec::with_capacity(functions.len() + sets.len());
    let mut weights = Vec::with_capacity(members.capacity());
    for (f, w) in &functions {
        members.push(OperatorSpec::subdifferential(f.clone())?);
        weights.push(p0 * w);
    }
    for (set, p) in &sets {
        members.push(OperatorSpec::normal_cone(set.clone())?);
        weights.push(*p);
    }
    let family = RandomFamily::new(members, weights)?;
    let objective = Objective::new(functions.into_iter().map(|(f, w)| (w, f)).collect())?;
    let feasible = ConvexSet::intersection(sets.into_iter().map(|(s, _)| s).collect())?;
    let known_solution = match objective.as_mean_quadratic() {
        Some((q, _, _)) if q.max_sym_eigenvalue() > 0.0 => {
            let sol = projected_gradient_oracle(&objective, Some(&feasible), ORACLE_TOL, ORACLE_MAX_ITER)?;
            Some(KnownSolution { point: sol.point, residual: sol.residual })
        }
        _ => None,
    };
    let instance = ProblemInstance {
        family,
        known_solution,
        objective: Some(objective),
        feasible_set: Some(feasible),
        kind: ProblemKind::ConstrainedProgram { prox_members },
    };
    instance.verify()?;
    Ok(instance)
}

fn weighted_affine_mean(members: &[(OperatorSpec, f64)]) -> Result<(Matrix, Vector)> {
    let (first, _) = members.first().ok_or_else(|| Error::InvalidArgument("empty pool".into()))?;
    let d = first.dim();
    let mut m = Matrix::zeros(d, d);
    let mut b = Vector::zeros(d);
    for (op, w) in members {
        let (mi, bi) = op
            .affine_parts()
            .ok_or_else(|| Error::InvalidArgument("pool members must be affine".into()))?;
        if mi.rows() != d {
            return Err(Error::DimensionMismatch { expected: d, found: mi.rows() });
        }
        m = m.add(&mi.scaled(*w));
        b = b.axpy(*w, &bi);
    }
    Ok((m, b))
}

fn split_pool(pool: Vec<(OperatorSpec, f64)>) -> (Vec<OperatorSpec>, Vec<f64>) {
    pool.into_iter().unzip()
}

/// Bilinear saddle pool; the reference saddle point solves the mean linear
/// system `T̄ z = -(c̄, d̄)`.
pub fn build_saddle(pool: Vec<(OperatorSpec, f64)>) -> Result<ProblemInstance> {
    let mut dx = None;
    for (op, _) in &pool {
        match op {
            OperatorSpec::SaddleBilinear { c, .. } => {
                if dx.is_some_and(|d| d != c.dim()) {
                    return Err(Error::DimensionMismatch { expected: dx.unwrap_or(0), found: c.dim() });
                }
                dx = Some(c.dim());
            }
            _ => return Err(Error::InvalidArgument("saddle pool members must be bilinear saddles".into())),
        }
    }
    let dx = dx.ok_or_else(|| Error::InvalidArgument("empty pool".into()))?;
    let (t, offset) = weighted_affine_mean(&pool)?;
    let point = match t.solve(&offset.scale(-1.0)) {
        Ok(z) => z,
        Err(Error::SingularSystem) => return Err(Error::SingularMean),
        Err(e) => return Err(e),
    };
    let blocks = mean_saddle_blocks(&pool, dx);
    let (members, weights) = split_pool(pool);
    let family = RandomFamily::new(members, weights)?;
    let residual = family.mean_apply(&point)?.norm();
    let instance = ProblemInstance {
        family,
        known_solution: Some(KnownSolution { point, residual }),
        objective: None,
        feasible_set: None,
        kind: ProblemKind::Saddle(blocks),
    };
    instance.verify()?;
    Ok(instance)
}

fn mean_saddle_blocks(pool: &[(OperatorSpec, f64)], dx: usize) -> SaddleBlocks {
    let dy = pool[0].0.dim() - dx;
    let mut acc = SaddleBlocks {
        p: Matrix::zeros(dx, dx),
        r: Matrix::zeros(dy, dy),
        k: Matrix::zeros(dx, dy),
        c: Vector::zeros(dx),
        d: Vector::zeros(dy),
    };
    for (op, w) in pool {
        if let OperatorSpec::SaddleBilinear { p, r, k, c, d } = op {
            acc.p = acc.p.add(&p.scaled(*w));
            acc.r = acc.r.add(&r.scaled(*w));
            acc.k = acc.k.add(&k.scaled(*w));
            acc.c = acc.c.axpy(*w, c);
            acc.d = acc.d.axpy(*w, d);
        }
    }
    acc
}

/// Affine pool whose mean `M̄` is strongly monotone; the reference solution
/// is `x* = -M̄⁻¹ b̄` and the iterates themselves converge to it.
pub fn build_strongly_monotone(pool: Vec<(OperatorSpec, f64)>) -> Result<ProblemInstance> {
    let (m, b) = weighted_affine_mean(&pool)?;
    let modulus = m.min_sym_eigenvalue();
    if !(modulus > 0.0) {
        return Err(Error::NotStronglyMonotone { modulus });
    }
    let point = m.solve(&b.scale(-1.0))?;
    let (members, weights) = split_pool(pool);
    let family = RandomFamily::new(members, weights)?;
    let residual = family.mean_apply(&point)?.norm();
    let instance = ProblemInstance {
        family,
        known_solution: Some(KnownSolution { point, residual }),
        objective: None,
        feasible_set: None,
        kind: ProblemKind::StronglyMonotone { modulus },
    };
    instance.verify()?;
    Ok(instance)
}

/// Any family, with an optional claimed zero of the mean operator.
pub fn build_custom(family: RandomFamily, solution: Option<Vector>) -> Result<ProblemInstance> {
    let mut instance = ProblemInstance {
        family,
        known_solution: None,
        objective: None,
        feasible_set: None,
        kind: ProblemKind::Custom,
    };
    if let Some(point) = solution {
        point.check_dim(instance.family.dim())?;
        let residual = instance.certificate_residual(&point)?;
        instance.known_solution = Some(KnownSolution { point, residual });
        instance.verify()?;
    }
    Ok(instance)
}

/// Smallest observed ratio `max_i d(x, Xᵢ) / d(x, X)` over `samples` points
/// drawn uniformly from the ball of radius `radius` around the origin.
///
/// A strictly positive value is an empirical lower bound on the bounded
/// linear regularity constant over that ball; it is a regression guard,
/// not a proof.
pub fn linear_regularity_witness(
    set: &ConvexSet,
    radius: f64,
    samples: usize,
    stream: &mut SampleStream,
) -> Result<f64> {
    let members = set.members();
    let d = set.dim();
    let mut worst = f64::INFINITY;
    let mut drawn = 0;
    while drawn < samples {
        let coords: Vec<f64> = (0..d).map(|_| radius * (2.0 * stream.next_uniform() - 1.0)).collect();
        let x = Vector::new(coords)?;
        if x.norm() > radius {
            continue;
        }
        drawn += 1;
        let to_set = distance_to(set, &x)?;
        if to_set <= 1e-9 {
            continue;
        }
        worst = worst.min(dykstra::violation(&members, &x)? / to_set);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    fn half_square(b: f64) -> ConvexFn {
        // ½(x - b)²
        ConvexFn::translate(v(&[b]), ConvexFn::quadratic(Matrix::identity(1), v(&[0.0])).unwrap()).unwrap()
    }

    #[test]
    fn feasibility_solution_is_certified() {
        let sets = vec![
            ConvexSet::boxed(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap(),
            ConvexSet::boxed(v(&[1.0, 1.0]), v(&[2.0, 2.0])).unwrap(),
        ];
        let inst = build_feasibility(sets, vec![0.5, 0.5]).unwrap();
        assert!(inst.solution().unwrap().distance(&v(&[1.0, 1.0])) < 1e-9);
        assert!(inst.verify().unwrap().unwrap() <= CERTIFICATE_TOL);
    }

    #[test]
    fn disjoint_feasibility_is_rejected() {
        let sets = vec![
            ConvexSet::boxed(v(&[0.0]), v(&[1.0])).unwrap(),
            ConvexSet::boxed(v(&[2.0]), v(&[3.0])).unwrap(),
        ];
        assert!(matches!(build_feasibility(sets, vec![0.5, 0.5]), Err(Error::EmptyIntersection { .. })));
    }

    #[test]
    fn constrained_program_examples() {
        let pool = || vec![(half_square(1.0), 0.5), (half_square(-1.0), 0.5)];
        let inst = build_constrained_program(
            pool(),
            vec![(ConvexSet::boxed(v(&[0.0]), v(&[10.0])).unwrap(), 0.5)],
            0.5,
        )
        .unwrap();
        assert!(inst.solution().unwrap()[0].abs() < 1e-9);
        assert_eq!(inst.member_role(1), MemberRole::Prox(1));
        assert_eq!(inst.member_role(2), MemberRole::Projection(0));

        let inst = build_constrained_program(
            pool(),
            vec![(ConvexSet::boxed(v(&[1.0]), v(&[10.0])).unwrap(), 0.5)],
            0.5,
        )
        .unwrap();
        assert!((inst.solution().unwrap()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constrained_program_weights_are_checked() {
        let err = build_constrained_program(
            vec![(half_square(0.0), 1.0)],
            vec![(ConvexSet::boxed(v(&[0.0]), v(&[1.0])).unwrap(), 0.4)],
            0.5,
        );
        assert!(matches!(err, Err(Error::InvalidWeights(_))));
    }

    #[test]
    fn saddle_examples() {
        let one = Matrix::identity(1);
        let zero = Matrix::zeros(1, 1);
        let bilinear = OperatorSpec::saddle(zero.clone(), zero, one.clone(), v(&[0.0]), v(&[0.0])).unwrap();
        let inst = build_saddle(vec![(bilinear, 1.0)]).unwrap();
        assert_eq!(inst.solution().unwrap(), &v(&[0.0, 0.0]));

        let strong = OperatorSpec::saddle(one.clone(), one.clone(), one, v(&[0.0]), v(&[0.0])).unwrap();
        let inst = build_saddle(vec![(strong, 1.0)]).unwrap();
        assert_eq!(inst.solution().unwrap(), &v(&[0.0, 0.0]));
        let (t, _) = inst.family.member(0).affine_parts().unwrap();
        assert_eq!(t.min_sym_eigenvalue(), 1.0);
        assert_eq!(inst.saddle_gap(&v(&[0.0, 0.0])), Some(0.0));
        assert!(inst.saddle_gap(&v(&[1.0, 1.0])).unwrap() > 0.0);
    }

    #[test]
    fn singular_saddle_mean_is_rejected() {
        let zero = Matrix::zeros(1, 1);
        let degenerate = OperatorSpec::saddle(zero.clone(), zero.clone(), zero, v(&[0.0]), v(&[0.0])).unwrap();
        assert_eq!(build_saddle(vec![(degenerate, 1.0)]), Err(Error::SingularMean));
    }

    #[test]
    fn strongly_monotone_examples() {
        let pool = vec![
            (OperatorSpec::affine(Matrix::identity(1), v(&[-1.0])).unwrap(), 0.5),
            (OperatorSpec::affine(Matrix::identity(1), v(&[1.0])).unwrap(), 0.5),
        ];
        let inst = build_strongly_monotone(pool).unwrap();
        assert_eq!(inst.solution().unwrap(), &v(&[0.0]));
        assert_eq!(inst.kind, ProblemKind::StronglyMonotone { modulus: 1.0 });

        let single = vec![(OperatorSpec::affine(Matrix::scalar(2, 2.0), v(&[-2.0, 0.0])).unwrap(), 1.0)];
        let inst = build_strongly_monotone(single).unwrap();
        assert_eq!(inst.solution().unwrap(), &v(&[1.0, 0.0]));

        let rot = vec![(OperatorSpec::rotation_2d(), 1.0)];
        assert!(matches!(build_strongly_monotone(rot), Err(Error::NotStronglyMonotone { .. })));
    }

    #[test]
    fn regularity_witness_is_positive_for_box_and_halfspace() {
        let set = ConvexSet::intersection(vec![
            ConvexSet::boxed(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap(),
            ConvexSet::halfspace(v(&[1.0, 1.0]), 0.5).unwrap(),
        ])
        .unwrap();
        let mut s = SampleStream::new(5);
        let kappa = linear_regularity_witness(&set, 3.0, 200, &mut s).unwrap();
        assert!(kappa > 0.1 && kappa <= 1.0 + 1e-9, "{kappa}");
    }
}
