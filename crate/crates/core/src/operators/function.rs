use alloc::boxed::Box;
use alloc::vec::Vec;

use super::set::{ConvexSet, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Convex functions on `R^d` whose proximity operator has a closed form.
///
/// Composites (`Sum`, `Translate`) are restricted to a smooth quadratic part
/// plus at most one non-smooth term. When the non-smooth term is a weighted
/// ℓ¹ norm or a box indicator the quadratic part must be diagonal; for the
/// other indicators it must be a multiple of the identity.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexFn {
    /// `½ xᵀQx + bᵀx` with `Q` symmetric positive semidefinite.
    Quadratic { q: Matrix, b: Vector },
    /// `Σ wᵢ |xᵢ|` with `wᵢ >= 0`.
    WeightedL1 { weights: Vector },
    /// `bᵀx`
    Linear { b: Vector },
    Indicator(ConvexSet),
    /// `x ↦ inner(x - shift)`
    Translate { shift: Vector, inner: Box<ConvexFn> },
    Sum(Vec<ConvexFn>),
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum NonSmooth {
    L1(Vector),
    Indicator(ConvexSet),
}

/// `½ xᵀQx + bᵀx + constant + g(x - shift)`
#[derive(Clone, Debug)]
pub(crate) struct Decomposed {
    pub q: Option<Matrix>,
    pub b: Vector,
    pub constant: f64,
    pub nonsmooth: Option<(NonSmooth, Vector)>,
}

impl ConvexFn {
    /// Quadratic `½ xᵀQx + bᵀx`; `Q` is replaced by its symmetric part.
    pub fn quadratic(q: Matrix, b: Vector) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::DimensionMismatch { expected: q.rows(), found: q.cols() });
        }
        b.check_dim(q.rows())?;
        q.check_monotone()?;
        Ok(ConvexFn::Quadratic { q: q.sym_part(), b })
    }

    pub fn weighted_l1(weights: Vector) -> Result<Self> {
        if weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidArgument("l1 weights must be nonnegative".into()));
        }
        Ok(ConvexFn::WeightedL1 { weights })
    }

    pub fn linear(b: Vector) -> Self {
        ConvexFn::Linear { b }
    }

    pub fn indicator(set: ConvexSet) -> Result<Self> {
        set.validate()?;
        Ok(ConvexFn::Indicator(set))
    }

    pub fn translate(shift: Vector, inner: ConvexFn) -> Result<Self> {
        let f = ConvexFn::Translate { shift, inner: Box::new(inner) };
        f.validate()?;
        Ok(f)
    }

    pub fn sum(terms: Vec<ConvexFn>) -> Result<Self> {
        let f = ConvexFn::Sum(terms);
        f.validate()?;
        Ok(f)
    }

    /// Checks the data invariants and that the prox has a closed form.
    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexFn::Quadratic { q, b } => {
                b.check_dim(q.rows())?;
                q.check_monotone()
            }
            ConvexFn::WeightedL1 { weights } => {
                if weights.iter().any(|w| *w < 0.0) {
                    return Err(Error::InvalidArgument("l1 weights must be nonnegative".into()));
                }
                Ok(())
            }
            ConvexFn::Linear { .. } => Ok(()),
            ConvexFn::Indicator(set) => set.validate(),
            ConvexFn::Translate { shift, inner } => {
                inner.validate()?;
                shift.check_dim(inner.dim())
            }
            ConvexFn::Sum(terms) => {
                let first = terms
                    .first()
                    .ok_or_else(|| Error::InvalidArgument("sum needs at least one term".into()))?;
                for t in terms {
                    t.validate()?;
                    if t.dim() != first.dim() {
                        return Err(Error::DimensionMismatch { expected: first.dim(), found: t.dim() });
                    }
                }
                self.decompose()?.check_prox_form()
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexFn::Quadratic { b, .. } | ConvexFn::Linear { b } => b.dim(),
            ConvexFn::WeightedL1 { weights } => weights.dim(),
            ConvexFn::Indicator(set) => set.dim(),
            ConvexFn::Translate { shift, .. } => shift.dim(),
            ConvexFn::Sum(terms) => terms.first().map_or(0, ConvexFn::dim),
        }
    }

    pub(crate) fn decompose(&self) -> Result<Decomposed> {
        let d = self.dim();
        Ok(match self {
            ConvexFn::Quadratic { q, b } => {
                Decomposed { q: Some(q.clone()), b: b.clone(), constant: 0.0, nonsmooth: None }
            }
            ConvexFn::Linear { b } => Decomposed { q: None, b: b.clone(), constant: 0.0, nonsmooth: None },
            ConvexFn::WeightedL1 { weights } => Decomposed {
                q: None,
                b: Vector::zeros(d),
                constant: 0.0,
                nonsmooth: Some((NonSmooth::L1(weights.clone()), Vector::zeros(d))),
            },
            ConvexFn::Indicator(set) => Decomposed {
                q: None,
                b: Vector::zeros(d),
                constant: 0.0,
                nonsmooth: Some((NonSmooth::Indicator(set.clone()), Vector::zeros(d))),
            },
            ConvexFn::Translate { shift, inner } => {
                // ½(x-s)ᵀQ(x-s) + bᵀ(x-s) + k = ½xᵀQx + (b - Qs)ᵀx + ½sᵀQs - bᵀs + k
                let inner = inner.decompose()?;
                let (b, constant) = match &inner.q {
                    Some(q) => {
                        let qs = q.mul_vec(shift);
                        (&inner.b - &qs, inner.constant + 0.5 * qs.dot(shift) - inner.b.dot(shift))
                    }
                    None => (inner.b.clone(), inner.constant - inner.b.dot(shift)),
                };
                Decomposed {
                    q: inner.q,
                    b,
                    constant,
                    nonsmooth: inner.nonsmooth.map(|(g, s)| (g, &s + shift)),
                }
            }
            ConvexFn::Sum(terms) => {
                let mut acc = Decomposed { q: None, b: Vector::zeros(d), constant: 0.0, nonsmooth: None };
                for t in terms {
                    let part = t.decompose()?;
                    acc.q = match (acc.q, part.q) {
                        (Some(a), Some(b)) => Some(a.add(&b)),
                        (a, b) => a.or(b),
                    };
                    acc.b = &acc.b + &part.b;
                    acc.constant += part.constant;
                    if let Some(g) = part.nonsmooth {
                        if acc.nonsmooth.is_some() {
                            return Err(Error::UnsupportedComposite);
                        }
                        acc.nonsmooth = Some(g);
                    }
                }
                acc
            }
        })
    }

    /// Function value; `+∞` outside the domain.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        x.check_dim(self.dim())?;
        self.decompose()?.value(x)
    }

    /// `argmin_t λ f(t) + ½‖t - x‖²`
    pub fn prox(&self, lambda: f64, x: &Vector) -> Result<Vector> {
        check_step(lambda)?;
        x.check_dim(self.dim())?;
        self.decompose()?.prox(lambda, x)
    }

    /// Closure of the domain, `None` when it is the whole space.
    pub fn domain_set(&self) -> Option<ConvexSet> {
        match self {
            ConvexFn::Indicator(set) => Some(set.clone()),
            ConvexFn::Translate { shift, inner } => inner.domain_set().map(|s| s.translate(shift)),
            ConvexFn::Sum(terms) => terms.iter().find_map(ConvexFn::domain_set),
            _ => None,
        }
    }

    /// Element of least norm in `∂f(x)`.
    pub fn least_norm_subgradient(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim())?;
        let dec = self.decompose()?;
        let v = dec.smooth_gradient(x);
        match &dec.nonsmooth {
            None => Ok(v),
            Some((NonSmooth::L1(w), shift)) => {
                let u = x - shift;
                Ok(Vector::from_raw(
                    (0..x.dim())
                        .map(|i| {
                            if u[i] != 0.0 {
                                v[i] + w[i] * u[i].signum()
                            } else {
                                v[i] - v[i].clamp(-w[i], w[i])
                            }
                        })
                        .collect(),
                ))
            }
            Some((NonSmooth::Indicator(set), shift)) => {
                let u = x - shift;
                let n = set.project_onto_normal_cone(&u, &v.scale(-1.0))?;
                Ok(&v + &n)
            }
        }
    }

    /// The gradient when `∂f(x)` is a singleton.
    pub fn single_valued_gradient(&self, x: &Vector) -> Result<Vector> {
        use super::set::Position;
        x.check_dim(self.dim())?;
        let dec = self.decompose()?;
        let v = dec.smooth_gradient(x);
        match &dec.nonsmooth {
            None => Ok(v),
            Some((NonSmooth::L1(w), shift)) => {
                let u = x - shift;
                if (0..x.dim()).any(|i| u[i] == 0.0 && w[i] > 0.0) {
                    return Err(Error::SetValuedAt);
                }
                Ok(v.zip_map(&u.zip_map(w, |ui, wi| wi * ui.signum()), |a, b| a + b))
            }
            Some((NonSmooth::Indicator(set), shift)) => match set.position(&(x - shift))? {
                Position::Interior => Ok(v),
                Position::Boundary => Err(Error::SetValuedAt),
                Position::Outside => Err(Error::DomainError),
            },
        }
    }

    /// `(Q, b, c)` with `f(x) = ½xᵀQx + bᵀx + c` when `f` is smooth quadratic.
    pub fn as_quadratic(&self) -> Option<(Matrix, Vector, f64)> {
        let dec = self.decompose().ok()?;
        if dec.nonsmooth.is_some() {
            return None;
        }
        let d = self.dim();
        Some((dec.q.unwrap_or_else(|| Matrix::zeros(d, d)), dec.b, dec.constant))
    }
}

impl Decomposed {
    fn smooth_gradient(&self, x: &Vector) -> Vector {
        match &self.q {
            Some(q) => &q.mul_vec(x) + &self.b,
            None => self.b.clone(),
        }
    }

    fn value(&self, x: &Vector) -> Result<f64> {
        let mut val = self.b.dot(x) + self.constant;
        if let Some(q) = &self.q {
            val += 0.5 * q.mul_vec(x).dot(x);
        }
        match &self.nonsmooth {
            None => {}
            Some((NonSmooth::L1(w), shift)) => {
                val += (x - shift).iter().zip(w.iter()).map(|(u, w)| w * u.abs()).sum::<f64>();
            }
            Some((NonSmooth::Indicator(set), shift)) if !set.contains(&(x - shift), MEMBERSHIP_TOL) => {
                return Ok(f64::INFINITY);
            }
            Some((NonSmooth::Indicator(_), _)) => {}
        }
        Ok(val)
    }

    fn check_prox_form(&self) -> Result<()> {
        let Some((g, _)) = &self.nonsmooth else { return Ok(()) };
        let Some(q) = &self.q else { return Ok(()) };
        let ok = match g {
            NonSmooth::L1(_) | NonSmooth::Indicator(ConvexSet::Box { .. }) => q.is_diagonal(),
            NonSmooth::Indicator(_) => q.as_scalar().is_some(),
        };
        if ok { Ok(()) } else { Err(Error::UnsupportedComposite) }
    }

    fn prox(&self, lambda: f64, x: &Vector) -> Result<Vector> {
        self.check_prox_form()?;
        let d = x.dim();
        let rhs = x.axpy(-lambda, &self.b);
        let out = match &self.nonsmooth {
            None => match &self.q {
                Some(q) => q.shifted_identity(lambda).solve(&rhs)?,
                None => rhs,
            },
            Some((g, shift)) => {
                let curvature: Vec<f64> = match &self.q {
                    Some(q) => q.diagonal(),
                    None => alloc::vec![0.0; d],
                };
                match g {
                    NonSmooth::L1(w) => {
                        // u = t - shift solves (1 + λq)u + λw ∂|u| ∋ rhs - (1 + λq) shift
                        Vector::from_raw(
                            (0..d)
                                .map(|i| {
                                    let denom = 1.0 + lambda * curvature[i];
                                    let z = rhs[i] / denom - shift[i];
                                    shift[i] + soft_threshold(z, lambda * w[i] / denom)
                                })
                                .collect(),
                        )
                    }
                    NonSmooth::Indicator(ConvexSet::Box { lower, upper }) => Vector::from_raw(
                        (0..d)
                            .map(|i| {
                                let z = rhs[i] / (1.0 + lambda * curvature[i]);
                                z.max(lower[i] + shift[i]).min(upper[i] + shift[i])
                            })
                            .collect(),
                    ),
                    NonSmooth::Indicator(set) => {
                        let kappa = curvature.first().copied().unwrap_or(0.0);
                        let z = rhs.scale(1.0 / (1.0 + lambda * kappa));
                        let moved = &z - shift;
                        let p = match set {
                            ConvexSet::Intersection(_) => {
                                crate::problems::dykstra::project_exact(set, &moved)?
                            }
                            _ => set.project(&moved)?,
                        };
                        &p + shift
                    }
                }
            }
        };
        out.ensure_finite("proximity operator")
    }
}

/// `sign(x) max(|x| - t, 0)`; exact zero at `|x| = t`.
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

pub(crate) fn check_step(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument("step size must be positive and finite".into()))
    }
}
