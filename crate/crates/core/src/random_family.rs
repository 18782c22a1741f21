//! Finitely supported random operator families and their sampling streams.
//!
//! A family is a list of operators `A(1,·), …, A(m,·)` on a common space
//! together with probabilities `w_i`. The mean operator is the weighted sum
//! `Σ w_i A(i,·)`; its zeros are what the stochastic iteration targets.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::operators::{ConvexSet, OperatorSpec};

/// Allowed deviation of `Σ w_i` from one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RandomFamily {
    members: Vec<OperatorSpec>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    dim: usize,
    common_domain: bool,
}

impl RandomFamily {
    pub fn new(members: Vec<OperatorSpec>, weights: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("family needs at least one member".into()));
        }
        if weights.len() != members.len() {
            return Err(Error::InvalidWeights(alloc::format!(
                "{} weights for {} members",
                weights.len(),
                members.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidWeights("weights must be strictly positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(alloc::format!("weights sum to {total}, not 1")));
        }
        let dim = members[0].dim();
        for m in &members {
            m.validate()?;
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
            }
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        *cumulative.last_mut().expect("non-empty") = 1.0;
        let common_domain = members.iter().all(|m| m.domain_set().is_none());
        Ok(RandomFamily { members, weights, cumulative, dim, common_domain })
    }

    pub fn uniform(members: Vec<OperatorSpec>) -> Result<Self> {
        let m = members.len();
        let w = if m == 0 { 0.0 } else { 1.0 / m as f64 };
        let mut weights = alloc::vec![w; m];
        // absorb rounding so the sum is exactly representable as one
        if let Some(last) = weights.last_mut() {
            *last = 1.0 - w * (m - 1) as f64;
        }
        Self::new(members, weights)
    }

    pub fn members(&self) -> &[OperatorSpec] {
        &self.members
    }

    pub fn member(&self, index: usize) -> &OperatorSpec {
        &self.members[index]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when every member is defined on the whole space.
    pub fn has_common_domain(&self) -> bool {
        self.common_domain
    }

    /// Essential intersection of the member domains; `None` when it is the
    /// whole space.
    pub fn domain(&self) -> Option<ConvexSet> {
        let sets: Vec<ConvexSet> = self
            .members
            .iter()
            .filter_map(OperatorSpec::domain_set)
            .flat_map(|s| s.members().into_iter().cloned().collect::<Vec<_>>())
            .collect();
        match sets.len() {
            0 => None,
            1 => sets.into_iter().next(),
            _ => Some(ConvexSet::Intersection(sets)),
        }
    }

    /// Draws a member index (zero-based) with probability `w_i`, consuming
    /// exactly one uniform variate.
    pub fn sample(&self, stream: &mut SampleStream) -> usize {
        let u = stream.next_uniform();
        self.cumulative.iter().position(|&c| u < c).unwrap_or(self.members.len() - 1)
    }

    /// `Σ w_i A(i, x)` when every member is single-valued at `x`.
    pub fn mean_apply(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim)?;
        let mut acc = Vector::zeros(self.dim);
        for (m, w) in self.members.iter().zip(&self.weights) {
            acc = acc.axpy(*w, &m.apply(x)?);
        }
        Ok(acc)
    }

    /// Whether `x` is, up to `tol`, a fixed point of every resolvent, i.e.
    /// a common zero of all members.
    pub fn common_zero_check(&self, x: &Vector, tol: f64) -> bool {
        if x.dim() != self.dim {
            return false;
        }
        self.members
            .iter()
            .all(|m| matches!(m.yosida(1.0, x), Ok(y) if y.norm() <= tol))
    }

    /// Square-integrable selection `φ(i) = A(i, x*)` at a zero of the mean
    /// operator, for families that are single-valued there.
    pub fn zero_certificate(&self, x_star: &Vector) -> Result<ZeroCertificate> {
        let selection: Vec<Vector> =
            self.members.iter().map(|m| m.apply(x_star)).collect::<Result<_>>()?;
        let mut mean = Vector::zeros(self.dim);
        let mut second_moment = 0.0;
        for (phi, w) in selection.iter().zip(&self.weights) {
            mean = mean.axpy(*w, phi);
            second_moment += w * phi.norm_sq();
        }
        Ok(ZeroCertificate { selection, mean_residual: mean.norm(), second_moment })
    }
}

/// Witness that `x*` is a zero of the mean operator with a square-summable
/// selection.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroCertificate {
    pub selection: Vec<Vector>,
    /// `‖Σ w_i φ(i)‖`
    pub mean_residual: f64,
    /// `Σ w_i ‖φ(i)‖²`
    pub second_moment: f64,
}

/// Seeded source of member indices.
///
/// Backed by ChaCha8. Replica streams share the key derived from the master
/// seed and differ in the ChaCha stream id, so they never overlap.
#[derive(Clone, Debug)]
pub struct SampleStream {
    seed: u64,
    stream_id: u64,
    counter: u64,
    rng: ChaCha8Rng,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        Self::for_replica(seed, 0)
    }

    pub fn for_replica(master_seed: u64, replica: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(replica);
        SampleStream { seed: master_seed, stream_id: replica, counter: 0, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of draws consumed so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_uniform(&mut self) -> f64 {
        self.counter += 1;
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Free-function form of [`RandomFamily::sample`], returning zero-based
/// indices.
pub fn sample(family: &RandomFamily, stream: &mut SampleStream) -> usize {
    family.sample(stream)
}

pub fn mean_apply(family: &RandomFamily, x: &Vector) -> Result<Vector> {
    family.mean_apply(x)
}

pub fn common_zero_check(family: &RandomFamily, x: &Vector, tol: f64) -> bool {
    family.common_zero_check(x, tol)
}
