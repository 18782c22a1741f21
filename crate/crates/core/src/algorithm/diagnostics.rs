use alloc::vec::Vec;

use super::sppa::RunReport;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::problems::dykstra::distance_to;
use crate::random_family::RandomFamily;

#[derive(Clone, Debug, PartialEq)]
pub struct FejerSeries {
    /// `‖x_n - x*‖` for `x_0` followed by every recorded row.
    pub distances: Vec<f64>,
    /// `Σ max(0, d_{k+1} - d_k)` over the last half of `distances`.
    pub tail_positive_variation: f64,
}

/// Distance of each recorded iterate to `x_star`.
pub fn fejer_diagnostic(report: &RunReport, x_star: &Vector) -> Result<FejerSeries> {
    let mut distances = Vec::with_capacity(report.rows.len() + 1);
    x_star.check_dim(report.summary.x0.dim())?;
    distances.push(report.summary.x0.distance(x_star));
    for row in &report.rows {
        distances.push(row.x.distance(x_star));
    }
    let tail = &distances[distances.len() / 2..];
    let tail_positive_variation = tail.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum();
    Ok(FejerSeries { distances, tail_positive_variation })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainDistanceSeries {
    /// `d(x_n, 𝒟)` for `n = 1..N`.
    pub distances: Vec<f64>,
    /// `Σ_{k<=n} d(x_k, 𝒟) / Σ_{k<=n} λ_k`.
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
}

/// Distances of the iterates to the common domain `𝒟 = ∩ dom A(s, ·)` and
/// the running ratio against the cumulative step size.
///
/// Needs every iterate, so the trace must have been recorded with stride 1.
/// A family without domain restrictions gives all zeros.
pub fn domain_distance_diagnostic(report: &RunReport, family: &RandomFamily) -> Result<DomainDistanceSeries> {
    if report.summary.stride != 1 {
        return Err(Error::InvalidArgument(
            "domain distance diagnostic needs a trace recorded at stride 1".into(),
        ));
    }
    let domain = family.domain();
    let mut distances = Vec::with_capacity(report.rows.len());
    let mut ratios = Vec::with_capacity(report.rows.len());
    let (mut dist_sum, mut lambda_sum, mut sup_ratio) = (0.0, 0.0, 0.0_f64);
    for row in &report.rows {
        row.x.check_dim(family.dim())?;
        let d = match &domain {
            Some(set) => distance_to(set, &row.x).map_err(|e| match e {
                Error::NoConvergence { .. } => Error::UnsupportedSet,
                other => other,
            })?,
            None => 0.0,
        };
        dist_sum += d;
        lambda_sum += row.lambda;
        let ratio = dist_sum / lambda_sum;
        sup_ratio = sup_ratio.max(ratio);
        distances.push(d);
        ratios.push(ratio);
    }
    Ok(DomainDistanceSeries { distances, ratios, sup_ratio })
}
