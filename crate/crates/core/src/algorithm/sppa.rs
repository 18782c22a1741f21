use alloc::vec::Vec;

use super::schedule::StepSchedule;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::operators::{ConvexSet, Objective};
use crate::problems::dykstra::distance_to;
use crate::random_family::{RandomFamily, SampleStream};

/// Rows kept when the stride is chosen automatically.
pub const AUTO_TRACE_ROWS: usize = 10_000;

/// Current iterate, its λ-weighted running average and the weight total.
#[derive(Clone, Debug, PartialEq)]
pub struct SppaState {
    pub n: u64,
    pub x: Vector,
    pub xbar: Vector,
    /// `Σ_{k<=n} λ_k` over the iterates folded into `xbar`.
    pub lambda_sum: f64,
}

impl SppaState {
    /// State at `n = 0`. The average is empty (`lambda_sum = 0`); the first
    /// step overwrites it.
    pub fn new(x0: Vector) -> Self {
        SppaState { n: 0, xbar: x0.clone(), x: x0, lambda_sum: 0.0 }
    }

    /// One stochastic proximal step in place. Returns the sampled member
    /// index (zero-based) and the step size used.
    pub fn advance(
        &mut self,
        family: &RandomFamily,
        schedule: &StepSchedule,
        stream: &mut SampleStream,
    ) -> Result<(usize, f64)> {
        self.x.check_dim(family.dim())?;
        let index = family.sample(stream);
        let lambda = schedule.step(self.n);
        let step = self.n + 1;
        let next = family.member(index).resolvent(lambda, &self.x).map_err(|e| match e {
            Error::NonFinite(_) => Error::NonFiniteIterate { step: step as usize },
            other => other,
        })?;
        let (xbar, lambda_sum) = update_average(&self.xbar, self.lambda_sum, &next, lambda);
        if !xbar.is_finite() || !lambda_sum.is_finite() {
            return Err(Error::NonFiniteIterate { step: step as usize });
        }
        self.x = next;
        self.xbar = xbar;
        self.lambda_sum = lambda_sum;
        self.n = step;
        Ok((index, lambda))
    }
}

/// `x_{n+1} = J_{λ_n}(ξ_{n+1}, x_n)` followed by the average update.
/// Consumes exactly one draw from `stream`.
pub fn sppa_step(
    state: &SppaState,
    family: &RandomFamily,
    schedule: &StepSchedule,
    stream: &mut SampleStream,
) -> Result<SppaState> {
    let mut next = state.clone();
    next.advance(family, schedule, stream)?;
    Ok(next)
}

/// Folds `x_new` with weight `lambda_new` into the running weighted mean.
///
/// Returns `(xbar + (λ/(Λ+λ)) (x_new - xbar), Λ + λ)`; with `Λ = 0` the
/// result is `x_new` itself.
pub fn update_average(xbar: &Vector, lambda_sum: f64, x_new: &Vector, lambda_new: f64) -> (Vector, f64) {
    let total = lambda_sum + lambda_new;
    if lambda_sum == 0.0 {
        return (x_new.clone(), total);
    }
    (xbar.axpy(lambda_new / total, &(x_new - xbar)), total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TraceStride {
    /// Every iterate up to 10⁴ iterations, otherwise every `⌈N/10⁴⌉`-th.
    #[default]
    Auto,
    Every(usize),
}

impl TraceStride {
    pub fn resolve(self, iterations: usize) -> usize {
        match self {
            TraceStride::Every(s) => s.max(1),
            TraceStride::Auto if iterations <= AUTO_TRACE_ROWS => 1,
            TraceStride::Auto => iterations.div_ceil(AUTO_TRACE_ROWS),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct DiagnosticsConfig {
    pub stride: TraceStride,
    /// Reference zero `x*`, when known.
    pub solution: Option<Vector>,
    /// Set for `d(x̄_n, X)`; defaults to the essential domain of the family.
    pub feasible_set: Option<ConvexSet>,
    /// Objective `F` evaluated at `x̄_n`.
    pub objective: Option<Objective>,
    /// Iterates `x_1..x_N` are dropped from an auxiliary average reported as
    /// [`RunSummary::burn_in_average`]; zero disables it.
    pub burn_in: u64,
}

/// One recorded iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub n: u64,
    /// Step size that produced `x_n` (`λ_{n-1}`); also its weight in `x̄_n`.
    pub lambda: f64,
    /// Zero-based index of the member sampled for this step.
    pub xi_index: usize,
    pub x: Vector,
    pub dist_to_solution: Option<f64>,
    /// `d(x_n, 𝒟)`; zero when every member has full domain.
    pub dist_to_domain: f64,
    pub dist_avg_to_feasible: Option<f64>,
    pub objective_avg: Option<f64>,
    pub norm_x: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub x0: Vector,
    pub final_x: Vector,
    pub final_xbar: Vector,
    pub burn_in_average: Option<Vector>,
    pub lambda_sum: f64,
    pub iterations: u64,
    pub stride: usize,
    pub seed: u64,
    pub stream_id: u64,
    pub solution: Option<Vector>,
    /// Wall-clock seconds; only measured with the `std` feature.
    pub wall_time_secs: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub rows: Vec<TraceRow>,
    pub summary: RunSummary,
}

impl RunReport {
    /// Equality of everything except the wall time.
    pub fn same_trajectory(&self, other: &RunReport) -> bool {
        let mut a = self.summary.clone();
        let mut b = other.summary.clone();
        a.wall_time_secs = None;
        b.wall_time_secs = None;
        a == b && self.rows == other.rows
    }
}

/// Runs `iterations` stochastic proximal steps from `x0`, recording the
/// trace at the configured stride (always including the last iterate).
///
/// Deterministic given the stream seed and the configuration. Fails with
/// `NonFiniteIterate` if an iterate overflows.
pub fn run(
    family: &RandomFamily,
    schedule: &StepSchedule,
    x0: Vector,
    iterations: u64,
    stream: &mut SampleStream,
    config: &DiagnosticsConfig,
) -> Result<RunReport> {
    #[cfg(feature = "std")]
    let started = std::time::Instant::now();

    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    x0.check_dim(family.dim())?;
    if let Some(s) = &config.solution {
        s.check_dim(family.dim())?;
    }
    let stride = config.stride.resolve(iterations as usize) as u64;
    let domain = family.domain();
    let feasible = config.feasible_set.clone().or_else(|| domain.clone());

    let mut state = SppaState::new(x0.clone());
    let mut burn = (config.burn_in > 0).then(|| SppaState::new(x0.clone()));
    let mut rows = Vec::with_capacity(iterations.div_ceil(stride) as usize);

    while state.n < iterations {
        let (xi_index, lambda) = state.advance(family, schedule, stream)?;
        if let Some(b) = burn.as_mut() {
            if state.n > config.burn_in {
                let (xbar, sum) = update_average(&b.xbar, b.lambda_sum, &state.x, lambda);
                b.xbar = xbar;
                b.lambda_sum = sum;
            }
        }
        if state.n.is_multiple_of(stride) || state.n == iterations {
            rows.push(record(&state, xi_index, lambda, config, domain.as_ref(), feasible.as_ref())?);
        }
    }

    #[cfg(feature = "std")]
    let wall_time_secs = Some(started.elapsed().as_secs_f64());
    #[cfg(not(feature = "std"))]
    let wall_time_secs = None;

    Ok(RunReport {
        rows,
        summary: RunSummary {
            x0,
            final_x: state.x,
            final_xbar: state.xbar,
            burn_in_average: burn.filter(|b| b.lambda_sum > 0.0).map(|b| b.xbar),
            lambda_sum: state.lambda_sum,
            iterations,
            stride: stride as usize,
            seed: stream.seed(),
            stream_id: stream.stream_id(),
            solution: config.solution.clone(),
            wall_time_secs,
        },
    })
}

fn record(
    state: &SppaState,
    xi_index: usize,
    lambda: f64,
    config: &DiagnosticsConfig,
    domain: Option<&ConvexSet>,
    feasible: Option<&ConvexSet>,
) -> Result<TraceRow> {
    let dist_to_domain = match domain {
        Some(set) => distance_to(set, &state.x)?,
        None => 0.0,
    };
    let dist_avg_to_feasible = feasible.map(|set| distance_to(set, &state.xbar)).transpose()?;
    let objective_avg = match &config.objective {
        Some(f) => Some(f.value(&state.xbar)?).filter(|v| v.is_finite()),
        None => None,
    };
    Ok(TraceRow {
        n: state.n,
        lambda,
        xi_index,
        dist_to_solution: config.solution.as_ref().map(|s| state.x.distance(s)),
        dist_to_domain,
        dist_avg_to_feasible,
        objective_avg,
        norm_x: state.x.norm(),
        x: state.x.clone(),
    })
}
