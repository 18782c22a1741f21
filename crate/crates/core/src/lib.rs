//! Stochastic proximal point iterations for random maximal monotone operators.
//!
//! The iteration draws an operator index `ξ` at random from a finite family
//! and applies the resolvent of the drawn operator with a vanishing step:
//!
//! ```text
//! x_{n+1} = (I + λ_n A(ξ_{n+1}, ·))^{-1} x_n
//! ```
//!
//! Step sizes are square-summable but not summable. The λ-weighted running
//! average of the iterates targets a zero of the mean operator
//! `Σ w_i A(i, ·)`, even in cases (a plane rotation, say) where the iterates
//! themselves never settle.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line runner and replica scheduling live in the companion `sppa` crate.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(a > b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod algorithm;
pub mod error;
pub mod linalg;
mod math;
pub mod operators;
pub mod problems;
pub mod random_family;

pub use algorithm::{
    domain_distance_diagnostic, fejer_diagnostic, run, sppa_step, update_average,
    DiagnosticsConfig, DomainDistanceSeries, FejerSeries, RunReport, RunSummary, SppaState,
    StepSchedule, TraceRow, TraceStride,
};
pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use operators::{ConvexFn, ConvexSet, Objective, OperatorSpec};
pub use problems::{dykstra_project, projected_gradient_oracle, ProblemInstance};
pub use random_family::{RandomFamily, SampleStream};
