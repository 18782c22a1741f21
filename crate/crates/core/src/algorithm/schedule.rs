use crate::error::{Error, Result};
use crate::math::powf;

/// Power-law step sizes `λ_n = λ0 (n + n0 + 1)^(-γ)`, `n = 0, 1, 2, …`.
///
/// `γ ∈ (½, 1]` is exactly the range where the sequence is square-summable
/// but not summable; anything else is rejected. The ratio `λ_n / λ_{n+1}`
/// tends to one for every admissible schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSchedule {
    lambda0: f64,
    gamma: f64,
    n0: u64,
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule { lambda0: 1.0, gamma: 0.75, n0: 0 }
    }
}

impl StepSchedule {
    pub fn new(lambda0: f64, gamma: f64, n0: u64) -> Result<Self> {
        if !(lambda0.is_finite() && lambda0 > 0.0) {
            return Err(Error::InvalidArgument("lambda0 must be positive and finite".into()));
        }
        if !(gamma > 0.5 && gamma <= 1.0) {
            return Err(Error::InvalidSchedule { gamma });
        }
        Ok(StepSchedule { lambda0, gamma, n0 })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn step(&self, n: u64) -> f64 {
        self.lambda0 * powf((n + self.n0 + 1) as f64, -self.gamma)
    }

    /// `Σ_{n < count} λ_n`
    pub fn partial_sum(&self, count: u64) -> f64 {
        (0..count).map(|n| self.step(n)).sum()
    }

    /// `Σ_{n < count} λ_n²`
    pub fn partial_sum_sq(&self, count: u64) -> f64 {
        (0..count).map(|n| self.step(n) * self.step(n)).sum()
    }

    /// Upper bound on the tail `Σ_{n >= count} λ_n²`, from the integral
    /// test: `λ0² (count + n0)^(1-2γ) / (2γ - 1)`.
    pub fn tail_sq_bound(&self, count: u64) -> f64 {
        let e = 2.0 * self.gamma;
        self.lambda0 * self.lambda0 * powf((count + self.n0).max(1) as f64, 1.0 - e) / (e - 1.0)
    }
}
