//! Experiment configuration: a versioned JSON document describing the
//! problem, the step schedule and the replica layout.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sppa_core::algorithm::AUTO_TRACE_ROWS;
use sppa_core::problems::{
    build_constrained_program, build_custom, build_feasibility, build_saddle, build_strongly_monotone,
};
use sppa_core::{
    ConvexFn, ConvexSet, Error as CoreError, Matrix, OperatorSpec, ProblemInstance, RandomFamily, StepSchedule,
    TraceStride, Vector,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, message: impl ToString) -> Self {
        ConfigError::Invalid { field: field.into(), message: message.to_string() }
    }

    /// The offending field, when the error is tied to one.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub problem: ProblemConfig,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    pub iterations: u64,
    #[serde(default = "one")]
    pub replicas: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub trace_stride: StrideConfig,
    /// Worker threads; machine parallelism when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Leading iterates left out of an auxiliary average.
    #[serde(default)]
    pub burn_in: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> u64 {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub lambda0: f64,
    pub gamma: f64,
    #[serde(default)]
    pub n0: u64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        let s = StepSchedule::default();
        ScheduleConfig { lambda0: s.lambda0(), gamma: s.gamma(), n0: s.n0() }
    }
}

/// `"auto"` or a positive integer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StrideConfig {
    #[default]
    #[serde(with = "auto_tag")]
    Auto,
    Every(usize),
}

mod auto_tag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let tag = String::deserialize(d)?;
        if tag == "auto" {
            Ok(())
        } else {
            Err(serde::de::Error::custom(format!("expected \"auto\" or an integer, found {tag:?}")))
        }
    }
}

/// File names inside the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Replica `r` writes `{trace_prefix}_{r}.csv`.
    pub trace_prefix: String,
    pub summary: String,
    /// Certified reference solution and run metadata.
    pub solution: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { trace_prefix: "trace".into(), summary: "summary.csv".into(), solution: "solution.json".into() }
    }
}

impl OutputConfig {
    pub fn trace_file(&self, replica: u64) -> String {
        format!("{}_{replica}.csv", self.trace_prefix)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Random projections; uniform weights when `weights` is absent.
    Feasibility {
        sets: Vec<SetConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    ConstrainedProgram { functions: Vec<WeightedFunction>, sets: Vec<WeightedSet>, p0: f64 },
    Saddle { members: Vec<SaddleMember> },
    StronglyMonotone { members: Vec<AffineMember> },
    Custom {
        members: Vec<WeightedOperator>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        solution: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedFunction {
    pub function: FunctionConfig,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedSet {
    pub set: SetConfig,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedOperator {
    pub operator: OperatorConfig,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaddleMember {
    pub p: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
    pub k: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineMember {
    pub m: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetConfig {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Halfspace { normal: Vec<f64>, offset: f64 },
    Hyperplane { normal: Vec<f64>, offset: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    Intersection { members: Vec<SetConfig> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionConfig {
    /// `½ xᵀQx + bᵀx`
    Quadratic { q: Vec<Vec<f64>>, b: Vec<f64> },
    WeightedL1 { weights: Vec<f64> },
    Linear { b: Vec<f64> },
    Indicator { set: SetConfig },
    /// `x ↦ inner(x - shift)`
    Translate { shift: Vec<f64>, inner: Box<FunctionConfig> },
    Sum { terms: Vec<FunctionConfig> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorConfig {
    Affine { m: Vec<Vec<f64>>, b: Vec<f64> },
    Rotation2d,
    Subdifferential { function: FunctionConfig },
    NormalCone { set: SetConfig },
    Saddle { p: Vec<Vec<f64>>, r: Vec<Vec<f64>>, k: Vec<Vec<f64>>, c: Vec<f64>, d: Vec<f64> },
    Scaled { alpha: f64, inner: Box<OperatorConfig> },
}

type Checked<T> = Result<T, ConfigError>;

fn vector(field: &str, coords: &[f64]) -> Checked<Vector> {
    Vector::from_slice(coords).map_err(|e| ConfigError::invalid(field, e))
}

fn matrix(field: &str, rows: &[Vec<f64>]) -> Checked<Matrix> {
    Matrix::from_rows(rows).map_err(|e| ConfigError::invalid(field, e))
}

fn at<T>(field: &str, r: sppa_core::Result<T>) -> Checked<T> {
    r.map_err(|e| ConfigError::invalid(field, e))
}

impl SetConfig {
    pub fn build(&self, field: &str) -> Checked<ConvexSet> {
        let f = |name: &str| format!("{field}.{name}");
        match self {
            SetConfig::Box { lower, upper } => {
                at(field, ConvexSet::boxed(vector(&f("lower"), lower)?, vector(&f("upper"), upper)?))
            }
            SetConfig::Halfspace { normal, offset } => {
                at(field, ConvexSet::halfspace(vector(&f("normal"), normal)?, *offset))
            }
            SetConfig::Hyperplane { normal, offset } => {
                at(field, ConvexSet::hyperplane(vector(&f("normal"), normal)?, *offset))
            }
            SetConfig::Ball { center, radius } => at(field, ConvexSet::ball(vector(&f("center"), center)?, *radius)),
            SetConfig::Intersection { members } => {
                let sets = members
                    .iter()
                    .enumerate()
                    .map(|(i, m)| m.build(&f(&format!("members[{i}]"))))
                    .collect::<Checked<Vec<_>>>()?;
                at(field, ConvexSet::intersection(sets))
            }
        }
    }
}

impl FunctionConfig {
    pub fn build(&self, field: &str) -> Checked<ConvexFn> {
        let f = |name: &str| format!("{field}.{name}");
        match self {
            FunctionConfig::Quadratic { q, b } => {
                at(field, ConvexFn::quadratic(matrix(&f("q"), q)?, vector(&f("b"), b)?))
            }
            FunctionConfig::WeightedL1 { weights } => at(field, ConvexFn::weighted_l1(vector(&f("weights"), weights)?)),
            FunctionConfig::Linear { b } => Ok(ConvexFn::linear(vector(&f("b"), b)?)),
            FunctionConfig::Indicator { set } => at(field, ConvexFn::indicator(set.build(&f("set"))?)),
            FunctionConfig::Translate { shift, inner } => {
                at(field, ConvexFn::translate(vector(&f("shift"), shift)?, inner.build(&f("inner"))?))
            }
            FunctionConfig::Sum { terms } => {
                let terms = terms
                    .iter()
                    .enumerate()
                    .map(|(i, t)| t.build(&f(&format!("terms[{i}]"))))
                    .collect::<Checked<Vec<_>>>()?;
                at(field, ConvexFn::sum(terms))
            }
        }
    }
}

fn saddle_operator(field: &str, p: &[Vec<f64>], r: &[Vec<f64>], k: &[Vec<f64>], c: &[f64], d: &[f64]) -> Checked<OperatorSpec> {
    let f = |name: &str| format!("{field}.{name}");
    at(
        field,
        OperatorSpec::saddle(
            matrix(&f("p"), p)?,
            matrix(&f("r"), r)?,
            matrix(&f("k"), k)?,
            vector(&f("c"), c)?,
            vector(&f("d"), d)?,
        ),
    )
}

impl OperatorConfig {
    pub fn build(&self, field: &str) -> Checked<OperatorSpec> {
        let f = |name: &str| format!("{field}.{name}");
        match self {
            OperatorConfig::Affine { m, b } => at(field, OperatorSpec::affine(matrix(&f("m"), m)?, vector(&f("b"), b)?)),
            OperatorConfig::Rotation2d => Ok(OperatorSpec::rotation_2d()),
            OperatorConfig::Subdifferential { function } => {
                at(field, OperatorSpec::subdifferential(function.build(&f("function"))?))
            }
            OperatorConfig::NormalCone { set } => at(field, OperatorSpec::normal_cone(set.build(&f("set"))?)),
            OperatorConfig::Saddle { p, r, k, c, d } => saddle_operator(field, p, r, k, c, d),
            OperatorConfig::Scaled { alpha, inner } => at(field, OperatorSpec::scaled(*alpha, inner.build(&f("inner"))?)),
        }
    }
}

/// Failure to turn a valid-looking problem description into an instance.
/// Oracle failures are kept apart so `verify` can report them as failed
/// certificates rather than malformed input.
#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("problem: {0}")]
    Oracle(CoreError),
}

fn is_oracle_failure(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::NoConvergence { .. }
            | CoreError::EmptyIntersection { .. }
            | CoreError::SingularMean
            | CoreError::CertificateFailed { .. }
            | CoreError::NotStronglyMonotone { .. }
    )
}

fn builder<T>(r: sppa_core::Result<T>) -> Result<T, BuildError> {
    r.map_err(|e| if is_oracle_failure(&e) { BuildError::Oracle(e) } else { ConfigError::invalid("problem", e).into() })
}

impl ProblemConfig {
    pub fn build(&self) -> Result<ProblemInstance, BuildError> {
        match self {
            ProblemConfig::Feasibility { sets, weights } => {
                let built = sets
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s.build(&format!("problem.sets[{i}]")))
                    .collect::<Checked<Vec<_>>>()?;
                let weights = weights.clone().unwrap_or_else(|| vec![1.0 / sets.len().max(1) as f64; sets.len()]);
                if weights.len() != sets.len() {
                    return Err(ConfigError::invalid(
                        "problem.weights",
                        format!("{} weights for {} sets", weights.len(), sets.len()),
                    )
                    .into());
                }
                builder(build_feasibility(built, weights))
            }
            ProblemConfig::ConstrainedProgram { functions, sets, p0 } => {
                let fs = functions
                    .iter()
                    .enumerate()
                    .map(|(i, wf)| Ok((wf.function.build(&format!("problem.functions[{i}].function"))?, wf.weight)))
                    .collect::<Checked<Vec<_>>>()?;
                let ss = sets
                    .iter()
                    .enumerate()
                    .map(|(i, ws)| Ok((ws.set.build(&format!("problem.sets[{i}].set"))?, ws.weight)))
                    .collect::<Checked<Vec<_>>>()?;
                if !(*p0 > 0.0 && *p0 < 1.0) {
                    return Err(ConfigError::invalid("problem.p0", format!("{p0} is not in (0, 1)")).into());
                }
                builder(build_constrained_program(fs, ss, *p0))
            }
            ProblemConfig::Saddle { members } => {
                let pool = members
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        Ok((saddle_operator(&format!("problem.members[{i}]"), &m.p, &m.r, &m.k, &m.c, &m.d)?, m.weight))
                    })
                    .collect::<Checked<Vec<_>>>()?;
                builder(build_saddle(pool))
            }
            ProblemConfig::StronglyMonotone { members } => {
                let pool = members
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let field = format!("problem.members[{i}]");
                        let op = at(
                            &field,
                            OperatorSpec::affine(matrix(&format!("{field}.m"), &m.m)?, vector(&format!("{field}.b"), &m.b)?),
                        )?;
                        Ok((op, m.weight))
                    })
                    .collect::<Checked<Vec<_>>>()?;
                builder(build_strongly_monotone(pool))
            }
            ProblemConfig::Custom { members, solution } => {
                let (ops, weights): (Vec<_>, Vec<_>) = members
                    .iter()
                    .enumerate()
                    .map(|(i, m)| Ok((m.operator.build(&format!("problem.members[{i}].operator"))?, m.weight)))
                    .collect::<Checked<Vec<_>>>()?
                    .into_iter()
                    .unzip();
                let family = RandomFamily::new(ops, weights).map_err(|e| ConfigError::invalid("problem.members", e))?;
                let solution = solution.as_deref().map(|s| vector("problem.solution", s)).transpose()?;
                builder(build_custom(family, solution))
            }
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Parses and validates.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that does not need the problem oracle.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::invalid(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        self.step_schedule()?;
        if self.iterations == 0 {
            return Err(ConfigError::invalid("iterations", "must be at least 1"));
        }
        if self.replicas == 0 {
            return Err(ConfigError::invalid("replicas", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(ConfigError::invalid("workers", "must be at least 1"));
        }
        if self.trace_stride == StrideConfig::Every(0) {
            return Err(ConfigError::invalid("trace_stride", "must be \"auto\" or a positive integer"));
        }
        vector("x0", &self.x0)?;
        for (field, name) in [
            ("output.trace_prefix", &self.output.trace_prefix),
            ("output.summary", &self.output.summary),
            ("output.solution", &self.output.solution),
        ] {
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(ConfigError::invalid(field, format!("{name:?} must be a plain file name")));
            }
        }
        Ok(())
    }

    pub fn step_schedule(&self) -> Result<StepSchedule, ConfigError> {
        let ScheduleConfig { lambda0, gamma, n0 } = self.schedule;
        StepSchedule::new(lambda0, gamma, n0).map_err(|e| match e {
            CoreError::InvalidSchedule { .. } => ConfigError::invalid(
                "schedule.gamma",
                format!(
                    "{gamma} is outside (1/2, 1]; step sizes must be square-summable but not summable (l2 minus l1): \
                     sum of lambda_n diverges and sum of lambda_n^2 converges only for gamma in (1/2, 1]"
                ),
            ),
            other => ConfigError::invalid("schedule.lambda0", other),
        })
    }

    pub fn start(&self) -> Result<Vector, ConfigError> {
        vector("x0", &self.x0)
    }

    /// Builds the problem and checks `x0` against its dimension.
    pub fn instance(&self) -> Result<ProblemInstance, BuildError> {
        let instance = self.problem.build()?;
        let x0 = self.start()?;
        if x0.dim() != instance.family.dim() {
            return Err(ConfigError::invalid(
                "x0",
                format!("dimension {} does not match the problem dimension {}", x0.dim(), instance.family.dim()),
            )
            .into());
        }
        Ok(instance)
    }

    pub fn stride(&self) -> TraceStride {
        match self.trace_stride {
            StrideConfig::Auto => TraceStride::Auto,
            StrideConfig::Every(s) => TraceStride::Every(s),
        }
    }

    /// Rows each trace file will hold.
    pub fn trace_rows(&self) -> u64 {
        let stride = match self.trace_stride {
            StrideConfig::Every(s) => s as u64,
            StrideConfig::Auto if self.iterations <= AUTO_TRACE_ROWS as u64 => 1,
            StrideConfig::Auto => self.iterations.div_ceil(AUTO_TRACE_ROWS as u64),
        };
        self.iterations.div_ceil(stride)
    }
}
