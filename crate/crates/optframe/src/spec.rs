//! Experiment specifications: a flat `key = value` settings layer shared by
//! config files and command-line flags, and the validated [`ExperimentSpec`]
//! built from it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use optframe_core::optimizer::CoordinateOrder;
use optframe_core::policy::PolicyKind;
use rand::Rng;
use thiserror::Error;

use crate::registry::{OptimizerKind, ProblemKind};

/// Every key accepted in a config file, in echo order. Flags use the same
/// names with a `--` prefix.
pub const KEYS: &[&str] = &[
    "problem",
    "optimizer",
    "lr",
    "batch",
    "iters",
    "seed",
    "reps",
    "x0",
    "out",
    "trace-every",
    "check-gradient",
    "timing",
    "dim",
    "k",
    "rows",
    "features",
    "data",
    "header",
    "policy",
    "memory",
    "restart-period",
    "restart-mult",
    "order",
    "temperature",
    "cooling",
    "moves",
    "move-scale",
    "objective-tolerance",
    "gradient-tolerance",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("unknown setting `{0}`")]
    UnknownKey(String),
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("missing required setting `{0}`")]
    Missing(&'static str),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("unknown problem `{name}`; known problems: {}", known.join(", "))]
    UnknownProblem { name: String, known: Vec<&'static str> },
    #[error("unknown optimizer `{name}`; known optimizers: {}", known.join(", "))]
    UnknownOptimizer { name: String, known: Vec<&'static str> },
    #[error("unknown update policy `{name}`; known policies: {}", known.join(", "))]
    UnknownPolicy { name: String, known: Vec<&'static str> },
}

/// Raw settings before validation. Later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are
    /// skipped; values may be wrapped in double quotes. Keys may use `_` in
    /// place of `-`.
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let mut out = Settings::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| SpecError::Syntax { line: i + 1, text: raw.to_string() })?;
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value);
            out.set(key.trim(), value)?;
        }
        Ok(out)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), SpecError> {
        let key = key.replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(SpecError::UnknownKey(key));
        }
        self.0.insert(key, value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    /// Overrides `self` with every entry of `other`.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, SpecError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| SpecError::InvalidValue {
                    key: key.to_string(),
                    value: v.to_string(),
                    reason: e.to_string(),
                })
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool, SpecError> {
        Ok(self.parsed::<bool>(key)?.unwrap_or(false))
    }
}

/// How the starting point is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Initializer {
    Zeros,
    Ones,
    /// Uniform in `[lo, hi]` per coordinate, drawn from the repetition seed.
    Uniform { lo: f64, hi: f64 },
    Explicit(Vec<f64>),
}

impl Initializer {
    pub fn point(&self, dim: usize, seed: u64) -> Vec<f64> {
        match self {
            Initializer::Zeros => vec![0.0; dim],
            Initializer::Ones => vec![1.0; dim],
            Initializer::Uniform { lo, hi } => {
                let mut rng = optframe_core::seeded_rng(seed);
                (0..dim).map(|_| rng.random_range(*lo..=*hi)).collect()
            }
            Initializer::Explicit(v) => v.clone(),
        }
    }
}

impl fmt::Display for Initializer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Initializer::Zeros => f.write_str("zeros"),
            Initializer::Ones => f.write_str("ones"),
            Initializer::Uniform { lo, hi } => write!(f, "uniform({lo:?},{hi:?})"),
            Initializer::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for Initializer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let number = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", t.trim()));
        match s {
            "zeros" => return Ok(Initializer::Zeros),
            "ones" => return Ok(Initializer::Ones),
            _ => {}
        }
        if let Some(args) = s.strip_prefix("uniform(").and_then(|r| r.strip_suffix(')')) {
            let (lo, hi) = args.split_once(',').ok_or("uniform needs two bounds: uniform(lo,hi)")?;
            let (lo, hi) = (number(lo)?, number(hi)?);
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(format!("uniform bounds must be finite with lo < hi, got ({lo}, {hi})"));
            }
            return Ok(Initializer::Uniform { lo, hi });
        }
        let values = s.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err("entries must be finite".into());
        }
        Ok(Initializer::Explicit(values))
    }
}

/// A fully resolved and validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: ProblemKind,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub batch: usize,
    pub iters: u64,
    pub seed: u64,
    pub reps: u32,
    pub x0: Initializer,
    pub out: PathBuf,
    /// `0` disables extra per-step trace rows.
    pub trace_every: u64,
    pub check_gradient: bool,
    /// Record wall time in traces. Off by default so traces are reproducible.
    pub timing: bool,
    pub dim: usize,
    pub k: usize,
    pub rows: usize,
    pub features: usize,
    pub data: Option<PathBuf>,
    pub header: bool,
    pub policy: PolicyKind,
    pub memory: usize,
    /// `0` disables warm restarts.
    pub restart_period: f64,
    pub restart_mult: f64,
    pub order: CoordinateOrder,
    pub temperature: f64,
    pub cooling: f64,
    pub moves: u64,
    pub move_scale: f64,
    pub objective_tolerance: f64,
    pub gradient_tolerance: f64,
}

fn invalid(key: &str, value: impl fmt::Display, reason: &str) -> SpecError {
    SpecError::InvalidValue { key: key.to_string(), value: value.to_string(), reason: reason.to_string() }
}

impl ExperimentSpec {
    /// Resolves defaults and validates every setting.
    pub fn from_settings(s: &Settings) -> Result<Self, SpecError> {
        let problem: ProblemKind = s.get("problem").ok_or(SpecError::Missing("problem"))?.parse()?;
        let optimizer: OptimizerKind = s.get("optimizer").ok_or(SpecError::Missing("optimizer"))?.parse()?;
        let policy = match s.get("policy") {
            Some(name) => name.parse::<PolicyKind>().map_err(|_| SpecError::UnknownPolicy {
                name: name.to_string(),
                known: PolicyKind::ALL.iter().map(|p| p.name()).collect(),
            })?,
            None => PolicyKind::Vanilla,
        };
        let order = match s.get("order") {
            Some(v) => v.parse::<CoordinateOrder>().map_err(|e| invalid("order", v, &e.to_string()))?,
            None => CoordinateOrder::Cyclic,
        };

        let spec = ExperimentSpec {
            problem,
            optimizer,
            lr: s.parsed("lr")?.unwrap_or(optimizer.default_step_size()),
            batch: s.parsed("batch")?.unwrap_or(1),
            iters: s.parsed("iters")?.unwrap_or(optimizer.default_iterations()),
            seed: s.parsed("seed")?.unwrap_or(0),
            reps: s.parsed("reps")?.unwrap_or(1),
            x0: s.parsed("x0")?.unwrap_or(Initializer::Zeros),
            out: s.parsed("out")?.unwrap_or_else(|| PathBuf::from("optframe-out")),
            trace_every: s.parsed("trace-every")?.unwrap_or(0),
            check_gradient: s.flag("check-gradient")?,
            timing: s.flag("timing")?,
            dim: s.parsed("dim")?.unwrap_or(problem.default_dimension()),
            k: s.parsed("k")?.unwrap_or(2),
            rows: s.parsed("rows")?.unwrap_or(100),
            features: s.parsed("features")?.unwrap_or(3),
            data: s.parsed("data")?,
            header: s.flag("header")?,
            policy,
            memory: s.parsed("memory")?.unwrap_or(10),
            restart_period: s.parsed("restart-period")?.unwrap_or(0.0),
            restart_mult: s.parsed("restart-mult")?.unwrap_or(1.0),
            order,
            temperature: s.parsed("temperature")?.unwrap_or(10.0),
            cooling: s.parsed("cooling")?.unwrap_or(0.95),
            moves: s.parsed("moves")?.unwrap_or(50),
            move_scale: s.parsed("move-scale")?.unwrap_or(0.5),
            objective_tolerance: s.parsed("objective-tolerance")?.unwrap_or(1e-10),
            gradient_tolerance: s.parsed("gradient-tolerance")?.unwrap_or(1e-9),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), SpecError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, v, "must be positive and finite"))
            }
        };
        let at_least_one = |key: &str, v: u64| if v >= 1 { Ok(()) } else { Err(invalid(key, v, "must be at least 1")) };
        positive("lr", self.lr)?;
        at_least_one("batch", self.batch as u64)?;
        at_least_one("iters", self.iters)?;
        at_least_one("reps", self.reps as u64)?;
        at_least_one("dim", self.dim as u64)?;
        at_least_one("k", self.k as u64)?;
        at_least_one("rows", self.rows as u64)?;
        at_least_one("features", self.features as u64)?;
        at_least_one("memory", self.memory as u64)?;
        at_least_one("moves", self.moves)?;
        positive("temperature", self.temperature)?;
        positive("move-scale", self.move_scale)?;
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(invalid("cooling", self.cooling, "must lie in (0, 1)"));
        }
        if !(self.restart_period >= 0.0 && self.restart_period.is_finite()) {
            return Err(invalid("restart-period", self.restart_period, "must be 0 (off) or positive"));
        }
        if !(self.restart_mult >= 1.0 && self.restart_mult.is_finite()) {
            return Err(invalid("restart-mult", self.restart_mult, "must be at least 1"));
        }
        for (key, v) in [("objective-tolerance", self.objective_tolerance), ("gradient-tolerance", self.gradient_tolerance)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(key, v, "must be non-negative"));
            }
        }
        if let Some(fixed) = self.problem.fixed_dimension() {
            if self.dim != fixed {
                return Err(invalid("dim", self.dim, &format!("{} has dimension {fixed}", self.problem)));
            }
        }
        if let Initializer::Explicit(v) = &self.x0 {
            if v.len() != self.dimension_hint() {
                return Err(invalid(
                    "x0",
                    &self.x0,
                    &format!("expected {} entries for {}", self.dimension_hint(), self.problem),
                ));
            }
        }
        Ok(())
    }

    /// Parameter dimension implied by the spec. For logistic regression read
    /// from a file this is checked again once the data is loaded.
    pub fn dimension_hint(&self) -> usize {
        match self.problem {
            ProblemKind::LogisticRegression => self.features + 1,
            _ => self.dim,
        }
    }

    /// Seed used by repetition `rep`.
    pub fn rep_seed(&self, rep: u32) -> u64 {
        self.seed.wrapping_add(rep as u64)
    }

    /// The spec as `key = value` lines. Parsing it back yields the same spec.
    pub fn echo(&self) -> String {
        let mut lines = Vec::with_capacity(KEYS.len());
        let mut put = |k: &str, v: String| lines.push(format!("{k} = {v}"));
        put("problem", self.problem.to_string());
        put("optimizer", self.optimizer.to_string());
        put("lr", format!("{:?}", self.lr));
        put("batch", self.batch.to_string());
        put("iters", self.iters.to_string());
        put("seed", self.seed.to_string());
        put("reps", self.reps.to_string());
        put("x0", self.x0.to_string());
        put("out", format!("\"{}\"", self.out.display()));
        put("trace-every", self.trace_every.to_string());
        put("check-gradient", self.check_gradient.to_string());
        put("timing", self.timing.to_string());
        put("dim", self.dim.to_string());
        put("k", self.k.to_string());
        put("rows", self.rows.to_string());
        put("features", self.features.to_string());
        if let Some(d) = &self.data {
            put("data", format!("\"{}\"", d.display()));
        }
        put("header", self.header.to_string());
        put("policy", self.policy.to_string());
        put("memory", self.memory.to_string());
        put("restart-period", format!("{:?}", self.restart_period));
        put("restart-mult", format!("{:?}", self.restart_mult));
        put("order", self.order.to_string());
        put("temperature", format!("{:?}", self.temperature));
        put("cooling", format!("{:?}", self.cooling));
        put("moves", self.moves.to_string());
        put("move-scale", format!("{:?}", self.move_scale));
        put("objective-tolerance", format!("{:?}", self.objective_tolerance));
        put("gradient-tolerance", format!("{:?}", self.gradient_tolerance));
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }
}
