//! Integer-valued stochastic processes for demand and vendor lead times.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution as _, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::rng::stream_rng;

const NORMAL_RESAMPLE_LIMIT: usize = 1000;

/// Generator family and parameters, in demand units or periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    /// Discrete uniform on `low..=high`.
    UniformInt { low: i64, high: i64 },
    /// Normal rounded to the nearest integer, resampled until `>= min`.
    NormalTruncated {
        mean: f64,
        std_dev: f64,
        #[serde(default)]
        min: i64,
    },
    Poisson { lambda: f64 },
    Constant { value: i64 },
    /// Replays `values`; once exhausted the last value repeats.
    Trace { values: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProcessError {
    #[error("invalid parameters for {kind}: {reason}")]
    InvalidParams { kind: &'static str, reason: String },
    #[error("{kind} cannot be used as a lead time (support must be >= 1)")]
    NotALeadTime { kind: &'static str },
}

impl Distribution {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Distribution::UniformInt { .. } => "uniform_int",
            Distribution::NormalTruncated { .. } => "normal_truncated",
            Distribution::Poisson { .. } => "poisson",
            Distribution::Constant { .. } => "constant",
            Distribution::Trace { .. } => "trace",
        }
    }

    pub fn validate(&self) -> Result<(), ProcessError> {
        let bad = |reason: &str| ProcessError::InvalidParams {
            kind: self.kind_name(),
            reason: reason.to_string(),
        };
        match self {
            Distribution::UniformInt { low, high } => {
                if *low < 0 {
                    return Err(bad("low must be >= 0"));
                }
                if low > high {
                    return Err(bad("low must not exceed high"));
                }
            }
            Distribution::NormalTruncated { mean, std_dev, min } => {
                if !mean.is_finite() || !std_dev.is_finite() {
                    return Err(bad("mean and std_dev must be finite"));
                }
                if *std_dev < 0.0 {
                    return Err(bad("std_dev must be >= 0"));
                }
                if *min < 0 {
                    return Err(bad("min must be >= 0"));
                }
            }
            Distribution::Poisson { lambda } => {
                if !lambda.is_finite() || *lambda <= 0.0 {
                    return Err(bad("lambda must be a positive finite number"));
                }
            }
            Distribution::Constant { value } => {
                if *value < 0 {
                    return Err(bad("value must be >= 0"));
                }
            }
            Distribution::Trace { values } => {
                if values.is_empty() {
                    return Err(bad("trace must not be empty"));
                }
                if values.iter().any(|v| *v < 0) {
                    return Err(bad("trace values must be >= 0"));
                }
            }
        }
        Ok(())
    }

    /// Validation for lead-time processes: every sample must be >= 1.
    pub fn validate_lead_time(&self) -> Result<(), ProcessError> {
        self.validate()?;
        let ok = match self {
            Distribution::UniformInt { low, .. } => *low >= 1,
            Distribution::NormalTruncated { min, .. } => *min >= 1,
            Distribution::Poisson { .. } => false,
            Distribution::Constant { value } => *value >= 1,
            Distribution::Trace { values } => values.iter().all(|v| *v >= 1),
        };
        if ok {
            Ok(())
        } else {
            Err(ProcessError::NotALeadTime { kind: self.kind_name() })
        }
    }

    /// Analytic mean where one exists in closed form.
    pub fn mean(&self) -> Option<f64> {
        match self {
            Distribution::UniformInt { low, high } => Some((*low + *high) as f64 / 2.0),
            Distribution::Poisson { lambda } => Some(*lambda),
            Distribution::Constant { value } => Some(*value as f64),
            Distribution::Trace { values } => {
                Some(values.iter().sum::<i64>() as f64 / values.len() as f64)
            }
            Distribution::NormalTruncated { .. } => None,
        }
    }

    /// Short human-readable description, used in observation contexts.
    pub fn describe(&self) -> String {
        match self {
            Distribution::UniformInt { low, high } => {
                format!("uniformly distributed integers from {low} to {high}")
            }
            Distribution::NormalTruncated { mean, std_dev, min } => {
                format!("normally distributed with mean {mean} and standard deviation {std_dev}, at least {min}")
            }
            Distribution::Poisson { lambda } => format!("Poisson distributed with mean {lambda}"),
            Distribution::Constant { value } => format!("always {value}"),
            Distribution::Trace { values } => format!("the fixed sequence {values:?}"),
        }
    }
}

/// A distribution bound to a named random stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticProcess {
    pub dist: Distribution,
    pub stream_id: String,
}

impl StochasticProcess {
    pub fn new(dist: Distribution, stream_id: impl Into<String>) -> Self {
        StochasticProcess { dist, stream_id: stream_id.into() }
    }

    pub fn sampler(&self, seed: u64) -> Result<Sampler, ProcessError> {
        Sampler::new(self.dist.clone(), stream_rng(seed, &self.stream_id))
    }
}

/// Stateful draw sequence for one process.
#[derive(Debug, Clone)]
pub struct Sampler {
    dist: Distribution,
    rng: ChaCha20Rng,
    normal: Option<Normal<f64>>,
    poisson: Option<Poisson<f64>>,
    drawn: usize,
}

impl Sampler {
    fn new(dist: Distribution, rng: ChaCha20Rng) -> Result<Self, ProcessError> {
        dist.validate()?;
        let invalid = |e: String| ProcessError::InvalidParams { kind: dist.kind_name(), reason: e };
        let normal = match &dist {
            Distribution::NormalTruncated { mean, std_dev, .. } => {
                Some(Normal::new(*mean, *std_dev).map_err(|e| invalid(e.to_string()))?)
            }
            _ => None,
        };
        let poisson = match &dist {
            Distribution::Poisson { lambda } => {
                Some(Poisson::new(*lambda).map_err(|e| invalid(e.to_string()))?)
            }
            _ => None,
        };
        Ok(Sampler { dist, rng, normal, poisson, drawn: 0 })
    }

    pub fn next_value(&mut self) -> i64 {
        let idx = self.drawn;
        self.drawn += 1;
        match &self.dist {
            Distribution::UniformInt { low, high } => self.rng.random_range(*low..=*high),
            Distribution::NormalTruncated { min, .. } => {
                let normal = self.normal.expect("normal built at construction");
                for _ in 0..NORMAL_RESAMPLE_LIMIT {
                    let x = normal.sample(&mut self.rng).round();
                    if x >= *min as f64 {
                        return x as i64;
                    }
                }
                *min
            }
            Distribution::Poisson { .. } => {
                let poisson = self.poisson.expect("poisson built at construction");
                poisson.sample(&mut self.rng) as i64
            }
            Distribution::Constant { value } => *value,
            Distribution::Trace { values } => values[idx.min(values.len() - 1)],
        }
    }

    pub fn draws(&self) -> usize {
        self.drawn
    }
}

/// Draws `n` values of `process` under `seed`.
pub fn sample(process: &StochasticProcess, seed: u64, n: usize) -> Result<Vec<i64>, ProcessError> {
    let mut sampler = process.sampler(seed)?;
    Ok((0..n).map(|_| sampler.next_value()).collect())
}
