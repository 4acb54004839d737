//! Deterministic baseline policies, plus one seeded random policy.

use num_rational::Ratio;
use num_traits::{FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::{Agent, AgentError, AgentSpec};
use crate::memory::MemoryWindow;
use crate::model::{Action, EnvId, Observation};
use crate::money::Money;
use crate::oracles::newsvendor_q_star;
use crate::process::Distribution;
use crate::rng::{stream_rng, streams};

pub struct ScriptedAgent {
    spec: AgentSpec,
    rng: ChaCha20Rng,
    decisions: usize,
}

impl ScriptedAgent {
    pub fn new(spec: AgentSpec, role: &str, seed: u64) -> Result<Self, AgentError> {
        if spec.is_external() {
            return Err(AgentError::Unsupported("external agents are not scripted".into()));
        }
        spec.validate().map_err(AgentError::Unsupported)?;
        Ok(ScriptedAgent { spec, rng: stream_rng(seed, &streams::agent(role)), decisions: 0 })
    }

    fn quantity(&mut self, obs: &Observation) -> Result<i64, AgentError> {
        Ok(match &self.spec {
            AgentSpec::OptimalNvp => nvp_optimum(obs)?,
            AgentSpec::ExpostReplay { orders } => *orders.get(self.decisions).ok_or_else(|| {
                AgentError::Unsupported(format!("replay has no order for decision {}", self.decisions + 1))
            })?,
            AgentSpec::BaseStock { level } => (level - inventory_position(obs)).max(0),
            AgentSpec::OrderUpTo { cover } => {
                let cover = cover.map_or_else(|| default_cover(obs), i64::from);
                let forecast = obs.last_demand.or_else(|| mean_demand(obs)).unwrap_or(0);
                (cover * forecast - inventory_position(obs)).max(0)
            }
            AgentSpec::MeanAnchored { alpha } => anchored_order(obs, *alpha)?,
            AgentSpec::DemandChaser => obs.last_demand.or_else(|| mean_demand(obs)).unwrap_or(0),
            AgentSpec::Constant { quantity } => *quantity,
            AgentSpec::Random { low, high } => self.rng.random_range(*low..=*high),
            AgentSpec::External { .. } => unreachable!("rejected at construction"),
        })
    }
}

impl Agent for ScriptedAgent {
    fn decide(&mut self, obs: &Observation, _memory: &MemoryWindow) -> Result<Action, AgentError> {
        let q = self.quantity(obs)?;
        self.decisions += 1;
        Ok(Action::primary(&obs.channels, q))
    }
}

/// On-hand minus backlog plus everything on order.
pub fn inventory_position(obs: &Observation) -> i64 {
    obs.on_hand - obs.backlog + obs.on_order
}

fn default_cover(obs: &Observation) -> i64 {
    let lead = obs
        .lead_times
        .values()
        .max()
        .map(|l| *l as i64)
        .or_else(|| obs.lead_time.as_ref().and_then(Distribution::mean).map(|m| m.ceil() as i64))
        .unwrap_or(1);
    lead + 1
}

fn mean_demand(obs: &Observation) -> Option<i64> {
    obs.demand.as_ref().and_then(Distribution::mean).map(|m| m.round() as i64)
}

fn nvp_prices(obs: &Observation) -> Result<(Money, Money, &Distribution), AgentError> {
    let missing = || AgentError::Unsupported(format!("policy needs newsvendor prices, got {} observation", obs.env));
    if obs.env != EnvId::Nvp {
        return Err(missing());
    }
    let r = *obs.costs.get("revenue").ok_or_else(missing)?;
    let c = *obs.costs.get("unit_cost").ok_or_else(missing)?;
    let dist = obs.demand.as_ref().ok_or_else(missing)?;
    Ok((r, c, dist))
}

fn nvp_optimum(obs: &Observation) -> Result<i64, AgentError> {
    let (r, c, dist) = nvp_prices(obs)?;
    newsvendor_q_star(dist, r - c, c).map_err(|e| AgentError::Unsupported(e.to_string()))
}

/// Exact mean of the demand distribution as a rational.
pub fn rational_mean(dist: &Distribution) -> Option<Ratio<i64>> {
    match dist {
        Distribution::UniformInt { low, high } => Some(Ratio::new(low + high, 2)),
        Distribution::Constant { value } => Some(Ratio::from_integer(*value)),
        Distribution::Trace { values } => {
            Some(Ratio::new(values.iter().sum(), values.len() as i64))
        }
        Distribution::Poisson { lambda } => Ratio::approximate_float(*lambda),
        Distribution::NormalTruncated { .. } => None,
    }
}

/// Target `mu + (1 - alpha) (q* - mu)`, rounded by error diffusion over
/// periods so that the mean over the first `t` rounds is within `1/t` of the
/// target and exact whenever `t * target` is an integer.
fn anchored_order(obs: &Observation, alpha: f64) -> Result<i64, AgentError> {
    let (_, _, dist) = nvp_prices(obs)?;
    let q_star = Ratio::from_integer(nvp_optimum(obs)?);
    let mu = rational_mean(dist)
        .ok_or_else(|| AgentError::Unsupported(format!("no exact mean for {}", dist.kind_name())))?;
    let alpha = Ratio::<i64>::from_f64(alpha)
        .ok_or_else(|| AgentError::Unsupported(format!("alpha {alpha} is not representable")))?;
    let target = mu + (Ratio::from_integer(1) - alpha) * (q_star - mu);
    let t = Ratio::from_integer(obs.period as i64);
    let q = (t * target).floor() - ((t - Ratio::from_integer(1)) * target).floor();
    q.to_integer().to_i64().ok_or_else(|| AgentError::Unsupported("anchored order overflow".into()))
}
