//! The period loop: observe, decide, step, record.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agents::{Agent, AgentError, SessionInfo};
use crate::env::{EnvError, EnvParams, NodeRecord};
use crate::memory::MemoryWindow;
use crate::model::{Action, Framing, Observation};
use crate::money::Money;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub horizon: u32,
    pub seed: u64,
    pub env: EnvParams,
    #[serde(default)]
    pub memory_window: usize,
    #[serde(default)]
    pub info_sharing: bool,
    #[serde(default)]
    pub framing: Framing,
    #[serde(default)]
    pub cognitive_reflection: bool,
}

impl SimConfig {
    pub fn new(env: EnvParams, horizon: u32, seed: u64) -> Self {
        SimConfig {
            horizon,
            seed,
            env,
            memory_window: 0,
            info_sharing: false,
            framing: Framing::None,
            cognitive_reflection: false,
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        if self.horizon == 0 {
            return Err(KernelError::InvalidConfig("horizon must be >= 1".into()));
        }
        self.env.validate(self.horizon).map_err(|e| KernelError::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("period {period}, role `{role}`: {source}")]
    Protocol { period: u32, role: String, source: AgentError },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("environment has {expected} roles, got {got} agents")]
    AgentCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentStep {
    pub observation: Observation,
    /// `None` when the role had nothing to decide this period.
    pub action: Option<Action>,
    pub outcome: NodeRecord,
}

impl AgentStep {
    pub fn reward(&self) -> Money {
        -self.outcome.cost
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub period: u32,
    pub demands: Vec<i64>,
    pub agents: Vec<AgentStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub config: SimConfig,
    pub roles: Vec<String>,
    pub steps: Vec<StepRecord>,
    pub totals: BTreeMap<String, Money>,
}

impl EpisodeLog {
    /// Per-period total order of node `i`, zero where it did not decide.
    pub fn orders(&self, i: usize) -> Vec<i64> {
        self.steps.iter().map(|s| s.agents[i].outcome.ordered()).collect()
    }

    pub fn system_cost(&self) -> Money {
        self.totals.values().copied().sum()
    }

    /// Every logged cost recomputed from logged state, and totals re-summed.
    pub fn check_consistency(&self) -> Result<(), String> {
        if self.steps.len() != self.config.horizon as usize {
            return Err(format!("{} steps for horizon {}", self.steps.len(), self.config.horizon));
        }
        let mut sums = vec![Money::ZERO; self.roles.len()];
        for step in &self.steps {
            for (i, a) in step.agents.iter().enumerate() {
                let expected = self.config.env.recompute_cost(i, &a.outcome);
                if expected != a.outcome.cost {
                    return Err(format!(
                        "period {} role {}: logged cost {} but state implies {}",
                        step.period, a.outcome.role, a.outcome.cost, expected
                    ));
                }
                sums[i] += a.outcome.cost;
            }
        }
        for (role, sum) in self.roles.iter().zip(sums) {
            if self.totals.get(role) != Some(&sum) {
                return Err(format!("total for {role} does not match its steps"));
            }
        }
        Ok(())
    }
}

/// Runs one episode. Every agent observes period `t` before any period-`t`
/// action is applied, so moves are simultaneous.
pub fn run_episode(config: &SimConfig, agents: &mut [Box<dyn Agent>]) -> Result<EpisodeLog, KernelError> {
    config.validate()?;
    let mut env = config.env.build(config.horizon, config.seed)?;
    let roles = env.roles();
    if agents.len() != roles.len() {
        return Err(KernelError::AgentCount { expected: roles.len(), got: agents.len() });
    }
    let protocol = |period: u32, role: &str| {
        let role = role.to_string();
        move |source| KernelError::Protocol { period, role, source }
    };

    for (agent, role) in agents.iter_mut().zip(&roles) {
        let session = SessionInfo {
            env: config.env.id(),
            role: role.clone(),
            horizon: config.horizon,
            framing: config.framing,
            cognitive_reflection: config.cognitive_reflection,
            info_sharing: config.info_sharing,
            memory_window: config.memory_window,
        };
        agent.start(&session).map_err(protocol(0, role))?;
    }

    let mut memories = vec![MemoryWindow::new(config.memory_window); roles.len()];
    let mut steps = Vec::with_capacity(config.horizon as usize);
    for period in 1..=config.horizon {
        let observations: Vec<Observation> =
            (0..roles.len()).map(|i| env.observe(i, config.info_sharing)).collect();
        let mut actions = Vec::with_capacity(roles.len());
        for (i, obs) in observations.iter().enumerate() {
            if obs.channels.is_empty() {
                actions.push(None);
                continue;
            }
            let action = agents[i].decide(obs, &memories[i]).map_err(protocol(period, &roles[i]))?;
            action
                .validate(&obs.channels)
                .map_err(|e| protocol(period, &roles[i])(AgentError::InvalidAction(e)))?;
            actions.push(Some(action));
        }
        let outcome = env.step(&actions)?;
        let mut agent_steps = Vec::with_capacity(roles.len());
        for ((obs, action), (memory, rec)) in
            observations.into_iter().zip(actions).zip(memories.iter_mut().zip(outcome.nodes))
        {
            if let Some(a) = &action {
                memory.push(obs.clone(), a.clone());
            }
            agent_steps.push(AgentStep { observation: obs, action, outcome: rec });
        }
        steps.push(StepRecord { period, demands: outcome.demands, agents: agent_steps });
    }

    let mut totals = BTreeMap::new();
    for (i, role) in roles.iter().enumerate() {
        totals.insert(role.clone(), steps.iter().map(|s| s.agents[i].outcome.cost).sum());
    }
    for (agent, role) in agents.iter_mut().zip(&roles) {
        agent.finish(&totals).map_err(protocol(config.horizon, role))?;
    }
    Ok(EpisodeLog { config: config.clone(), roles, steps, totals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::AgentSpec;
    use crate::env::NvpParams;
    use crate::model::EnvId;

    fn scripted(config: &SimConfig, spec: AgentSpec) -> Vec<Box<dyn Agent>> {
        config.env.roles().iter().map(|r| spec.build(r, config.seed).unwrap()).collect()
    }

    #[test]
    fn nvp_optimal_twenty_rounds() {
        let config = SimConfig::new(EnvParams::default_for(EnvId::Nvp), 20, 7);
        let log = run_episode(&config, &mut scripted(&config, AgentSpec::OptimalNvp)).unwrap();
        assert_eq!(log.steps.len(), 20);
        assert!(log.steps.iter().all(|s| s.agents[0].action == Some(Action::single("order", 225))));
        log.check_consistency().unwrap();
    }

    #[test]
    fn single_period_constant_order_cost() {
        let params = NvpParams {
            demand: crate::process::Distribution::Constant { value: 60 },
            ..NvpParams::default()
        };
        let config = SimConfig::new(EnvParams::Nvp(params), 1, 0);
        let log = run_episode(&config, &mut scripted(&config, AgentSpec::Constant { quantity: 100 })).unwrap();
        assert_eq!(log.steps.len(), 1);
        // profit 12 * 60 - 3 * 100 = 420, logged as cost -420
        assert_eq!(log.totals["newsvendor"], Money::from_units(-420));
        assert_eq!(log.steps[0].agents[0].reward(), Money::from_units(420));
    }

    #[test]
    fn replay_is_identical() {
        for id in EnvId::ALL {
            let mut config = SimConfig::new(EnvParams::default_for(id), 15, 11);
            config.memory_window = 2;
            let run = || {
                let log = run_episode(&config, &mut scripted(&config, AgentSpec::Random { low: 0, high: 12 })).unwrap();
                serde_json::to_string(&log).unwrap()
            };
            assert_eq!(run(), run(), "{id}");
        }
    }

    #[test]
    fn all_envs_consistent() {
        for id in EnvId::ALL {
            let config = SimConfig::new(EnvParams::default_for(id), 30, 5);
            let spec = if id == EnvId::Nvp { AgentSpec::OptimalNvp } else { AgentSpec::BaseStock { level: 20 } };
            let log = run_episode(&config, &mut scripted(&config, spec)).unwrap();
            log.check_consistency().unwrap();
        }
    }

    #[test]
    fn wrong_agent_count() {
        let config = SimConfig::new(EnvParams::default_for(EnvId::Bg), 5, 0);
        let mut agents: Vec<Box<dyn Agent>> = vec![AgentSpec::Constant { quantity: 1 }.build("retailer", 0).unwrap()];
        assert_eq!(
            run_episode(&config, &mut agents).unwrap_err(),
            KernelError::AgentCount { expected: 4, got: 1 }
        );
    }

    #[test]
    fn zero_horizon_rejected() {
        let config = SimConfig::new(EnvParams::default_for(EnvId::Nvp), 0, 0);
        assert!(matches!(run_episode(&config, &mut []), Err(KernelError::InvalidConfig(_))));
    }

    struct Negative;
    impl Agent for Negative {
        fn decide(&mut self, obs: &Observation, _: &MemoryWindow) -> Result<Action, AgentError> {
            Ok(Action::primary(&obs.channels, -3))
        }
    }

    #[test]
    fn negative_orders_abort_without_clamping() {
        let config = SimConfig::new(EnvParams::default_for(EnvId::Nvp), 5, 0);
        let mut agents: Vec<Box<dyn Agent>> = vec![Box::new(Negative)];
        match run_episode(&config, &mut agents) {
            Err(KernelError::Protocol { period: 1, role, source: AgentError::InvalidAction(_) }) => {
                assert_eq!(role, "newsvendor")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn memory_saturates_at_window() {
        use std::sync::{Arc, Mutex};
        struct Probe(Arc<Mutex<Vec<usize>>>);
        impl Agent for Probe {
            fn decide(&mut self, obs: &Observation, m: &MemoryWindow) -> Result<Action, AgentError> {
                self.0.lock().unwrap().push(m.len());
                Ok(Action::primary(&obs.channels, 1))
            }
        }
        let mut config = SimConfig::new(EnvParams::default_for(EnvId::Nvp), 6, 0);
        config.memory_window = 3;
        let seen = Arc::new(Mutex::new(Vec::new()));
        let mut agents: Vec<Box<dyn Agent>> = vec![Box::new(Probe(seen.clone()))];
        run_episode(&config, &mut agents).unwrap();
        assert_eq!(*seen.lock().unwrap(), vec![0, 1, 2, 3, 3, 3]);
    }
}
