//! Experiment configuration, read from TOML.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::AgentSpec;
use crate::env::EnvParams;
use crate::kernel::SimConfig;
use crate::model::{EnvId, Framing};

/// Roster key applying to every role without its own entry.
pub const ANY_ROLE: &str = "*";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Agent label used in tables; defaults to the roster's kinds.
    #[serde(default)]
    pub label: Option<String>,
    pub horizon: u32,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub framing: Framing,
    #[serde(default)]
    pub info_sharing: bool,
    #[serde(default)]
    pub cognitive_reflection: bool,
    #[serde(default)]
    pub memory_window: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub env: EnvParams,
    /// Agent per role name, or `"*"` for all remaining roles.
    pub agents: BTreeMap<String, AgentSpec>,
}

fn default_workers() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse(String),
    Io(String),
    EmptySeeds,
    DuplicateSeed(u64),
    ZeroHorizon,
    ZeroWorkers,
    Env(String),
    FramingNotNvp(Framing),
    InfoSharingSingleAgent(EnvId),
    MissingAgent(String),
    UnknownRole(String),
    Agent { role: String, reason: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(e) => write!(f, "cannot parse config: {e}"),
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::EmptySeeds => write!(f, "seed list is empty"),
            ConfigError::DuplicateSeed(s) => write!(f, "seed {s} is listed twice"),
            ConfigError::ZeroHorizon => write!(f, "horizon must be >= 1"),
            ConfigError::ZeroWorkers => write!(f, "workers must be >= 1"),
            ConfigError::Env(e) => write!(f, "environment: {e}"),
            ConfigError::FramingNotNvp(fr) => {
                write!(f, "framing {} only applies to the NVP environment", serde_json::to_string(fr).unwrap_or_default())
            }
            ConfigError::InfoSharingSingleAgent(e) => write!(f, "info_sharing needs a multi-agent environment, {e} has one role"),
            ConfigError::MissingAgent(r) => write!(f, "no agent for role `{r}`"),
            ConfigError::UnknownRole(r) => write!(f, "agent given for unknown role `{r}`"),
            ConfigError::Agent { role, reason } => write!(f, "agent for `{role}`: {reason}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Every problem found, in a stable order. Empty means valid.
    pub fn problems(&self) -> Vec<ConfigError> {
        let mut out = Vec::new();
        if self.horizon == 0 {
            out.push(ConfigError::ZeroHorizon);
        } else if let Err(e) = self.env.validate(self.horizon) {
            out.push(ConfigError::Env(e.to_string()));
        }
        if self.seeds.is_empty() {
            out.push(ConfigError::EmptySeeds);
        }
        let mut seen = BTreeSet::new();
        for s in &self.seeds {
            if !seen.insert(*s) {
                out.push(ConfigError::DuplicateSeed(*s));
            }
        }
        if self.workers == 0 {
            out.push(ConfigError::ZeroWorkers);
        }
        let env = self.env.id();
        if self.framing != Framing::None && env != EnvId::Nvp {
            out.push(ConfigError::FramingNotNvp(self.framing));
        }
        if self.info_sharing && !self.env.is_multi_agent() {
            out.push(ConfigError::InfoSharingSingleAgent(env));
        }
        let roles = self.env.roles();
        for key in self.agents.keys() {
            if key != ANY_ROLE && !roles.contains(key) {
                out.push(ConfigError::UnknownRole(key.clone()));
            }
        }
        for role in &roles {
            match self.spec_for(role) {
                None => out.push(ConfigError::MissingAgent(role.clone())),
                Some(spec) => {
                    if let Err(reason) = spec.validate() {
                        out.push(ConfigError::Agent { role: role.clone(), reason });
                    }
                    let nvp_only = matches!(spec, AgentSpec::OptimalNvp | AgentSpec::MeanAnchored { .. });
                    if nvp_only && env != EnvId::Nvp {
                        out.push(ConfigError::Agent {
                            role: role.clone(),
                            reason: format!("{} needs the NVP environment", spec.kind_name()),
                        });
                    }
                    if matches!(spec, AgentSpec::ExpostReplay { .. }) && env != EnvId::Mpr {
                        out.push(ConfigError::Agent {
                            role: role.clone(),
                            reason: "expost_replay needs the MPR environment".into(),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), Vec<ConfigError>> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(p)
        }
    }

    pub fn spec_for(&self, role: &str) -> Option<&AgentSpec> {
        self.agents.get(role).or_else(|| self.agents.get(ANY_ROLE))
    }

    /// Agent specs in role order.
    pub fn roster(&self) -> Result<Vec<(String, AgentSpec)>, ConfigError> {
        self.env
            .roles()
            .into_iter()
            .map(|r| {
                let spec = self.spec_for(&r).cloned().ok_or_else(|| ConfigError::MissingAgent(r.clone()))?;
                Ok((r, spec))
            })
            .collect()
    }

    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let mut kinds: Vec<&str> = self.env.roles().iter().filter_map(|r| self.spec_for(r)).map(|s| s.kind_name()).collect();
        kinds.dedup();
        kinds.join("/")
    }

    pub fn sim_config(&self, seed: u64) -> SimConfig {
        SimConfig {
            horizon: self.horizon,
            seed,
            env: self.env.clone(),
            memory_window: self.memory_window,
            info_sharing: self.info_sharing,
            framing: self.framing,
            cognitive_reflection: self.cognitive_reflection,
        }
    }
}
