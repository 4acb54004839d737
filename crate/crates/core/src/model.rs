//! The agent-facing surface: environment ids, observations and actions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::money::Money;
use crate::process::Distribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EnvId {
    /// Newsvendor problem.
    #[serde(rename = "NVP")]
    Nvp,
    /// Multi-period replenishment with stochastic vendor lead time.
    #[serde(rename = "MPR")]
    Mpr,
    /// Four-echelon beer game.
    #[serde(rename = "BG")]
    Bg,
    /// Two-level warehouse network.
    #[serde(rename = "TWN")]
    Twn,
    /// Dual-sourcing supply chain network.
    #[serde(rename = "SCN")]
    Scn,
}

impl EnvId {
    pub const ALL: [EnvId; 5] = [EnvId::Nvp, EnvId::Mpr, EnvId::Bg, EnvId::Twn, EnvId::Scn];

    pub fn as_str(self) -> &'static str {
        match self {
            EnvId::Nvp => "NVP",
            EnvId::Mpr => "MPR",
            EnvId::Bg => "BG",
            EnvId::Twn => "TWN",
            EnvId::Scn => "SCN",
        }
    }
}

impl fmt::Display for EnvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EnvId::ALL
            .into_iter()
            .find(|e| e.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown environment `{s}`"))
    }
}

/// Payoff framing shown to language-model agents. Scripted agents ignore it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Framing {
    /// Maximize expected profit.
    #[serde(rename = "PF")]
    Positive,
    /// Minimize the shortfall from the perfect-information profit.
    #[serde(rename = "NF")]
    Negative,
    #[default]
    #[serde(rename = "none")]
    None,
}

/// Goods in transit towards the observing node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InTransit {
    pub channel: String,
    pub arrival_period: u32,
    pub quantity: i64,
}

/// Partner state disclosed when information sharing is enabled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartnerState {
    pub role: String,
    pub on_hand: i64,
    pub backlog: i64,
    pub last_order: Option<i64>,
}

/// One agent's partial view of the system at the start of a period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub env: EnvId,
    pub period: u32,
    pub horizon: u32,
    pub role: String,
    /// Order channels the action must fill this period.
    pub channels: Vec<String>,
    pub on_hand: i64,
    pub backlog: i64,
    pub pipeline: Vec<InTransit>,
    /// Ordered but not yet received, including upstream unfilled quantities.
    pub on_order: i64,
    /// Demand (or downstream order) received in the previous period.
    pub last_demand: Option<i64>,
    pub costs: BTreeMap<String, Money>,
    /// Known lead times per channel, in periods. Absent when stochastic.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub lead_times: BTreeMap<String, u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<Distribution>,
    /// Lead-time distribution when lead times are stochastic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lead_time: Option<Distribution>,
    /// Past realizations of the demand this agent faces, oldest first.
    #[serde(default)]
    pub history: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partners: Option<Vec<PartnerState>>,
}

/// Order decision: one non-negative quantity per supply channel.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Action {
    pub orders: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActionError {
    #[error("missing order for channel `{0}`")]
    MissingChannel(String),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("negative quantity {quantity} for channel `{channel}`")]
    NegativeQuantity { channel: String, quantity: i64 },
}

impl Action {
    pub fn single(channel: &str, quantity: i64) -> Self {
        let mut orders = BTreeMap::new();
        orders.insert(channel.to_string(), quantity);
        Action { orders }
    }

    /// `quantity` on the first channel, zero on the rest.
    pub fn primary(channels: &[String], quantity: i64) -> Self {
        let orders = channels
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), if i == 0 { quantity } else { 0 }))
            .collect();
        Action { orders }
    }

    pub fn get(&self, channel: &str) -> i64 {
        self.orders.get(channel).copied().unwrap_or(0)
    }

    pub fn total(&self) -> i64 {
        self.orders.values().sum()
    }

    /// Checks the action covers exactly `channels` with non-negative values.
    pub fn validate(&self, channels: &[String]) -> Result<(), ActionError> {
        for c in self.orders.keys() {
            if !channels.contains(c) {
                return Err(ActionError::UnknownChannel(c.clone()));
            }
        }
        for c in channels {
            match self.orders.get(c) {
                None => return Err(ActionError::MissingChannel(c.clone())),
                Some(q) if *q < 0 => {
                    return Err(ActionError::NegativeQuantity { channel: c.clone(), quantity: *q })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chans(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn validate_channels() {
        let c = chans(&["regular", "expedited"]);
        assert!(Action::primary(&c, 5).validate(&c).is_ok());
        assert_eq!(
            Action::single("regular", 5).validate(&c),
            Err(ActionError::MissingChannel("expedited".into()))
        );
        let mut a = Action::primary(&c, 5);
        a.orders.insert("bogus".into(), 1);
        assert_eq!(a.validate(&c), Err(ActionError::UnknownChannel("bogus".into())));
        let a = Action::primary(&c, -1);
        assert!(matches!(a.validate(&c), Err(ActionError::NegativeQuantity { .. })));
    }

    #[test]
    fn env_id_names() {
        assert_eq!("bg".parse::<EnvId>().unwrap(), EnvId::Bg);
        assert_eq!(serde_json::to_string(&EnvId::Twn).unwrap(), "\"TWN\"");
        assert!("XYZ".parse::<EnvId>().is_err());
    }
}
