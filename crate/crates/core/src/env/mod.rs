//! Environment dynamics: state transitions, shipments, per-period cost and
//! observation construction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{Action, ActionError, EnvId, InTransit, Observation};
use crate::money::Money;
use crate::process::ProcessError;

pub mod beer;
pub mod mpr;
pub mod nvp;
pub mod scn;
pub mod twn;

pub use beer::{BeerGame, BgParams};
pub use mpr::{MprEnv, MprParams};
pub use nvp::{NvpEnv, NvpParams};
pub use scn::{ScnEnv, ScnParams};
pub use twn::{TwnEnv, TwnParams};

/// Most recent demand realizations carried in an observation.
pub const HISTORY_LIMIT: usize = 52;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("invalid environment parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error("role `{role}`: {source}")]
    Action { role: String, source: ActionError },
    #[error("role `{role}` must order in period {period}")]
    MissingAction { role: String, period: u32 },
    #[error("role `{role}` cannot order in period {period} (not a review period)")]
    OffSchedule { role: String, period: u32 },
    #[error("expected {expected} actions, got {got}")]
    ActionCount { expected: usize, got: usize },
    #[error("episode already finished after {0} periods")]
    Finished(u32),
}

/// On-hand, backlog and in-transit goods for one node.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EchelonState {
    /// Sellable stock. Signed in MPR, where negative values are backorders.
    pub on_hand: i64,
    /// Unfilled downstream demand, always >= 0.
    pub backlog: i64,
    pub pipeline: Vec<InTransit>,
}

impl EchelonState {
    pub fn with_on_hand(on_hand: i64) -> Self {
        EchelonState { on_hand, ..Default::default() }
    }

    /// Net inventory: stock on hand minus backlog.
    pub fn inventory_level(&self) -> i64 {
        self.on_hand - self.backlog
    }

    pub fn in_transit(&self) -> i64 {
        self.pipeline.iter().map(|p| p.quantity).sum()
    }

    pub fn latest_arrival(&self) -> Option<u32> {
        self.pipeline.iter().map(|p| p.arrival_period).max()
    }

    pub fn enqueue(&mut self, channel: &str, arrival_period: u32, quantity: i64) {
        self.pipeline.push(InTransit { channel: channel.to_string(), arrival_period, quantity });
    }

    /// Removes everything due by `period`, returning quantities per channel.
    pub fn receive(&mut self, period: u32) -> BTreeMap<String, i64> {
        let mut got = BTreeMap::new();
        self.pipeline.retain(|p| {
            if p.arrival_period <= period {
                *got.entry(p.channel.clone()).or_insert(0) += p.quantity;
                false
            } else {
                true
            }
        });
        got
    }

    /// Ships as much of `backlog + incoming` as stock allows.
    /// Returns the quantity shipped; afterwards `on_hand` and `backlog` are never both positive.
    pub fn fill(&mut self, incoming: i64) -> i64 {
        let owed = self.backlog + incoming;
        let shipped = owed.min(self.on_hand.max(0));
        self.on_hand -= shipped;
        self.backlog = owed - shipped;
        shipped
    }
}

/// An order placed during a period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedOrder {
    pub channel: String,
    pub quantity: i64,
    /// Arrival period when fixed at placement; `None` when it depends on upstream stock.
    pub arrival_period: Option<u32>,
}

/// What happened at one node during one period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub role: String,
    /// Demand or downstream orders received this period.
    pub incoming: i64,
    pub arrivals: BTreeMap<String, i64>,
    /// Goods sent downstream (or sold) this period.
    pub shipped: i64,
    /// Demand left unfilled at the end of the period.
    pub unmet: i64,
    pub on_hand: i64,
    pub backlog: i64,
    pub orders: Vec<PlacedOrder>,
    pub cost: Money,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profit: Option<Money>,
}

impl NodeRecord {
    pub fn arrived(&self) -> i64 {
        self.arrivals.values().sum()
    }

    pub fn ordered(&self) -> i64 {
        self.orders.iter().map(|o| o.quantity).sum()
    }

    pub fn ordered_on(&self, channel: &str) -> i64 {
        self.orders.iter().filter(|o| o.channel == channel).map(|o| o.quantity).sum()
    }

    pub fn stocked_out(&self) -> bool {
        self.unmet > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodOutcome {
    /// Exogenous demand realizations, one per demand node.
    pub demands: Vec<i64>,
    pub nodes: Vec<NodeRecord>,
}

/// Environment dynamics driven by the episode loop.
pub trait Environment: Send {
    fn id(&self) -> EnvId;
    fn horizon(&self) -> u32;
    /// Next period to be played, starting at 1.
    fn period(&self) -> u32;
    fn roles(&self) -> Vec<String>;
    /// Channels `node` must order on this period; empty means no decision.
    fn channels(&self, node: usize) -> Vec<String>;
    fn observe(&self, node: usize, info_sharing: bool) -> Observation;
    fn step(&mut self, actions: &[Option<Action>]) -> Result<PeriodOutcome, EnvError>;
}

/// Environment selection plus its parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EnvParams {
    #[serde(rename = "NVP")]
    Nvp(NvpParams),
    #[serde(rename = "MPR")]
    Mpr(MprParams),
    #[serde(rename = "BG")]
    Bg(BgParams),
    #[serde(rename = "TWN")]
    Twn(TwnParams),
    #[serde(rename = "SCN")]
    Scn(ScnParams),
}

impl EnvParams {
    pub fn default_for(id: EnvId) -> Self {
        match id {
            EnvId::Nvp => EnvParams::Nvp(NvpParams::default()),
            EnvId::Mpr => EnvParams::Mpr(MprParams::default()),
            EnvId::Bg => EnvParams::Bg(BgParams::default()),
            EnvId::Twn => EnvParams::Twn(TwnParams::default()),
            EnvId::Scn => EnvParams::Scn(ScnParams::default()),
        }
    }

    pub fn id(&self) -> EnvId {
        match self {
            EnvParams::Nvp(_) => EnvId::Nvp,
            EnvParams::Mpr(_) => EnvId::Mpr,
            EnvParams::Bg(_) => EnvId::Bg,
            EnvParams::Twn(_) => EnvId::Twn,
            EnvParams::Scn(_) => EnvId::Scn,
        }
    }

    pub fn roles(&self) -> Vec<String> {
        match self {
            EnvParams::Nvp(_) => vec![nvp::ROLE.to_string()],
            EnvParams::Mpr(_) => vec![mpr::ROLE.to_string()],
            EnvParams::Bg(_) => beer::ROLES.iter().map(|r| r.to_string()).collect(),
            EnvParams::Twn(p) => p.roles(),
            EnvParams::Scn(_) => vec![scn::ROLE.to_string()],
        }
    }

    pub fn validate(&self, horizon: u32) -> Result<(), EnvError> {
        match self {
            EnvParams::Nvp(p) => p.validate(),
            EnvParams::Mpr(p) => p.validate(horizon),
            EnvParams::Bg(p) => p.validate(),
            EnvParams::Twn(p) => p.validate(),
            EnvParams::Scn(p) => p.validate(),
        }
    }

    pub fn build(&self, horizon: u32, seed: u64) -> Result<Box<dyn Environment>, EnvError> {
        self.validate(horizon)?;
        Ok(match self {
            EnvParams::Nvp(p) => Box::new(NvpEnv::new(p.clone(), horizon, seed)?),
            EnvParams::Mpr(p) => Box::new(MprEnv::new(p.clone(), horizon, seed)?),
            EnvParams::Bg(p) => Box::new(BeerGame::new(p.clone(), horizon, seed)?),
            EnvParams::Twn(p) => Box::new(TwnEnv::new(p.clone(), horizon, seed)?),
            EnvParams::Scn(p) => Box::new(ScnEnv::new(p.clone(), horizon, seed)?),
        })
    }

    /// Recomputes a node's period cost from its logged end-of-period state.
    pub fn recompute_cost(&self, node: usize, rec: &NodeRecord) -> Money {
        match self {
            EnvParams::Nvp(p) => -nvp::profit(rec.ordered(), rec.incoming, p.revenue, p.unit_cost),
            EnvParams::Mpr(p) => mpr::period_cost(rec.on_hand, p.holding, p.backorder),
            EnvParams::Bg(p) => p.holding[node] * rec.on_hand + p.backorder[node] * rec.backlog,
            EnvParams::Twn(p) => {
                let (h, b) = if node == 0 {
                    (p.hub_holding, p.hub_backorder)
                } else {
                    (p.mini_holding, p.mini_backorder)
                };
                h * rec.on_hand + b * rec.backlog
            }
            EnvParams::Scn(p) => {
                p.holding * rec.on_hand
                    + p.backorder * rec.backlog
                    + p.cost_regular * rec.ordered_on(scn::REGULAR)
                    + p.cost_expedited * rec.ordered_on(scn::EXPEDITED)
            }
        }
    }

    pub fn is_multi_agent(&self) -> bool {
        self.roles().len() > 1
    }
}

pub(crate) fn history_tail(history: &[i64]) -> Vec<i64> {
    history[history.len().saturating_sub(HISTORY_LIMIT)..].to_vec()
}

pub(crate) fn required_action<'a>(
    actions: &'a [Option<Action>],
    node: usize,
    role: &str,
    period: u32,
    channels: &[String],
) -> Result<&'a Action, EnvError> {
    let action = actions[node]
        .as_ref()
        .ok_or_else(|| EnvError::MissingAction { role: role.to_string(), period })?;
    action
        .validate(channels)
        .map_err(|source| EnvError::Action { role: role.to_string(), source })?;
    Ok(action)
}

pub(crate) fn check_count(actions: &[Option<Action>], expected: usize) -> Result<(), EnvError> {
    if actions.len() != expected {
        return Err(EnvError::ActionCount { expected, got: actions.len() });
    }
    Ok(())
}

pub(crate) fn channel_list(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub(crate) fn non_negative(name: &str, v: Money) -> Result<(), EnvError> {
    if v.is_negative() {
        return Err(EnvError::InvalidParams(format!("{name} must be >= 0")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_is_shipment_constrained() {
        let mut s = EchelonState::with_on_hand(4);
        assert_eq!(s.fill(8), 4);
        assert_eq!((s.on_hand, s.backlog), (0, 4));
        s.on_hand = 10;
        assert_eq!(s.fill(2), 6);
        assert_eq!((s.on_hand, s.backlog), (4, 0));
    }

    #[test]
    fn receive_drains_due_items() {
        let mut s = EchelonState::default();
        s.enqueue("hub", 3, 5);
        s.enqueue("direct", 4, 7);
        s.enqueue("hub", 3, 1);
        let got = s.receive(3);
        assert_eq!(got.get("hub"), Some(&6));
        assert_eq!(s.in_transit(), 7);
    }

    #[test]
    fn default_params_round_trip_through_json() {
        for id in EnvId::ALL {
            let p = EnvParams::default_for(id);
            let s = serde_json::to_string(&p).unwrap();
            let back: EnvParams = serde_json::from_str(&s).unwrap();
            assert_eq!(p, back);
            assert_eq!(back.id(), id);
        }
    }
}
