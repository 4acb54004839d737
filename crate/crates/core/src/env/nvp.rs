//! Newsvendor: one ordering decision per round, leftovers salvage at zero,
//! excess demand is lost.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    channel_list, check_count, history_tail, required_action, EnvError, Environment, NodeRecord,
    PeriodOutcome, PlacedOrder,
};
use crate::model::{Action, EnvId, Observation};
use crate::money::Money;
use crate::process::{Distribution, Sampler, StochasticProcess};
use crate::rng::streams;

pub const ROLE: &str = "newsvendor";
pub const CHANNEL: &str = "order";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NvpParams {
    /// Unit revenue r.
    pub revenue: Money,
    /// Unit purchase cost c.
    pub unit_cost: Money,
    pub demand: Distribution,
}

impl Default for NvpParams {
    fn default() -> Self {
        NvpParams {
            revenue: Money::from_units(12),
            unit_cost: Money::from_units(3),
            demand: Distribution::UniformInt { low: 0, high: 300 },
        }
    }
}

impl NvpParams {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.unit_cost <= Money::ZERO || self.revenue <= self.unit_cost {
            return Err(EnvError::InvalidParams(
                "newsvendor requires revenue > unit_cost > 0".into(),
            ));
        }
        self.demand.validate()?;
        Ok(())
    }

    /// Underage cost `r - c`.
    pub fn underage(&self) -> Money {
        self.revenue - self.unit_cost
    }

    /// Overage cost `c` (salvage value is zero).
    pub fn overage(&self) -> Money {
        self.unit_cost
    }
}

/// Profit of ordering `q` against demand `d`: `r * min(q, d) - c * q`.
pub fn profit(q: i64, d: i64, revenue: Money, unit_cost: Money) -> Money {
    revenue * q.min(d) - unit_cost * q
}

/// Profit under perfect information, ordering exactly `d`.
pub fn perfect_information_profit(d: i64, revenue: Money, unit_cost: Money) -> Money {
    (revenue - unit_cost) * d
}

/// Shortfall from the perfect-information profit (the cost-framed payoff).
pub fn regret(q: i64, d: i64, revenue: Money, unit_cost: Money) -> Money {
    perfect_information_profit(d, revenue, unit_cost) - profit(q, d, revenue, unit_cost)
}

/// Single newsvendor round. No state carries over.
pub fn nvp_step(q: i64, d: i64, params: &NvpParams) -> (Money, NodeRecord) {
    let p = profit(q, d, params.revenue, params.unit_cost);
    let sold = q.min(d);
    let record = NodeRecord {
        role: ROLE.to_string(),
        incoming: d,
        arrivals: BTreeMap::from([(CHANNEL.to_string(), q)]),
        shipped: sold,
        unmet: d - sold,
        on_hand: q - sold,
        backlog: 0,
        orders: vec![PlacedOrder { channel: CHANNEL.to_string(), quantity: q, arrival_period: None }],
        cost: -p,
        profit: Some(p),
    };
    (p, record)
}

pub struct NvpEnv {
    params: NvpParams,
    horizon: u32,
    period: u32,
    demand: Sampler,
    history: Vec<i64>,
}

impl NvpEnv {
    pub fn new(params: NvpParams, horizon: u32, seed: u64) -> Result<Self, EnvError> {
        params.validate()?;
        let demand = StochasticProcess::new(params.demand.clone(), streams::DEMAND).sampler(seed)?;
        Ok(NvpEnv { params, horizon, period: 1, demand, history: Vec::new() })
    }
}

impl Environment for NvpEnv {
    fn id(&self) -> EnvId {
        EnvId::Nvp
    }

    fn horizon(&self) -> u32 {
        self.horizon
    }

    fn period(&self) -> u32 {
        self.period
    }

    fn roles(&self) -> Vec<String> {
        vec![ROLE.to_string()]
    }

    fn channels(&self, _node: usize) -> Vec<String> {
        channel_list(&[CHANNEL])
    }

    fn observe(&self, _node: usize, _info_sharing: bool) -> Observation {
        Observation {
            env: EnvId::Nvp,
            period: self.period,
            horizon: self.horizon,
            role: ROLE.to_string(),
            channels: self.channels(0),
            on_hand: 0,
            backlog: 0,
            pipeline: vec![],
            on_order: 0,
            last_demand: self.history.last().copied(),
            costs: BTreeMap::from([
                ("revenue".to_string(), self.params.revenue),
                ("unit_cost".to_string(), self.params.unit_cost),
                ("salvage".to_string(), Money::ZERO),
            ]),
            lead_times: BTreeMap::new(),
            demand: Some(self.params.demand.clone()),
            lead_time: None,
            history: history_tail(&self.history),
            partners: None,
        }
    }

    fn step(&mut self, actions: &[Option<Action>]) -> Result<PeriodOutcome, EnvError> {
        if self.period > self.horizon {
            return Err(EnvError::Finished(self.horizon));
        }
        check_count(actions, 1)?;
        let q = required_action(actions, 0, ROLE, self.period, &self.channels(0))?.get(CHANNEL);
        let d = self.demand.next_value();
        let (_, mut record) = nvp_step(q, d, &self.params);
        record.orders[0].arrival_period = Some(self.period);
        self.history.push(d);
        self.period += 1;
        Ok(PeriodOutcome { demands: vec![d], nodes: vec![record] })
    }
}
