//! Dual-sourcing network: one downstream node that buys from a regular
//! supplier and from a faster, more expensive expedited supplier. Both
//! suppliers are uncapacitated.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    channel_list, check_count, history_tail, non_negative, required_action, EchelonState,
    EnvError, Environment, NodeRecord, PeriodOutcome, PlacedOrder,
};
use crate::model::{Action, EnvId, Observation};
use crate::money::Money;
use crate::process::{Distribution, Sampler, StochasticProcess};
use crate::rng::streams;

pub const ROLE: &str = "buyer";
pub const REGULAR: &str = "regular";
pub const EXPEDITED: &str = "expedited";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScnParams {
    pub lead_regular: u32,
    pub lead_expedited: u32,
    pub cost_regular: Money,
    pub cost_expedited: Money,
    pub holding: Money,
    pub backorder: Money,
    pub initial_inventory: i64,
    pub demand: Distribution,
}

impl Default for ScnParams {
    fn default() -> Self {
        ScnParams {
            lead_regular: 4,
            lead_expedited: 1,
            cost_regular: Money::from_units(1),
            cost_expedited: Money::from_units(2),
            holding: Money::from_units(1),
            backorder: Money::from_units(9),
            initial_inventory: 20,
            demand: Distribution::Poisson { lambda: 10.0 },
        }
    }
}

impl ScnParams {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.lead_expedited == 0 || self.lead_expedited >= self.lead_regular {
            return Err(EnvError::InvalidParams(
                "lead times must satisfy 1 <= lead_expedited < lead_regular".into(),
            ));
        }
        non_negative("cost_regular", self.cost_regular)?;
        non_negative("holding", self.holding)?;
        non_negative("backorder", self.backorder)?;
        if self.cost_expedited <= self.cost_regular {
            return Err(EnvError::InvalidParams("cost_expedited must exceed cost_regular".into()));
        }
        if self.initial_inventory < 0 {
            return Err(EnvError::InvalidParams("initial_inventory must be >= 0".into()));
        }
        self.demand.validate()?;
        Ok(())
    }

    /// Purchase cost of one period's orders.
    pub fn purchase_cost(&self, regular: i64, expedited: i64) -> Money {
        self.cost_regular * regular + self.cost_expedited * expedited
    }
}

/// One dual-sourcing period. Returns the node record with its cost
/// (holding + backorder + purchase).
pub fn scn_step(
    state: &mut EchelonState,
    regular: i64,
    expedited: i64,
    demand: i64,
    period: u32,
    params: &ScnParams,
) -> NodeRecord {
    let reg_at = period + params.lead_regular;
    let exp_at = period + params.lead_expedited;
    state.enqueue(REGULAR, reg_at, regular);
    state.enqueue(EXPEDITED, exp_at, expedited);
    let arrivals = state.receive(period);
    state.on_hand += arrivals.values().sum::<i64>();
    let shipped = state.fill(demand);
    NodeRecord {
        role: ROLE.to_string(),
        incoming: demand,
        arrivals,
        shipped,
        unmet: state.backlog,
        on_hand: state.on_hand,
        backlog: state.backlog,
        orders: vec![
            PlacedOrder { channel: REGULAR.to_string(), quantity: regular, arrival_period: Some(reg_at) },
            PlacedOrder { channel: EXPEDITED.to_string(), quantity: expedited, arrival_period: Some(exp_at) },
        ],
        cost: params.holding * state.on_hand
            + params.backorder * state.backlog
            + params.purchase_cost(regular, expedited),
        profit: None,
    }
}

pub struct ScnEnv {
    params: ScnParams,
    horizon: u32,
    period: u32,
    state: EchelonState,
    demand: Sampler,
    history: Vec<i64>,
}

impl ScnEnv {
    pub fn new(params: ScnParams, horizon: u32, seed: u64) -> Result<Self, EnvError> {
        params.validate()?;
        let demand = StochasticProcess::new(params.demand.clone(), streams::DEMAND).sampler(seed)?;
        Ok(ScnEnv {
            state: EchelonState::with_on_hand(params.initial_inventory),
            params,
            horizon,
            period: 1,
            demand,
            history: Vec::new(),
        })
    }
}

impl Environment for ScnEnv {
    fn id(&self) -> EnvId {
        EnvId::Scn
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
        channel_list(&[REGULAR, EXPEDITED])
    }

    fn observe(&self, _node: usize, _info_sharing: bool) -> Observation {
        Observation {
            env: EnvId::Scn,
            period: self.period,
            horizon: self.horizon,
            role: ROLE.to_string(),
            channels: self.channels(0),
            on_hand: self.state.on_hand,
            backlog: self.state.backlog,
            pipeline: self.state.pipeline.clone(),
            on_order: self.state.in_transit(),
            last_demand: self.history.last().copied(),
            costs: BTreeMap::from([
                ("holding".to_string(), self.params.holding),
                ("backorder".to_string(), self.params.backorder),
                ("regular".to_string(), self.params.cost_regular),
                ("expedited".to_string(), self.params.cost_expedited),
            ]),
            lead_times: BTreeMap::from([
                (REGULAR.to_string(), self.params.lead_regular),
                (EXPEDITED.to_string(), self.params.lead_expedited),
            ]),
            demand: Some(self.params.demand.clone()),
            lead_time: None,
            history: history_tail(&self.history),
            partners: None,
        }
    }

    fn step(&mut self, actions: &[Option<Action>]) -> Result<PeriodOutcome, EnvError> {
        let t = self.period;
        if t > self.horizon {
            return Err(EnvError::Finished(self.horizon));
        }
        check_count(actions, 1)?;
        let act = required_action(actions, 0, ROLE, t, &self.channels(0))?;
        let (reg, exp) = (act.get(REGULAR), act.get(EXPEDITED));
        let d = self.demand.next_value();
        let record = scn_step(&mut self.state, reg, exp, d, t, &self.params);
        self.history.push(d);
        self.period += 1;
        Ok(PeriodOutcome { demands: vec![d], nodes: vec![record] })
    }
}
