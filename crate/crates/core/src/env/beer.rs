//! Four-echelon serial beer game.
//!
//! Node 0 is the retailer facing customer demand; node `i + 1` supplies node
//! `i`; the plant (node 3) orders from a manufacturer with unlimited supply.
//! Orders are visible upstream in the period they are placed; shipments spend
//! `lead_time` periods in transit. Unfilled orders are backlogged and served
//! before new ones.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    channel_list, check_count, history_tail, non_negative, required_action, EchelonState,
    EnvError, Environment, NodeRecord, PeriodOutcome, PlacedOrder,
};
use crate::model::{Action, EnvId, Observation, PartnerState};
use crate::money::Money;
use crate::process::{Distribution, Sampler, StochasticProcess};
use crate::rng::streams;

pub const ROLES: [&str; 4] = ["retailer", "wholesaler", "distributor", "plant"];
pub const CHANNEL: &str = "order";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BgParams {
    /// Shipment lead time L between every pair of adjacent echelons.
    pub lead_time: u32,
    /// Holding cost per echelon, retailer first.
    pub holding: Vec<Money>,
    /// Backorder cost per echelon, retailer first.
    pub backorder: Vec<Money>,
    pub initial_inventory: i64,
    /// Quantity arriving at each echelon in each of periods 1..=L.
    pub initial_pipeline: i64,
    pub demand: Distribution,
}

impl Default for BgParams {
    fn default() -> Self {
        let half = Money::from_raw(crate::money::SCALE / 2);
        BgParams {
            lead_time: 2,
            holding: vec![half; 4],
            backorder: vec![Money::from_units(1); 4],
            initial_inventory: 12,
            initial_pipeline: 4,
            demand: Distribution::Trace { values: vec![4, 4, 4, 4, 8] },
        }
    }
}

impl BgParams {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.lead_time == 0 {
            return Err(EnvError::InvalidParams("lead_time must be >= 1".into()));
        }
        if self.holding.len() != ROLES.len() || self.backorder.len() != ROLES.len() {
            return Err(EnvError::InvalidParams(format!(
                "holding and backorder need {} entries",
                ROLES.len()
            )));
        }
        for (h, b) in self.holding.iter().zip(&self.backorder) {
            non_negative("holding", *h)?;
            non_negative("backorder", *b)?;
        }
        if self.initial_inventory < 0 || self.initial_pipeline < 0 {
            return Err(EnvError::InvalidParams("initial stock must be >= 0".into()));
        }
        self.demand.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
struct Node {
    state: EchelonState,
    on_order: i64,
    last_order: Option<i64>,
    incoming_history: Vec<i64>,
}

pub struct BeerGame {
    params: BgParams,
    horizon: u32,
    period: u32,
    nodes: Vec<Node>,
    demand: Sampler,
}

/// Result of one beer-game period for all echelons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BgTransition {
    pub states: Vec<EchelonState>,
    pub shipped: Vec<i64>,
    pub arrived: Vec<i64>,
    pub costs: Vec<Money>,
}

/// Pure transition: `states` are the echelon states at the start of
/// `period`, `orders` the orders placed this period (retailer first).
pub fn bg_step(
    states: &[EchelonState],
    orders: &[i64],
    customer_demand: i64,
    period: u32,
    params: &BgParams,
) -> BgTransition {
    let n = states.len();
    let mut next: Vec<EchelonState> = states.to_vec();
    let mut arrived = vec![0; n];
    let mut shipped = vec![0; n];
    for i in 0..n {
        arrived[i] = next[i].receive(period).values().sum();
        next[i].on_hand += arrived[i];
        let incoming = if i == 0 { customer_demand } else { orders[i - 1] };
        shipped[i] = next[i].fill(incoming);
    }
    let arrival = period + params.lead_time;
    for i in 1..n {
        if shipped[i] > 0 {
            next[i - 1].enqueue(CHANNEL, arrival, shipped[i]);
        }
    }
    // manufacturer always ships the plant's order in full
    if orders[n - 1] > 0 {
        next[n - 1].enqueue(CHANNEL, arrival, orders[n - 1]);
    }
    let costs = next
        .iter()
        .enumerate()
        .map(|(i, s)| params.holding[i] * s.on_hand + params.backorder[i] * s.backlog)
        .collect();
    BgTransition { states: next, shipped, arrived, costs }
}

impl BeerGame {
    pub fn new(params: BgParams, horizon: u32, seed: u64) -> Result<Self, EnvError> {
        params.validate()?;
        let demand = StochasticProcess::new(params.demand.clone(), streams::DEMAND).sampler(seed)?;
        let nodes = (0..ROLES.len())
            .map(|_| {
                let mut state = EchelonState::with_on_hand(params.initial_inventory);
                if params.initial_pipeline > 0 {
                    for p in 1..=params.lead_time {
                        state.enqueue(CHANNEL, p, params.initial_pipeline);
                    }
                }
                Node {
                    on_order: params.initial_pipeline * params.lead_time as i64,
                    state,
                    ..Node::default()
                }
            })
            .collect();
        Ok(BeerGame { params, horizon, period: 1, nodes, demand })
    }

    pub fn states(&self) -> Vec<EchelonState> {
        self.nodes.iter().map(|n| n.state.clone()).collect()
    }
}

impl Environment for BeerGame {
    fn id(&self) -> EnvId {
        EnvId::Bg
    }

    fn horizon(&self) -> u32 {
        self.horizon
    }

    fn period(&self) -> u32 {
        self.period
    }

    fn roles(&self) -> Vec<String> {
        channel_list(&ROLES)
    }

    fn channels(&self, _node: usize) -> Vec<String> {
        channel_list(&[CHANNEL])
    }

    fn observe(&self, node: usize, info_sharing: bool) -> Observation {
        let me = &self.nodes[node];
        let partners = info_sharing.then(|| {
            self.nodes
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != node)
                .map(|(j, n)| PartnerState {
                    role: ROLES[j].to_string(),
                    on_hand: n.state.on_hand,
                    backlog: n.state.backlog,
                    last_order: n.last_order,
                })
                .collect()
        });
        Observation {
            env: EnvId::Bg,
            period: self.period,
            horizon: self.horizon,
            role: ROLES[node].to_string(),
            channels: self.channels(node),
            on_hand: me.state.on_hand,
            backlog: me.state.backlog,
            pipeline: me.state.pipeline.clone(),
            on_order: me.on_order,
            last_demand: me.incoming_history.last().copied(),
            costs: BTreeMap::from([
                ("holding".to_string(), self.params.holding[node]),
                ("backorder".to_string(), self.params.backorder[node]),
            ]),
            lead_times: BTreeMap::from([(CHANNEL.to_string(), self.params.lead_time)]),
            demand: None,
            lead_time: None,
            history: history_tail(&me.incoming_history),
            partners,
        }
    }

    fn step(&mut self, actions: &[Option<Action>]) -> Result<PeriodOutcome, EnvError> {
        let t = self.period;
        if t > self.horizon {
            return Err(EnvError::Finished(self.horizon));
        }
        check_count(actions, ROLES.len())?;
        let mut orders = Vec::with_capacity(ROLES.len());
        for (i, role) in ROLES.iter().enumerate() {
            orders.push(required_action(actions, i, role, t, &self.channels(i))?.get(CHANNEL));
        }
        let d = self.demand.next_value();
        let tr = bg_step(&self.states(), &orders, d, t, &self.params);

        let mut records = Vec::with_capacity(ROLES.len());
        for (i, node) in self.nodes.iter_mut().enumerate() {
            let incoming = if i == 0 { d } else { orders[i - 1] };
            node.state = tr.states[i].clone();
            node.on_order += orders[i] - tr.arrived[i];
            node.last_order = Some(orders[i]);
            node.incoming_history.push(incoming);
            let plant = i == ROLES.len() - 1;
            records.push(NodeRecord {
                role: ROLES[i].to_string(),
                incoming,
                arrivals: BTreeMap::from([(CHANNEL.to_string(), tr.arrived[i])]),
                shipped: tr.shipped[i],
                unmet: node.state.backlog,
                on_hand: node.state.on_hand,
                backlog: node.state.backlog,
                orders: vec![PlacedOrder {
                    channel: CHANNEL.to_string(),
                    quantity: orders[i],
                    arrival_period: plant.then_some(t + self.params.lead_time),
                }],
                cost: tr.costs[i],
                profit: None,
            });
        }
        self.period += 1;
        Ok(PeriodOutcome { demands: vec![d], nodes: records })
    }
}
