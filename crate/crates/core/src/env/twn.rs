//! Two-level warehouse network: a central hub replenished by the
//! manufacturer, and mini-warehouses that order from the hub or directly from
//! the manufacturer.
//!
//! Node 0 is the hub, nodes `1..=minis` the mini-warehouses. The hub serves
//! mini-warehouse orders in index order, oldest obligations first; what it
//! cannot ship stays owed to that mini-warehouse.

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

pub const HUB_ROLE: &str = "hub";
pub const MANUFACTURER: &str = "manufacturer";
pub const VIA_HUB: &str = "hub";
pub const DIRECT: &str = "direct";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwnParams {
    pub minis: usize,
    pub lead_manufacturer_to_hub: u32,
    pub lead_hub_to_mini: u32,
    pub lead_direct: u32,
    pub hub_holding: Money,
    pub hub_backorder: Money,
    pub mini_holding: Money,
    pub mini_backorder: Money,
    pub hub_initial_inventory: i64,
    pub mini_initial_inventory: i64,
    /// Customer demand at each mini-warehouse (independent streams).
    pub demand: Distribution,
}

impl Default for TwnParams {
    fn default() -> Self {
        TwnParams {
            minis: 3,
            lead_manufacturer_to_hub: 4,
            lead_hub_to_mini: 1,
            lead_direct: 2,
            hub_holding: Money::from_raw(crate::money::SCALE / 2),
            hub_backorder: Money::from_units(1),
            mini_holding: Money::from_units(1),
            mini_backorder: Money::from_units(9),
            hub_initial_inventory: 20,
            mini_initial_inventory: 10,
            demand: Distribution::Poisson { lambda: 5.0 },
        }
    }
}

impl TwnParams {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.minis == 0 {
            return Err(EnvError::InvalidParams("need at least one mini-warehouse".into()));
        }
        let (mh, hm, d) = (self.lead_manufacturer_to_hub, self.lead_hub_to_mini, self.lead_direct);
        if mh == 0 || hm == 0 || d == 0 {
            return Err(EnvError::InvalidParams("lead times must be >= 1".into()));
        }
        if !(hm < d && d < mh + hm) {
            return Err(EnvError::InvalidParams(format!(
                "lead times must satisfy hub_to_mini ({hm}) < direct ({d}) < manufacturer_to_hub + hub_to_mini ({})",
                mh + hm
            )));
        }
        for (name, v) in [
            ("hub_holding", self.hub_holding),
            ("hub_backorder", self.hub_backorder),
            ("mini_holding", self.mini_holding),
            ("mini_backorder", self.mini_backorder),
        ] {
            non_negative(name, v)?;
        }
        if self.hub_initial_inventory < 0 || self.mini_initial_inventory < 0 {
            return Err(EnvError::InvalidParams("initial inventory must be >= 0".into()));
        }
        self.demand.validate()?;
        Ok(())
    }

    pub fn roles(&self) -> Vec<String> {
        std::iter::once(HUB_ROLE.to_string())
            .chain((1..=self.minis).map(mini_role))
            .collect()
    }
}

pub fn mini_role(j: usize) -> String {
    format!("mini-{j}")
}

/// Records a direct order and returns its arrival period.
pub fn place_direct(state: &mut EchelonState, quantity: i64, period: u32, lead_direct: u32) -> u32 {
    let arrival = period + lead_direct;
    state.enqueue(DIRECT, arrival, quantity);
    arrival
}

/// Hub allocation: ships to each mini-warehouse in index order from
/// `available`. Returns (shipments, stock left).
pub fn allocate(available: i64, owed: &[i64]) -> (Vec<i64>, i64) {
    let mut left = available.max(0);
    let shipments = owed
        .iter()
        .map(|o| {
            let s = (*o).min(left);
            left -= s;
            s
        })
        .collect();
    (shipments, left)
}

#[derive(Debug, Clone, Default)]
struct Node {
    state: EchelonState,
    on_order: i64,
    last_order: Option<i64>,
    incoming_history: Vec<i64>,
}

pub struct TwnEnv {
    params: TwnParams,
    horizon: u32,
    period: u32,
    nodes: Vec<Node>,
    /// Hub obligations per mini-warehouse.
    owed: Vec<i64>,
    demand: Vec<Sampler>,
}

impl TwnEnv {
    pub fn new(params: TwnParams, horizon: u32, seed: u64) -> Result<Self, EnvError> {
        params.validate()?;
        let demand = (1..=params.minis)
            .map(|j| StochasticProcess::new(params.demand.clone(), streams::demand_at(j)).sampler(seed))
            .collect::<Result<Vec<_>, _>>()?;
        let mut nodes = vec![Node {
            state: EchelonState::with_on_hand(params.hub_initial_inventory),
            ..Node::default()
        }];
        for _ in 0..params.minis {
            nodes.push(Node {
                state: EchelonState::with_on_hand(params.mini_initial_inventory),
                ..Node::default()
            });
        }
        Ok(TwnEnv { owed: vec![0; params.minis], params, horizon, period: 1, nodes, demand })
    }

    fn costs_for(&self, node: usize) -> (Money, Money) {
        if node == 0 {
            (self.params.hub_holding, self.params.hub_backorder)
        } else {
            (self.params.mini_holding, self.params.mini_backorder)
        }
    }
}

impl Environment for TwnEnv {
    fn id(&self) -> EnvId {
        EnvId::Twn
    }

    fn horizon(&self) -> u32 {
        self.horizon
    }

    fn period(&self) -> u32 {
        self.period
    }

    fn roles(&self) -> Vec<String> {
        self.params.roles()
    }

    fn channels(&self, node: usize) -> Vec<String> {
        if node == 0 {
            channel_list(&[MANUFACTURER])
        } else {
            channel_list(&[VIA_HUB, DIRECT])
        }
    }

    fn observe(&self, node: usize, info_sharing: bool) -> Observation {
        let roles = self.roles();
        let me = &self.nodes[node];
        let (h, b) = self.costs_for(node);
        let partners = info_sharing.then(|| {
            self.nodes
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != node)
                .map(|(j, n)| PartnerState {
                    role: roles[j].clone(),
                    on_hand: n.state.on_hand,
                    backlog: n.state.backlog,
                    last_order: n.last_order,
                })
                .collect()
        });
        let lead_times = if node == 0 {
            BTreeMap::from([(MANUFACTURER.to_string(), self.params.lead_manufacturer_to_hub)])
        } else {
            BTreeMap::from([
                (VIA_HUB.to_string(), self.params.lead_hub_to_mini),
                (DIRECT.to_string(), self.params.lead_direct),
            ])
        };
        Observation {
            env: EnvId::Twn,
            period: self.period,
            horizon: self.horizon,
            role: roles[node].clone(),
            channels: self.channels(node),
            on_hand: me.state.on_hand,
            backlog: me.state.backlog,
            pipeline: me.state.pipeline.clone(),
            on_order: me.on_order,
            last_demand: me.incoming_history.last().copied(),
            costs: BTreeMap::from([("holding".to_string(), h), ("backorder".to_string(), b)]),
            lead_times,
            demand: (node > 0).then(|| self.params.demand.clone()),
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
        let roles = self.roles();
        check_count(actions, roles.len())?;
        let acts = (0..roles.len())
            .map(|i| required_action(actions, i, &roles[i], t, &self.channels(i)))
            .collect::<Result<Vec<_>, _>>()?;
        let hub_order = acts[0].get(MANUFACTURER);
        let via_hub: Vec<i64> = acts[1..].iter().map(|a| a.get(VIA_HUB)).collect();
        let direct: Vec<i64> = acts[1..].iter().map(|a| a.get(DIRECT)).collect();
        let demands: Vec<i64> = self.demand.iter_mut().map(|s| s.next_value()).collect();
        let p = &self.params;

        let mut orders = vec![vec![PlacedOrder {
            channel: MANUFACTURER.to_string(),
            quantity: hub_order,
            arrival_period: Some(t + p.lead_manufacturer_to_hub),
        }]];
        self.nodes[0].state.enqueue(MANUFACTURER, t + p.lead_manufacturer_to_hub, hub_order);
        for j in 0..p.minis {
            let arrival = place_direct(&mut self.nodes[j + 1].state, direct[j], t, p.lead_direct);
            self.owed[j] += via_hub[j];
            orders.push(vec![
                PlacedOrder { channel: VIA_HUB.to_string(), quantity: via_hub[j], arrival_period: None },
                PlacedOrder { channel: DIRECT.to_string(), quantity: direct[j], arrival_period: Some(arrival) },
            ]);
        }

        let arrivals: Vec<BTreeMap<String, i64>> =
            self.nodes.iter_mut().map(|n| n.state.receive(t)).collect();

        // hub
        let hub_in: i64 = arrivals[0].values().sum();
        let available = self.nodes[0].state.on_hand + hub_in;
        let (shipments, left) = allocate(available, &self.owed);
        for (j, s) in shipments.iter().enumerate() {
            self.owed[j] -= s;
            self.nodes[j + 1].state.enqueue(VIA_HUB, t + p.lead_hub_to_mini, *s);
        }
        self.nodes[0].state.on_hand = left;
        self.nodes[0].state.backlog = self.owed.iter().sum();
        let hub_shipped: i64 = shipments.iter().sum();

        let mut shipped = vec![hub_shipped];
        for j in 0..p.minis {
            let s = &mut self.nodes[j + 1].state;
            s.on_hand += arrivals[j + 1].values().sum::<i64>();
            shipped.push(s.fill(demands[j]));
        }

        let mut records = Vec::with_capacity(roles.len());
        for (i, node) in self.nodes.iter_mut().enumerate() {
            let incoming = if i == 0 { via_hub.iter().sum() } else { demands[i - 1] };
            let placed: i64 = orders[i].iter().map(|o| o.quantity).sum();
            let arrived: i64 = arrivals[i].values().sum();
            node.on_order += placed - arrived;
            node.last_order = Some(placed);
            node.incoming_history.push(incoming);
            let (h, b) = if i == 0 { (p.hub_holding, p.hub_backorder) } else { (p.mini_holding, p.mini_backorder) };
            records.push(NodeRecord {
                role: roles[i].clone(),
                incoming,
                arrivals: arrivals[i].clone(),
                shipped: shipped[i],
                unmet: node.state.backlog,
                on_hand: node.state.on_hand,
                backlog: node.state.backlog,
                orders: orders[i].clone(),
                cost: h * node.state.on_hand + b * node.state.backlog,
                profit: None,
            });
        }
        self.period += 1;
        Ok(PeriodOutcome { demands, nodes: records })
    }
}
