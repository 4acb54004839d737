//! Behavioral-bias estimators and operating metrics over episode logs.

use serde::{Deserialize, Serialize};

use crate::env::EnvParams;
use crate::kernel::EpisodeLog;
use crate::model::EnvId;
use crate::money::Money;
use crate::oracles::{distance_to_optimal, expost_optimal, newsvendor_q_star, MprInstance};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("undefined: {0}")]
    Undefined(&'static str),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} observations, got {got}")]
    TooShort { need: usize, got: usize },
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub fn population_std(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn floats(xs: &[i64]) -> Vec<f64> {
    xs.iter().map(|x| *x as f64).collect()
}

/// `1 - mean_t((q_t - mu) / (q* - mu))`.
pub fn anchoring_alpha(orders: &[i64], mean_demand: f64, q_star: f64) -> Result<f64, MetricError> {
    if orders.is_empty() {
        return Err(MetricError::TooShort { need: 1, got: 0 });
    }
    let gap = q_star - mean_demand;
    if gap == 0.0 {
        return Err(MetricError::Undefined("optimal order equals mean demand"));
    }
    let adjust: Vec<f64> = orders.iter().map(|q| (*q as f64 - mean_demand) / gap).collect();
    Ok(1.0 - mean(&adjust))
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, MetricError> {
    if xs.len() != ys.len() {
        return Err(MetricError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(MetricError::TooShort { need: 2, got: xs.len() });
    }
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricError::Undefined("zero variance"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation of `orders[i]` with `prior_demands[i]`, where each order was
/// placed the period after its paired demand.
pub fn demand_chasing_rho(orders: &[i64], prior_demands: &[i64]) -> Result<f64, MetricError> {
    pearson(&floats(orders), &floats(prior_demands))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bullwhip {
    /// One ratio per link, customer demand to first stage first.
    pub per_link: Vec<Option<f64>>,
    /// Topmost orders over customer demand.
    pub end_to_end: Option<f64>,
}

/// `std(upstream) / std(downstream)`.
pub fn bullwhip_ratio(upstream: &[i64], downstream: &[i64]) -> Result<f64, MetricError> {
    if upstream.len() != downstream.len() {
        return Err(MetricError::LengthMismatch(upstream.len(), downstream.len()));
    }
    if upstream.len() < 2 {
        return Err(MetricError::TooShort { need: 2, got: upstream.len() });
    }
    let down = population_std(&floats(downstream));
    if down == 0.0 {
        return Err(MetricError::Undefined("downstream series has zero variance"));
    }
    Ok(population_std(&floats(upstream)) / down)
}

/// `orders` runs downstream to upstream.
pub fn bullwhip(orders: &[Vec<i64>], customer_demand: &[i64]) -> Result<Bullwhip, MetricError> {
    for o in orders {
        if o.len() != customer_demand.len() {
            return Err(MetricError::LengthMismatch(o.len(), customer_demand.len()));
        }
    }
    if customer_demand.len() < 2 {
        return Err(MetricError::TooShort { need: 2, got: customer_demand.len() });
    }
    let mut per_link = Vec::with_capacity(orders.len());
    let mut below = customer_demand;
    for o in orders {
        per_link.push(bullwhip_ratio(o, below).ok());
        below = o;
    }
    let end_to_end = orders.last().and_then(|top| bullwhip_ratio(top, customer_demand).ok());
    Ok(Bullwhip { per_link, end_to_end })
}

pub fn avg_cost(costs: &[Money]) -> Result<f64, MetricError> {
    if costs.is_empty() {
        return Err(MetricError::TooShort { need: 1, got: 0 });
    }
    Ok(costs.iter().copied().sum::<Money>().to_f64() / costs.len() as f64)
}

/// Summed non-negative on-hand stock over summed demand.
pub fn turnover_rate(inventories: &[i64], demands: &[i64]) -> Result<f64, MetricError> {
    let stock: i64 = inventories.iter().map(|i| (*i).max(0)).sum();
    let demand: i64 = demands.iter().sum();
    if demand == 0 {
        return Err(MetricError::Undefined("total demand is zero"));
    }
    Ok(stock as f64 / demand as f64)
}

/// Share of periods with unfilled demand.
pub fn stockout_rate(stocked_out: &[bool]) -> Result<f64, MetricError> {
    if stocked_out.is_empty() {
        return Err(MetricError::TooShort { need: 1, got: 0 });
    }
    Ok(stocked_out.iter().filter(|s| **s).count() as f64 / stocked_out.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub env: EnvId,
    pub periods: u32,
    pub anchoring_alpha: Option<f64>,
    pub demand_chasing_rho: Option<f64>,
    pub bullwhip_per_link: Vec<Option<f64>>,
    pub bullwhip_end_to_end: Option<f64>,
    /// System cost per period (negative profit in the newsvendor).
    pub avg_cost: f64,
    pub turnover_rate: Option<f64>,
    /// Per role, in role order.
    pub stockout_rate: Vec<f64>,
    pub stockout_rate_sum: f64,
    pub distance: Option<f64>,
    pub expost_cost: Option<f64>,
}

/// Node whose incoming stream is exogenous demand.
fn demand_node(env: EnvId) -> usize {
    if env == EnvId::Twn {
        1
    } else {
        0
    }
}

/// The realized MPR instance of a log: demands, order periods and arrivals.
pub fn mpr_instance(log: &EpisodeLog) -> Option<MprInstance> {
    let EnvParams::Mpr(p) = &log.config.env else { return None };
    let mut order_periods = Vec::new();
    let mut arrivals = Vec::new();
    for step in &log.steps {
        for o in &step.agents[0].outcome.orders {
            order_periods.push(step.period);
            arrivals.push(o.arrival_period?);
        }
    }
    Some(MprInstance {
        demands: log.steps.iter().map(|s| s.demands[0]).collect(),
        order_periods,
        arrivals,
        initial_inventory: p.initial_inventory,
        holding: p.holding,
        backorder: p.backorder,
    })
}

fn nvp_alpha(log: &EpisodeLog) -> Option<f64> {
    let EnvParams::Nvp(p) = &log.config.env else { return None };
    let mu = p.demand.mean()?;
    let q_star = newsvendor_q_star(&p.demand, p.underage(), p.overage()).ok()?;
    anchoring_alpha(&log.orders(0), mu, q_star as f64).ok()
}

fn rho(log: &EpisodeLog) -> Option<f64> {
    let node = demand_node(log.config.env.id());
    let mut orders = Vec::new();
    let mut prior = Vec::new();
    for w in log.steps.windows(2) {
        let now = &w[1].agents[node];
        if now.action.is_some() {
            orders.push(now.outcome.ordered());
            prior.push(w[0].agents[node].outcome.incoming);
        }
    }
    demand_chasing_rho(&orders, &prior).ok()
}

fn bg_bullwhip(log: &EpisodeLog) -> Option<Bullwhip> {
    if log.config.env.id() != EnvId::Bg {
        return None;
    }
    let demand: Vec<i64> = log.steps.iter().map(|s| s.demands[0]).collect();
    let orders: Vec<Vec<i64>> = (0..log.roles.len()).map(|i| log.orders(i)).collect();
    bullwhip(&orders, &demand).ok()
}

fn distance(log: &EpisodeLog) -> Option<(f64, f64)> {
    let inst = mpr_instance(log)?;
    let actual: Vec<i64> = log.steps.iter().flat_map(|s| s.agents[0].outcome.orders.iter().map(|o| o.quantity)).collect();
    let best = expost_optimal(&inst).ok()?;
    Some((distance_to_optimal(&actual, &best.orders).ok()?, best.total_cost.to_f64()))
}

impl MetricsReport {
    pub fn from_log(log: &EpisodeLog) -> Self {
        let env = log.config.env.id();
        let periods = log.steps.len() as u32;
        let costs: Vec<Money> = log.steps.iter().map(|s| s.agents.iter().map(|a| a.outcome.cost).sum()).collect();
        let stock: Vec<i64> = log.steps.iter().flat_map(|s| s.agents.iter().map(|a| a.outcome.on_hand)).collect();
        let demand: Vec<i64> = log.steps.iter().flat_map(|s| s.demands.iter().copied()).collect();
        let stockout_rate: Vec<f64> = (0..log.roles.len())
            .map(|i| {
                let flags: Vec<bool> = log.steps.iter().map(|s| s.agents[i].outcome.stocked_out()).collect();
                stockout_rate(&flags).unwrap_or(0.0)
            })
            .collect();
        let bw = bg_bullwhip(log);
        let dist = distance(log);
        MetricsReport {
            env,
            periods,
            anchoring_alpha: nvp_alpha(log),
            demand_chasing_rho: rho(log),
            bullwhip_per_link: bw.as_ref().map(|b| b.per_link.clone()).unwrap_or_default(),
            bullwhip_end_to_end: bw.and_then(|b| b.end_to_end),
            avg_cost: avg_cost(&costs).unwrap_or(0.0),
            turnover_rate: turnover_rate(&stock, &demand).ok(),
            stockout_rate_sum: stockout_rate.iter().sum(),
            stockout_rate,
            distance: dist.map(|d| d.0),
            expost_cost: dist.map(|d| d.1),
        }
    }
}
