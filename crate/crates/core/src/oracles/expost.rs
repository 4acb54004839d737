//! Ex-post optimal order quantities for the multi-period replenishment
//! problem.
//!
//! With all demands and arrival periods known, the problem splits into one
//! window per order: order `m` controls the periods `[v_m, v_{m+1})`. Within
//! a window the cost is piecewise linear in the post-arrival stock, and the
//! minimum sits at the cumulative demand through the replenishment period
//! `s*`. Windows are solved in arrival order so each one starts from the
//! stock left by the earlier optimal orders.

use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::env::mpr::period_cost;
use crate::money::Money;

/// A fully realized replenishment episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MprInstance {
    /// d_1..d_T.
    pub demands: Vec<i64>,
    /// Placement periods t_1..t_M.
    pub order_periods: Vec<u32>,
    /// Arrival periods v_1..v_M (non-decreasing).
    pub arrivals: Vec<u32>,
    pub initial_inventory: i64,
    pub holding: Money,
    pub backorder: Money,
}

impl MprInstance {
    pub fn horizon(&self) -> u32 {
        self.demands.len() as u32
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.order_periods.len() != self.arrivals.len() {
            return Err(OracleError::LengthMismatch {
                left: self.order_periods.len(),
                right: self.arrivals.len(),
            });
        }
        if self.holding.is_negative() || self.backorder.is_negative() {
            return Err(OracleError::NegativeCost);
        }
        if self.demands.iter().any(|d| *d < 0) {
            return Err(OracleError::InvalidInstance("demands must be >= 0".into()));
        }
        for (m, (t, v)) in self.order_periods.iter().zip(&self.arrivals).enumerate() {
            if *t == 0 || v <= t {
                return Err(OracleError::InvalidInstance(format!(
                    "order {m} placed at {t} must arrive strictly later (got {v})"
                )));
            }
        }
        for (m, w) in self.arrivals.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(OracleError::CrossingArrivals { index: m + 1, arrival: w[1], previous: w[0] });
            }
        }
        Ok(())
    }

    /// Cumulative demand over periods `from..=to` (1-based, clipped to the horizon).
    pub fn demand_between(&self, from: u32, to: u32) -> i64 {
        if to < from {
            return 0;
        }
        let lo = from.max(1) as usize - 1;
        let hi = (to as usize).min(self.demands.len());
        if lo >= hi {
            return 0;
        }
        self.demands[lo..hi].iter().sum()
    }

    /// Last period (exclusive) of order `m`'s window.
    fn window_end(&self, m: usize) -> u32 {
        let next = self.arrivals.get(m + 1).copied().unwrap_or(self.horizon() + 1);
        next.min(self.horizon() + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExPostSolution {
    /// a*_m per order slot.
    pub orders: Vec<i64>,
    /// s*_m per order slot.
    pub replenishment_periods: Vec<u32>,
    pub total_cost: Money,
}

/// Optimal replenishment period for a window `[arrival, next_arrival)`:
/// `arrival + floor(b * n / (h + b))`, capped at the window's last period.
/// Empty windows return `arrival`.
pub fn replenishment_period(arrival: u32, next_arrival: u32, holding: Money, backorder: Money) -> u32 {
    let n = next_arrival.saturating_sub(arrival);
    let denom = holding.raw() as i128 + backorder.raw() as i128;
    if n == 0 || denom == 0 {
        return arrival;
    }
    let offset = (backorder.raw() as i128 * n as i128 / denom) as u32;
    arrival + offset.min(n - 1)
}

/// Total cost of an order vector on a realized instance, by direct
/// simulation of the inventory recursion.
pub fn evaluate_orders(inst: &MprInstance, orders: &[i64]) -> Result<Money, OracleError> {
    inst.validate()?;
    if orders.len() != inst.arrivals.len() {
        return Err(OracleError::LengthMismatch { left: orders.len(), right: inst.arrivals.len() });
    }
    let mut level = inst.initial_inventory;
    let mut total = Money::ZERO;
    for (i, d) in inst.demands.iter().enumerate() {
        let t = i as u32 + 1;
        let arrived: i64 = inst
            .arrivals
            .iter()
            .zip(orders)
            .filter(|(v, _)| **v == t)
            .map(|(_, q)| *q)
            .sum();
        level = level - d + arrived;
        total += period_cost(level, inst.holding, inst.backorder);
    }
    Ok(total)
}

/// Ex-post optimal orders by window decomposition.
pub fn expost_optimal(inst: &MprInstance) -> Result<ExPostSolution, OracleError> {
    inst.validate()?;
    let horizon = inst.horizon();
    let mut orders = Vec::with_capacity(inst.arrivals.len());
    let mut periods = Vec::with_capacity(inst.arrivals.len());
    for (m, &v) in inst.arrivals.iter().enumerate() {
        let end = inst.window_end(m);
        if v > horizon || end <= v {
            orders.push(0);
            periods.push(v);
            continue;
        }
        let s = replenishment_period(v, end, inst.holding, inst.backorder);
        // stock at the start of period v, after every earlier order has landed
        let level_at_arrival =
            inst.initial_inventory - inst.demand_between(1, v - 1) + orders.iter().sum::<i64>();
        let target = inst.demand_between(v, s);
        orders.push((target - level_at_arrival).max(0));
        periods.push(s);
    }
    let total_cost = evaluate_orders(inst, &orders)?;
    Ok(ExPostSolution { orders, replenishment_periods: periods, total_cost })
}
