//! Exact validators for the ex-post solution on small instances.
//!
//! [`brute_force_dp`] runs a dynamic program over (order slot, stock level),
//! trying every order quantity in `0..=cap` at every slot.
//! [`exhaustive_search`] enumerates whole order vectors. Neither uses the
//! replenishment-period formula.

use std::collections::VecDeque;

use super::expost::MprInstance;
use super::OracleError;
use crate::money::Money;

/// Largest number of order slots accepted.
pub const SLOT_CAP: usize = 4;
/// Largest per-order quantity bound accepted.
pub const QUANTITY_CAP: i64 = 256;
const EXHAUSTIVE_CAP: u128 = 5_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DpSolution {
    pub orders: Vec<i64>,
    pub total_cost: Money,
}

fn level_cost(level: i64, h: i128, b: i128) -> i128 {
    if level >= 0 {
        h * level as i128
    } else {
        b * (-level) as i128
    }
}

fn simulate(inst: &MprInstance, orders: &[i64]) -> i128 {
    let (h, b) = (inst.holding.raw() as i128, inst.backorder.raw() as i128);
    let mut level = inst.initial_inventory;
    let mut cost = 0;
    for (i, d) in inst.demands.iter().enumerate() {
        let t = i as u32 + 1;
        for (v, q) in inst.arrivals.iter().zip(orders) {
            if *v == t {
                level += q;
            }
        }
        level -= d;
        cost += level_cost(level, h, b);
    }
    cost
}

fn default_cap(inst: &MprInstance) -> i64 {
    inst.demands.iter().sum::<i64>() + (-inst.initial_inventory).max(0)
}

fn check_size(inst: &MprInstance, cap: i64) -> Result<(), OracleError> {
    inst.validate()?;
    if inst.arrivals.len() > SLOT_CAP {
        return Err(OracleError::TooLarge(format!(
            "{} order slots (max {SLOT_CAP})",
            inst.arrivals.len()
        )));
    }
    if !(0..=QUANTITY_CAP).contains(&cap) {
        return Err(OracleError::TooLarge(format!("quantity cap {cap} (max {QUANTITY_CAP})")));
    }
    Ok(())
}

/// Minimum total cost over all order vectors in `0..=cap` per slot.
/// `cap` defaults to total demand plus any initial backorders. Ties resolve
/// to the smallest order at the earliest slot.
pub fn brute_force_dp(inst: &MprInstance, cap: Option<i64>) -> Result<DpSolution, OracleError> {
    let cap = cap.unwrap_or_else(|| default_cap(inst));
    check_size(inst, cap)?;
    let (h, b) = (inst.holding.raw() as i128, inst.backorder.raw() as i128);
    let horizon = inst.demands.len() as u32;
    let demand = |t: u32| inst.demands[t as usize - 1];
    let slots = inst.arrivals.len();

    // uncontrolled periods before the first arrival
    let first = inst.arrivals.first().copied().unwrap_or(horizon + 1).min(horizon + 1);
    let mut start_level = inst.initial_inventory;
    let mut pre_cost = 0i128;
    for t in 1..first {
        start_level -= demand(t);
        pre_cost += level_cost(start_level, h, b);
    }
    if slots == 0 {
        return Ok(DpSolution { orders: vec![], total_cost: Money::from_raw(pre_cost as i64) });
    }

    let lo = inst.initial_inventory - inst.demands.iter().sum::<i64>();
    let hi = inst.initial_inventory.max(0) + cap * slots as i64;
    let width = (hi - lo + 1) as usize;
    let idx = |level: i64| (level - lo) as usize;
    const INF: i128 = i128::MAX / 4;

    let mut value_next = vec![0i128; width];
    let mut choices: Vec<Vec<i64>> = vec![Vec::new(); slots];
    let mut window_demand = vec![0i64; slots];

    for m in (0..slots).rev() {
        let v = inst.arrivals[m];
        let end = inst.arrivals.get(m + 1).copied().unwrap_or(horizon + 1).min(horizon + 1);
        // stock right after this order lands, for every candidate level
        let mut best_after = vec![INF; width];
        for (k, slot) in best_after.iter_mut().enumerate() {
            let x = lo + k as i64;
            let mut level = x;
            let mut cost = 0i128;
            for t in v..end.max(v) {
                level -= demand(t);
                cost += level_cost(level, h, b);
            }
            if level >= lo && value_next[idx(level)] < INF {
                *slot = cost + value_next[idx(level)];
            }
        }
        window_demand[m] = (v..end.max(v)).map(demand).sum();

        // value(I) = min over x in [I, I + cap] of best_after(x)
        let mut value = vec![INF; width];
        let mut choice = vec![0i64; width];
        let mut window: VecDeque<usize> = VecDeque::new();
        for k in (0..width).rev() {
            while window.back().is_some_and(|&j| best_after[j] >= best_after[k]) {
                window.pop_back();
            }
            window.push_back(k);
            while window.front().is_some_and(|&j| j as i64 > k as i64 + cap) {
                window.pop_front();
            }
            let j = *window.front().expect("window holds k");
            value[k] = best_after[j];
            choice[k] = (j - k) as i64;
        }
        choices[m] = choice;
        value_next = value;
    }

    if start_level < lo {
        return Err(OracleError::InvalidInstance("stock below the reachable range".into()));
    }
    let mut orders = Vec::with_capacity(slots);
    let mut level = start_level;
    for m in 0..slots {
        let a = choices[m][idx(level)];
        orders.push(a);
        level = level + a - window_demand[m];
    }
    let total = pre_cost + value_next[idx(start_level)];
    debug_assert_eq!(total, simulate(inst, &orders));
    Ok(DpSolution { orders, total_cost: Money::from_raw(total as i64) })
}

/// Enumerates every order vector in `0..=cap` per slot.
pub fn exhaustive_search(inst: &MprInstance, cap: i64) -> Result<DpSolution, OracleError> {
    check_size(inst, cap)?;
    let slots = inst.arrivals.len();
    let combos = (cap as u128 + 1).pow(slots as u32);
    if combos > EXHAUSTIVE_CAP {
        return Err(OracleError::TooLarge(format!("{combos} order vectors")));
    }
    let mut current = vec![0i64; slots];
    let mut best = (simulate(inst, &current), current.clone());
    loop {
        let mut i = slots;
        loop {
            if i == 0 {
                return Ok(DpSolution { orders: best.1, total_cost: Money::from_raw(best.0 as i64) });
            }
            i -= 1;
            if current[i] < cap {
                current[i] += 1;
                break;
            }
            current[i] = 0;
        }
        let c = simulate(inst, &current);
        if c < best.0 {
            best = (c, current.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::expost::{evaluate_orders, expost_optimal};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(x: i64) -> Money {
        Money::from_units(x)
    }

    fn random_instance(rng: &mut ChaCha8Rng, max_t: u32, max_d: i64) -> MprInstance {
        let t_len = rng.random_range(2..=max_t);
        let slots = rng.random_range(1..=3usize).min(t_len as usize);
        let mut order_periods: Vec<u32> = (1..=t_len).collect();
        // pick distinct review periods
        for i in (1..order_periods.len()).rev() {
            let j = rng.random_range(0..=i);
            order_periods.swap(i, j);
        }
        order_periods.truncate(slots);
        order_periods.sort();
        let mut arrivals = Vec::new();
        let mut prev = 0;
        for t in &order_periods {
            let v = (t + rng.random_range(1..=3)).max(prev);
            arrivals.push(v);
            prev = v;
        }
        MprInstance {
            demands: (0..t_len).map(|_| rng.random_range(0..=max_d)).collect(),
            order_periods,
            arrivals,
            initial_inventory: rng.random_range(-3..=8),
            holding: m(rng.random_range(0..=5)),
            backorder: m(rng.random_range(0..=9)),
        }
    }

    #[test]
    fn zero_demand_orders_nothing() {
        let inst = MprInstance {
            demands: vec![0; 6],
            order_periods: vec![1, 3],
            arrivals: vec![2, 4],
            initial_inventory: 5,
            holding: m(2),
            backorder: m(3),
        };
        let sol = brute_force_dp(&inst, None).unwrap();
        assert_eq!(sol.orders, vec![0, 0]);
        assert_eq!(sol.total_cost, m(2 * 5 * 6));
    }

    #[test]
    fn free_backorders_order_nothing() {
        let inst = MprInstance {
            demands: vec![4, 7, 2, 9, 1],
            order_periods: vec![1, 2],
            arrivals: vec![2, 4],
            initial_inventory: 0,
            holding: m(1),
            backorder: m(0),
        };
        let sol = brute_force_dp(&inst, None).unwrap();
        assert_eq!(sol.orders, vec![0, 0]);
        assert_eq!(sol.total_cost, Money::ZERO);
    }

    #[test]
    fn single_slot_matches_direct_sweep() {
        let inst = MprInstance {
            demands: vec![3, 5, 8, 2, 6, 4],
            order_periods: vec![1],
            arrivals: vec![3],
            initial_inventory: 4,
            holding: m(1),
            backorder: m(4),
        };
        let sweep = (0..=40)
            .map(|q| evaluate_orders(&inst, &[q]).unwrap())
            .min()
            .unwrap();
        assert_eq!(brute_force_dp(&inst, None).unwrap().total_cost, sweep);
        assert_eq!(expost_optimal(&inst).unwrap().total_cost, sweep);
    }

    #[test]
    fn dp_agrees_with_exhaustive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..60 {
            let inst = random_instance(&mut rng, 7, 5);
            let cap = default_cap(&inst);
            if (cap as u128 + 1).pow(inst.arrivals.len() as u32) > EXHAUSTIVE_CAP {
                continue;
            }
            let dp = brute_force_dp(&inst, Some(cap)).unwrap();
            let ex = exhaustive_search(&inst, cap).unwrap();
            assert_eq!(dp.total_cost, ex.total_cost, "{inst:?}");
            assert_eq!(evaluate_orders(&inst, &dp.orders).unwrap(), dp.total_cost);
        }
    }

    #[test]
    fn decomposition_matches_dp_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let inst = random_instance(&mut rng, 12, 20);
            let dp = brute_force_dp(&inst, None).unwrap();
            let sol = expost_optimal(&inst).unwrap();
            assert_eq!(sol.total_cost, dp.total_cost, "{inst:?}");
        }
    }

    #[test]
    fn rejects_oversized_instances() {
        let inst = MprInstance {
            demands: vec![1; 12],
            order_periods: vec![1, 2, 3, 4, 5],
            arrivals: vec![2, 3, 4, 5, 6],
            initial_inventory: 0,
            holding: m(1),
            backorder: m(1),
        };
        assert!(matches!(brute_force_dp(&inst, None), Err(OracleError::TooLarge(_))));
        let inst = MprInstance { order_periods: vec![1], arrivals: vec![2], ..inst };
        assert!(matches!(brute_force_dp(&inst, Some(1000)), Err(OracleError::TooLarge(_))));
    }
}
