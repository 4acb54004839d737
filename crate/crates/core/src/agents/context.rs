//! Neutral plain-text rendering of an observation, shipped in every
//! `observe` message so bridges need no environment knowledge. Framing
//! sentences are the bridge's business and never appear here.

use std::fmt::Write;

use crate::memory::MemoryWindow;
use crate::model::{EnvId, Observation};

fn env_name(env: EnvId) -> &'static str {
    match env {
        EnvId::Nvp => "single-period newsvendor",
        EnvId::Mpr => "multi-period replenishment with stochastic lead time",
        EnvId::Bg => "four-stage beer game",
        EnvId::Twn => "two-level warehouse network",
        EnvId::Scn => "dual-sourcing supply chain",
    }
}

pub fn render_context(obs: &Observation, memory: &MemoryWindow) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Environment: {} ({}).", env_name(obs.env), obs.env);
    let _ = writeln!(s, "Role: {}. Period {} of {}.", obs.role, obs.period, obs.horizon);
    let _ = writeln!(s, "On hand: {}. Backlog: {}. On order: {}.", obs.on_hand, obs.backlog, obs.on_order);
    if obs.pipeline.is_empty() {
        let _ = writeln!(s, "Nothing in transit.");
    } else {
        let items: Vec<String> = obs
            .pipeline
            .iter()
            .map(|p| format!("{} units via {} arriving in period {}", p.quantity, p.channel, p.arrival_period))
            .collect();
        let _ = writeln!(s, "In transit: {}.", items.join("; "));
    }
    let costs: Vec<String> = obs.costs.iter().map(|(k, v)| format!("{k} {v}")).collect();
    let _ = writeln!(s, "Costs per unit: {}.", costs.join(", "));
    if let Some(d) = &obs.demand {
        let _ = writeln!(s, "Demand: {}.", d.describe());
    }
    if !obs.lead_times.is_empty() {
        let lt: Vec<String> = obs.lead_times.iter().map(|(k, v)| format!("{k} {v}")).collect();
        let _ = writeln!(s, "Lead times in periods: {}.", lt.join(", "));
    }
    if let Some(l) = &obs.lead_time {
        let _ = writeln!(s, "Lead time: {}.", l.describe());
    }
    match obs.last_demand {
        Some(d) => {
            let _ = writeln!(s, "Last period's demand: {d}.");
        }
        None => {
            let _ = writeln!(s, "No demand observed yet.");
        }
    }
    if !obs.history.is_empty() {
        let h: Vec<String> = obs.history.iter().map(i64::to_string).collect();
        let _ = writeln!(s, "Past demands, oldest first: {}.", h.join(", "));
    }
    if let Some(partners) = &obs.partners {
        for p in partners {
            let last = p.last_order.map_or_else(|| "none".to_string(), |q| q.to_string());
            let _ = writeln!(
                s,
                "Partner {}: on hand {}, backlog {}, last order {}.",
                p.role, p.on_hand, p.backlog, last
            );
        }
    }
    for entry in memory.entries() {
        let orders: Vec<String> = entry.action.orders.iter().map(|(k, v)| format!("{k} {v}")).collect();
        let _ = writeln!(
            s,
            "Memory, period {}: on hand {}, backlog {}, ordered {}.",
            entry.observation.period,
            entry.observation.on_hand,
            entry.observation.backlog,
            orders.join(", ")
        );
    }
    let _ = write!(s, "Order a non-negative integer quantity on: {}.", obs.channels.join(", "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::EnvParams;
    use crate::model::Action;

    #[test]
    fn nvp_context_mentions_prices_and_demand() {
        let env = EnvParams::default_for(EnvId::Nvp).build(20, 1).unwrap();
        let obs = env.observe(0, false);
        let text = render_context(&obs, &MemoryWindow::new(3));
        assert!(text.contains("revenue 12"), "{text}");
        assert!(text.contains("unit_cost 3"), "{text}");
        assert!(text.contains("0..=300") || text.contains("300"), "{text}");
        assert!(text.ends_with("Order a non-negative integer quantity on: order."));
    }

    #[test]
    fn partners_only_with_sharing() {
        let env = EnvParams::default_for(EnvId::Bg).build(20, 1).unwrap();
        let off = render_context(&env.observe(1, false), &MemoryWindow::new(0));
        let on = render_context(&env.observe(1, true), &MemoryWindow::new(0));
        assert!(!off.contains("Partner"));
        assert!(on.contains("Partner retailer"));
    }

    #[test]
    fn memory_lines_are_rendered() {
        let env = EnvParams::default_for(EnvId::Nvp).build(20, 1).unwrap();
        let obs = env.observe(0, false);
        let mut mem = MemoryWindow::new(2);
        mem.push(obs.clone(), Action::single("order", 99));
        assert!(render_context(&obs, &mem).contains("ordered order 99"));
    }
}
