//! Independent checks over a finished episode log. Everything here is
//! recomputed from the logged records and the environment parameters, never
//! from environment internals.

use std::collections::BTreeMap;

use invsim::env::{EnvParams, NodeRecord};
use invsim::metrics::MetricsReport;
use invsim::EpisodeLog;

fn level(r: &NodeRecord) -> i64 {
    r.on_hand - r.backlog
}

fn on(map: &BTreeMap<String, i64>, channel: &str) -> i64 {
    map.get(channel).copied().unwrap_or(0)
}

fn node(log: &EpisodeLog, t: usize, i: usize) -> &NodeRecord {
    &log.steps[t].agents[i].outcome
}

/// Stock balance at node `i`: each period's level is the previous level plus
/// arrivals minus what was asked of it.
fn balance(log: &EpisodeLog, i: usize, start: i64, out: &mut Vec<String>) {
    let mut prev = start;
    for (t, s) in log.steps.iter().enumerate() {
        let r = &s.agents[i].outcome;
        if level(r) != prev + r.arrived() - r.incoming {
            out.push(format!(
                "{} period {}: level {} != {} + {} - {}",
                r.role,
                t + 1,
                level(r),
                prev,
                r.arrived(),
                r.incoming
            ));
        }
        if r.on_hand > 0 && r.backlog > 0 {
            out.push(format!("{} period {}: stock and backlog both positive", r.role, t + 1));
        }
        prev = level(r);
    }
}

/// Quantity placed on `channel` by node `i` in period `t` (1-based), zero outside the log.
fn placed(log: &EpisodeLog, t: i64, i: usize, channel: &str) -> i64 {
    if t < 1 {
        return 0;
    }
    node(log, t as usize - 1, i).ordered_on(channel)
}

fn check_nvp(log: &EpisodeLog, out: &mut Vec<String>) {
    for (t, s) in log.steps.iter().enumerate() {
        let r = &s.agents[0].outcome;
        let q = r.ordered();
        let d = s.demands[0];
        if r.arrived() != q || r.shipped != q.min(d) || r.shipped + r.on_hand != q || r.shipped + r.unmet != d {
            out.push(format!("newsvendor period {}: q={q} d={d} sold={} left={} unmet={}", t + 1, r.shipped, r.on_hand, r.unmet));
        }
    }
}

fn check_mpr(log: &EpisodeLog, initial: i64, out: &mut Vec<String>) {
    let horizon = log.steps.len() as u32;
    let placed: Vec<(u32, i64)> = log
        .steps
        .iter()
        .flat_map(|s| s.agents[0].outcome.orders.iter().map(|o| (o.arrival_period.unwrap_or(0), o.quantity)))
        .collect();
    for w in placed.windows(2) {
        if w[1].0 < w[0].0 {
            out.push(format!("arrival {} overtakes {}", w[1].0, w[0].0));
        }
    }
    for (t, s) in log.steps.iter().enumerate() {
        let due: i64 = placed.iter().filter(|(v, _)| *v == t as u32 + 1).map(|(_, q)| q).sum();
        if s.agents[0].outcome.arrived() != due {
            out.push(format!("period {}: arrived {} but {} was due", t + 1, s.agents[0].outcome.arrived(), due));
        }
    }
    balance(log, 0, initial, out);
    // I_{T+1} = I_1 - sum of demand + arrivals that matured within the horizon
    let matured: i64 = placed.iter().filter(|(v, _)| *v <= horizon).map(|(_, q)| q).sum();
    let demand: i64 = log.steps.iter().map(|s| s.demands[0]).sum();
    if let Some(last) = log.steps.last() {
        let end = level(&last.agents[0].outcome);
        if end != initial - demand + matured {
            out.push(format!("telescoping: final level {end} != {initial} - {demand} + {matured}"));
        }
    }
}

fn check_bg(log: &EpisodeLog, lead: i64, initial: i64, pipeline: i64, out: &mut Vec<String>) {
    let n = log.roles.len();
    for t in 1..=log.steps.len() as i64 {
        let s = &log.steps[t as usize - 1];
        if s.agents[0].outcome.incoming != s.demands[0] {
            out.push(format!("period {t}: retailer saw {} of demand {}", s.agents[0].outcome.incoming, s.demands[0]));
        }
        for i in 0..n {
            let r = &s.agents[i].outcome;
            if i > 0 && r.incoming != s.agents[i - 1].outcome.ordered() {
                out.push(format!("period {t}: {} received order {} but {} ordered {}", r.role, r.incoming, log.roles[i - 1], s.agents[i - 1].outcome.ordered()));
            }
            let expected = if t <= lead {
                pipeline
            } else if i + 1 < n {
                node(log, (t - lead) as usize - 1, i + 1).shipped
            } else {
                node(log, (t - lead) as usize - 1, i).ordered()
            };
            if r.arrived() != expected {
                out.push(format!("period {t}: {} received {} but {} left upstream", r.role, r.arrived(), expected));
            }
        }
    }
    for i in 0..n {
        balance(log, i, initial, out);
    }
}

fn check_twn(log: &EpisodeLog, p: &invsim::env::TwnParams, out: &mut Vec<String>) {
    use invsim::env::twn::{DIRECT, MANUFACTURER, VIA_HUB};
    let (mh, hm, dl) = (p.lead_manufacturer_to_hub as i64, p.lead_hub_to_mini as i64, p.lead_direct as i64);
    for t in 1..=log.steps.len() as i64 {
        let s = &log.steps[t as usize - 1];
        let hub = &s.agents[0].outcome;
        if on(&hub.arrivals, MANUFACTURER) != placed(log, t - mh, 0, MANUFACTURER) {
            out.push(format!("period {t}: hub receipt {} differs from its order", on(&hub.arrivals, MANUFACTURER)));
        }
        let asked: i64 = (1..=p.minis).map(|j| s.agents[j].outcome.ordered_on(VIA_HUB)).sum();
        if hub.incoming != asked {
            out.push(format!("period {t}: hub saw {} of {asked} ordered", hub.incoming));
        }
        let from_hub: i64 = (1..=p.minis).map(|j| on(&s.agents[j].outcome.arrivals, VIA_HUB)).sum();
        let sent = if t > hm { node(log, (t - hm) as usize - 1, 0).shipped } else { 0 };
        if from_hub != sent {
            out.push(format!("period {t}: minis received {from_hub} from the hub, hub sent {sent}"));
        }
        for j in 1..=p.minis {
            let r = &s.agents[j].outcome;
            if on(&r.arrivals, DIRECT) != placed(log, t - dl, j, DIRECT) {
                out.push(format!("period {t}: {} direct receipt mismatch", r.role));
            }
            if r.incoming != s.demands[j - 1] {
                out.push(format!("period {t}: {} demand mismatch", r.role));
            }
        }
    }
    balance(log, 0, p.hub_initial_inventory, out);
    for j in 1..=p.minis {
        balance(log, j, p.mini_initial_inventory, out);
    }
}

fn check_scn(log: &EpisodeLog, p: &invsim::env::ScnParams, out: &mut Vec<String>) {
    use invsim::env::scn::{EXPEDITED, REGULAR};
    for t in 1..=log.steps.len() as i64 {
        let r = node(log, t as usize - 1, 0);
        for (channel, lead) in [(REGULAR, p.lead_regular), (EXPEDITED, p.lead_expedited)] {
            if on(&r.arrivals, channel) != placed(log, t - lead as i64, 0, channel) {
                out.push(format!("period {t}: {channel} receipt mismatch"));
            }
        }
    }
    balance(log, 0, p.initial_inventory, out);
}

/// Every violated invariant, empty when the log is sound.
pub fn violations(log: &EpisodeLog) -> Vec<String> {
    let mut out = Vec::new();
    if let Err(e) = log.check_consistency() {
        out.push(e);
    }
    match &log.config.env {
        EnvParams::Nvp(_) => check_nvp(log, &mut out),
        EnvParams::Mpr(p) => check_mpr(log, p.initial_inventory, &mut out),
        EnvParams::Bg(p) => check_bg(log, p.lead_time as i64, p.initial_inventory, p.initial_pipeline, &mut out),
        EnvParams::Twn(p) => check_twn(log, p, &mut out),
        EnvParams::Scn(p) => check_scn(log, p, &mut out),
    }
    for (i, sr) in MetricsReport::from_log(log).stockout_rate.iter().enumerate() {
        if !(0.0..=1.0).contains(sr) {
            out.push(format!("{}: stockout rate {sr} outside [0, 1]", log.roles[i]));
        }
    }
    out
}
