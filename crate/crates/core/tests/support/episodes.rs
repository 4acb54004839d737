//! Random episodes: parameters, horizon and agents drawn from a seed.

use invsim::env::{BgParams, MprParams, NvpParams, ScnParams, TwnParams};
use invsim::process::Distribution;
use invsim::rng::stream_rng;
use invsim::{run_episode, AgentSpec, EnvId, EnvParams, EpisodeLog, Money, SimConfig};
use rand::Rng;

fn poisson(rng: &mut impl Rng, max: u32) -> Distribution {
    Distribution::Poisson { lambda: rng.random_range(1..=max) as f64 }
}

fn multi_agent_spec(rng: &mut impl Rng, high: i64) -> AgentSpec {
    match rng.random_range(0..4) {
        0 => AgentSpec::Random { low: 0, high },
        1 => AgentSpec::BaseStock { level: rng.random_range(0..=3 * high) },
        2 => AgentSpec::OrderUpTo { cover: None },
        _ => AgentSpec::DemandChaser,
    }
}

pub fn random_params(env: EnvId, rng: &mut impl Rng) -> EnvParams {
    match env {
        EnvId::Nvp => EnvParams::Nvp(NvpParams {
            demand: Distribution::UniformInt { low: 0, high: rng.random_range(1..=300) },
            ..NvpParams::default()
        }),
        EnvId::Mpr => EnvParams::Mpr(MprParams {
            initial_inventory: rng.random_range(0..=20),
            holding: Money::from_units(rng.random_range(1..=3)),
            backorder: Money::from_units(rng.random_range(1..=12)),
            demand: poisson(rng, 15),
            lead_time: Distribution::UniformInt { low: 1, high: rng.random_range(1..=5) },
            review_every: rng.random_range(1..=3),
            first_review: rng.random_range(1..=3),
            review_periods: None,
        }),
        EnvId::Bg => EnvParams::Bg(BgParams {
            lead_time: rng.random_range(1..=3),
            initial_inventory: rng.random_range(0..=15),
            initial_pipeline: rng.random_range(0..=6),
            demand: poisson(rng, 8),
            ..BgParams::default()
        }),
        EnvId::Twn => {
            let hub_to_mini = rng.random_range(1..=2);
            let direct = rng.random_range(hub_to_mini + 1..=hub_to_mini + 2);
            EnvParams::Twn(TwnParams {
                minis: rng.random_range(1..=4),
                lead_hub_to_mini: hub_to_mini,
                lead_direct: direct,
                lead_manufacturer_to_hub: rng.random_range(direct - hub_to_mini + 1..=direct + 2),
                hub_initial_inventory: rng.random_range(0..=30),
                mini_initial_inventory: rng.random_range(0..=15),
                demand: poisson(rng, 8),
                ..TwnParams::default()
            })
        }
        EnvId::Scn => {
            let regular = rng.random_range(2..=5);
            EnvParams::Scn(ScnParams {
                lead_regular: regular,
                lead_expedited: rng.random_range(1..regular),
                initial_inventory: rng.random_range(0..=30),
                demand: poisson(rng, 15),
                ..ScnParams::default()
            })
        }
    }
}

/// One episode of `env` with everything drawn from `seed`.
pub fn random_episode(env: EnvId, seed: u64) -> EpisodeLog {
    let mut rng = stream_rng(seed, "test/episode");
    let params = random_params(env, &mut rng);
    let mut config = SimConfig::new(params, rng.random_range(1..=30), seed);
    config.info_sharing = config.env.is_multi_agent() && rng.random_bool(0.5);
    config.memory_window = rng.random_range(0..=3);
    let mut agents: Vec<_> = config
        .env
        .roles()
        .iter()
        .map(|role| {
            let spec = match env {
                EnvId::Nvp => AgentSpec::Random { low: 0, high: 300 },
                EnvId::Mpr => AgentSpec::Random { low: 0, high: 40 },
                EnvId::Scn => AgentSpec::Random { low: 0, high: 20 },
                EnvId::Bg | EnvId::Twn => multi_agent_spec(&mut rng, 12),
            };
            spec.build(role, seed).expect("scripted agents build")
        })
        .collect();
    run_episode(&config, &mut agents).expect("random episode runs")
}
