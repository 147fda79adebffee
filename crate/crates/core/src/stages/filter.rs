use super::{Seed, TriggerConfig};
use crate::cost::Ops;
use crate::model::{delta_r2_metered, Event, Particle};

/// Valid particles of one block inside the seed's filter cone, in slot order.
pub fn filter_block(block: &[Particle], seed: &Seed, cfg: &TriggerConfig) -> Vec<Particle> {
    filter_block_metered(block, seed, cfg, &mut Ops::default())
}

pub fn filter_block_metered(
    block: &[Particle],
    seed: &Seed,
    cfg: &TriggerConfig,
    ops: &mut Ops,
) -> Vec<Particle> {
    block
        .iter()
        .filter(|p| {
            if !p.valid {
                return false;
            }
            let d = delta_r2_metered(p.pos, seed.particle.pos, &cfg.limits, ops);
            ops.cmp(1);
            d <= cfg.filter_cone_r2
        })
        .copied()
        .collect()
}

/// All `n_filter_blocks` block outputs for one seed.
pub fn filter_event(event: &Event, seed: &Seed, cfg: &TriggerConfig) -> Vec<Vec<Particle>> {
    filter_event_metered(event, seed, cfg, &mut Ops::default())
}

pub fn filter_event_metered(
    event: &Event,
    seed: &Seed,
    cfg: &TriggerConfig,
    ops: &mut Ops,
) -> Vec<Vec<Particle>> {
    event
        .particles()
        .chunks(cfg.block_size)
        .map(|block| filter_block_metered(block, seed, cfg, ops))
        .collect()
}
