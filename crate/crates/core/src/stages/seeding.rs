use super::{Seed, TriggerConfig};
use crate::cost::Ops;
use crate::model::Event;

/// Up to `n_seeds` charged particles, highest pt first, ties by lower slot.
pub fn select_seeds(event: &Event, cfg: &TriggerConfig) -> Vec<Seed> {
    select_seeds_metered(event, cfg, &mut Ops::default())
}

pub fn select_seeds_metered(event: &Event, cfg: &TriggerConfig, ops: &mut Ops) -> Vec<Seed> {
    let mut seeds: Vec<Seed> = event
        .particles()
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            ops.cmp(1);
            p.valid && p.is_charged() && p.pt >= cfg.min_seed_pt
        })
        .map(|(i, p)| Seed {
            particle: *p,
            source_index: i,
        })
        .collect();
    seeds.sort_by(|a, b| {
        ops.cmp(1);
        b.particle
            .pt
            .cmp(&a.particle.pt)
            .then(a.source_index.cmp(&b.source_index))
    });
    seeds.truncate(cfg.n_seeds);
    seeds
}
