//! The seven stages chained directly, without timing.
//!
//! The per-stage functions here are the exact bodies the dataflow pipeline
//! runs inside its processes, so the pipeline's functional output can only
//! differ from [`run_event`] if the engine reorders or loses tokens.

use crate::cost::Ops;
use crate::model::{Event, Particle};
use crate::stages::{
    self, CandidateList, CleanVariant, MergeVariant, Seed, Tau, TauParams, TriggerConfig, Variants,
};

/// Per-stage operation counters for one or more events.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageOps {
    pub seeding: Ops,
    pub filtering: Ops,
    pub merging: Ops,
    pub signal: Ops,
    pub params: Ops,
    pub reconstruction: Ops,
    pub cleaning: Ops,
    /// Candidate lists that reached the parameter stage non-empty.
    pub param_groups: u64,
    pub signal_candidates: u64,
    pub candidate_lists: u64,
    pub taus_built: u64,
}

/// Every intermediate of one event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventTrace {
    pub seeds: Vec<Seed>,
    /// `blocks[b][s]`: filter block `b` output for seed `s`.
    pub blocks: Vec<Vec<Vec<Particle>>>,
    pub candidates: Vec<CandidateList>,
    /// Per seed: the items the merger dropped.
    pub merge_discarded: Vec<Vec<Particle>>,
    pub signal: Vec<CandidateList>,
    pub params: Vec<TauParams>,
    /// Exactly `n_seeds` slots; missing seeds are invalid taus.
    pub taus: Vec<Tau>,
    pub cleaned: Vec<Tau>,
}

impl EventTrace {
    /// Some seed had more in-cone particles than the candidate limit.
    pub fn overflowed(&self) -> bool {
        self.merge_discarded.iter().any(|d| !d.is_empty())
    }
}

pub fn seed_stage(event: &Event, cfg: &TriggerConfig, ops: &mut Ops) -> Vec<Seed> {
    stages::select_seeds_metered(event, cfg, ops)
}

/// Returns `blocks[b][s]`.
pub fn filter_stage(
    event: &Event,
    seeds: &[Seed],
    cfg: &TriggerConfig,
    ops: &mut Ops,
) -> Vec<Vec<Vec<Particle>>> {
    let mut blocks = vec![Vec::with_capacity(seeds.len()); cfg.n_filter_blocks];
    for seed in seeds {
        for (b, chunk) in event.particles().chunks(cfg.block_size).enumerate() {
            blocks[b].push(stages::filter_block_metered(chunk, seed, cfg, ops));
        }
    }
    blocks
}

/// Returns the candidate lists and, per seed, the discarded items.
pub fn merge_stage(
    blocks: &[Vec<Vec<Particle>>],
    seeds: &[Seed],
    cfg: &TriggerConfig,
    variant: MergeVariant,
    ops: &mut Ops,
) -> (Vec<CandidateList>, Vec<Vec<Particle>>) {
    let mut lists = Vec::with_capacity(seeds.len());
    let mut discarded = Vec::with_capacity(seeds.len());
    for (s, seed) in seeds.iter().enumerate() {
        let sources: Vec<Vec<Particle>> = blocks.iter().map(|b| b[s].clone()).collect();
        let (out, dropped) = stages::merge_with(variant, &sources, cfg.max_candidates);
        ops.add(out.len() as u64);
        lists.push(CandidateList::new(*seed, out, &cfg.limits));
        discarded.push(dropped);
    }
    (lists, discarded)
}

pub fn signal_stage(
    lists: &[CandidateList],
    cfg: &TriggerConfig,
    ops: &mut Ops,
) -> Vec<CandidateList> {
    lists
        .iter()
        .map(|l| stages::select_signal_candidates_metered(l, cfg, ops))
        .collect()
}

pub fn params_stage(lists: &[CandidateList], cfg: &TriggerConfig, ops: &mut Ops) -> Vec<TauParams> {
    lists
        .iter()
        .map(|l| stages::compute_tau_params_metered(l, &cfg.limits, ops))
        .collect()
}

/// Pads to `n_seeds` slots.
pub fn reconstruction_stage(params: &[TauParams], cfg: &TriggerConfig, ops: &mut Ops) -> Vec<Tau> {
    let mut taus: Vec<Tau> = params
        .iter()
        .map(|p| {
            ops.cmp(1);
            stages::reconstruct_tau(p, cfg)
        })
        .collect();
    taus.resize(cfg.n_seeds, Tau::INVALID);
    taus
}

pub fn cleaning_stage(
    taus: &[Tau],
    cfg: &TriggerConfig,
    variant: CleanVariant,
    ops: &mut Ops,
) -> Vec<Tau> {
    match variant {
        CleanVariant::A => stages::clean_solution_a_metered(taus, cfg, ops),
        CleanVariant::B => stages::clean_solution_b_metered(taus, cfg, ops),
    }
}

pub fn run_event_traced(
    event: &Event,
    cfg: &TriggerConfig,
    variants: Variants,
    ops: &mut StageOps,
) -> EventTrace {
    let seeds = seed_stage(event, cfg, &mut ops.seeding);
    let blocks = filter_stage(event, &seeds, cfg, &mut ops.filtering);
    let (candidates, merge_discarded) =
        merge_stage(&blocks, &seeds, cfg, variants.merge, &mut ops.merging);
    ops.candidate_lists += candidates.len() as u64;
    let signal = signal_stage(&candidates, cfg, &mut ops.signal);
    ops.signal_candidates += candidates
        .iter()
        .map(|c| c.candidates.len() as u64)
        .sum::<u64>();
    let params = params_stage(&signal, cfg, &mut ops.params);
    ops.param_groups += signal.iter().filter(|l| !l.candidates.is_empty()).count() as u64;
    let taus = reconstruction_stage(&params, cfg, &mut ops.reconstruction);
    ops.taus_built += taus.len() as u64;
    let cleaned = cleaning_stage(&taus, cfg, variants.clean, &mut ops.cleaning);
    EventTrace {
        seeds,
        blocks,
        candidates,
        merge_discarded,
        signal,
        params,
        taus,
        cleaned,
    }
}

/// Final taus of one event.
pub fn run_event(event: &Event, cfg: &TriggerConfig, variants: Variants) -> Vec<Tau> {
    run_event_traced(event, cfg, variants, &mut StageOps::default()).cleaned
}
