//! The trigger wired as a seven-stage dataflow pipeline.
//!
//! Each stage process calls the same per-stage function as the direct chain
//! in [`crate::trigger`]. The filter stage fans out one channel per filter
//! block into the merger; those four channels are FIFOs for merge solution A
//! and ping-pong buffers for solution B.

use crate::cost::Ops;
use crate::engine::{
    ChannelSpec, EngineConfig, Node, Pipeline, PipelineMetrics, Process, SourceMode, StageSpec,
};
use crate::error::{ConfigError, EngineError};
use crate::model::{Event, Particle};
use crate::stages::{
    CandidateList, CleanVariant, MergeVariant, Seed, Tau, TauParams, TriggerConfig, Variants,
    MERGE_SOURCES,
};
use crate::trigger;

pub const STAGE_NAMES: [&str; 7] = [
    "seeding",
    "filtering",
    "merging",
    "signal_selection",
    "tau_params",
    "tau_reconstruction",
    "tau_cleaning",
];

/// Hop names, one per consumer: the seven stages, then the sink.
pub const HOP_NAMES: [&str; 8] = [
    "seeding",
    "filtering",
    "merging",
    "signal_selection",
    "tau_params",
    "tau_reconstruction",
    "tau_cleaning",
    "sink",
];

/// Built-in `(latency, ii, start_offset)` for stage `idx` under `v`.
pub fn default_stage_timing(idx: usize, v: Variants) -> (u64, u64, u64) {
    match idx {
        0 => (43, 43, 0),
        1 => (38, 38, 0),
        2 => match v.merge {
            MergeVariant::A => (38, 34, 0),
            MergeVariant::B => (33, 33, 0),
        },
        3 => (37, 36, 0),
        4 => (59, 35, 3),
        5 => (1, 1, 0),
        6 => match v.clean {
            CleanVariant::A => (13, 13, 0),
            CleanVariant::B => (15, 13, 0),
        },
        _ => panic!("stage index {idx} out of range"),
    }
}

/// Explicit per-stage timing that overrides the variant defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StageOverride {
    pub latency: Option<u64>,
    pub ii: Option<u64>,
    pub offset: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimingConfig {
    pub overrides: [StageOverride; 7],
    /// Handshake cycles of the channels into each entry of [`HOP_NAMES`].
    pub handshake: [u64; 8],
    pub fifo_depth: usize,
    pub source: SourceMode,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            overrides: [StageOverride::default(); 7],
            handshake: [1, 1, 2, 1, 1, 1, 1, 0],
            fifo_depth: 32,
            source: SourceMode::Saturate,
        }
    }
}

impl TimingConfig {
    pub fn stage_table(&self, v: Variants) -> Vec<StageSpec> {
        (0..STAGE_NAMES.len())
            .map(|i| {
                let (l, ii, off) = default_stage_timing(i, v);
                let o = self.overrides[i];
                StageSpec::new(STAGE_NAMES[i], o.latency.unwrap_or(l), o.ii.unwrap_or(ii))
                    .with_offset(o.offset.unwrap_or(off))
            })
            .collect()
    }

    /// Total handshake along the source-to-sink path.
    pub fn arrangement_overhead(&self) -> u64 {
        self.handshake.iter().sum()
    }

    pub fn without_handshake(&self) -> Self {
        TimingConfig {
            handshake: [0; 8],
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.fifo_depth == 0 {
            return Err(ConfigError::Invariant("fifo_depth >= 1 violated".into()));
        }
        if let SourceMode::Periodic(0) = self.source {
            return Err(ConfigError::Invariant(
                "arrival_interval >= 1 violated".into(),
            ));
        }
        for v in Variants::ALL {
            for s in self.stage_table(v) {
                if s.ii_cycles == 0 {
                    return Err(ConfigError::Invariant(format!(
                        "stage.{}.ii >= 1 violated",
                        s.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Values flowing between trigger stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Event(Event),
    Seeded {
        event: Event,
        seeds: Vec<Seed>,
    },
    /// One filter block's output: a particle list per seed.
    Block {
        seeds: Vec<Seed>,
        lists: Vec<Vec<Particle>>,
    },
    Lists(Vec<CandidateList>),
    Params(Vec<TauParams>),
    Taus(Vec<Tau>),
}

fn unexpected(stage: &str, t: &Token) -> ! {
    panic!("stage `{stage}` received unexpected token {t:?}")
}

fn processes(cfg: &TriggerConfig, v: Variants) -> Vec<Process<Token>> {
    let c = cfg.clone();
    let seeding: Process<Token> = Box::new(move |mut ins| match ins.remove(0) {
        Token::Event(event) => {
            let seeds = trigger::seed_stage(&event, &c, &mut Ops::default());
            vec![Token::Seeded { event, seeds }]
        }
        t => unexpected("seeding", &t),
    });
    let c = cfg.clone();
    let filtering: Process<Token> = Box::new(move |mut ins| match ins.remove(0) {
        Token::Seeded { event, seeds } => {
            let blocks = trigger::filter_stage(&event, &seeds, &c, &mut Ops::default());
            blocks
                .into_iter()
                .map(|lists| Token::Block {
                    seeds: seeds.clone(),
                    lists,
                })
                .collect()
        }
        t => unexpected("filtering", &t),
    });
    let c = cfg.clone();
    let merging: Process<Token> = Box::new(move |ins| {
        let mut seeds = Vec::new();
        let mut blocks = Vec::with_capacity(ins.len());
        for t in ins {
            match t {
                Token::Block { seeds: s, lists } => {
                    seeds = s;
                    blocks.push(lists);
                }
                t => unexpected("merging", &t),
            }
        }
        let (lists, _) = trigger::merge_stage(&blocks, &seeds, &c, v.merge, &mut Ops::default());
        vec![Token::Lists(lists)]
    });
    let c = cfg.clone();
    let signal: Process<Token> = Box::new(move |mut ins| match ins.remove(0) {
        Token::Lists(l) => vec![Token::Lists(trigger::signal_stage(
            &l,
            &c,
            &mut Ops::default(),
        ))],
        t => unexpected("signal_selection", &t),
    });
    let c = cfg.clone();
    let params: Process<Token> = Box::new(move |mut ins| match ins.remove(0) {
        Token::Lists(l) => vec![Token::Params(trigger::params_stage(
            &l,
            &c,
            &mut Ops::default(),
        ))],
        t => unexpected("tau_params", &t),
    });
    let c = cfg.clone();
    let reconstruction: Process<Token> = Box::new(move |mut ins| match ins.remove(0) {
        Token::Params(p) => vec![Token::Taus(trigger::reconstruction_stage(
            &p,
            &c,
            &mut Ops::default(),
        ))],
        t => unexpected("tau_reconstruction", &t),
    });
    let c = cfg.clone();
    let cleaning: Process<Token> = Box::new(move |mut ins| match ins.remove(0) {
        Token::Taus(t) => vec![Token::Taus(trigger::cleaning_stage(
            &t,
            &c,
            v.clean,
            &mut Ops::default(),
        ))],
        t => unexpected("tau_cleaning", &t),
    });
    vec![
        seeding,
        filtering,
        merging,
        signal,
        params,
        reconstruction,
        cleaning,
    ]
}

/// Wire the seven stages for variant combination `v`.
pub fn build_trigger_pipeline(
    cfg: &TriggerConfig,
    timing: &TimingConfig,
    v: Variants,
) -> Pipeline<Token> {
    let mut p = Pipeline::new();
    let nodes: Vec<Node> = timing
        .stage_table(v)
        .into_iter()
        .zip(processes(cfg, v))
        .map(|(spec, proc_)| p.add_stage(spec, proc_))
        .collect();
    let fifo = |hop: usize| ChannelSpec::fifo(timing.fifo_depth, timing.handshake[hop]);
    p.connect(Node::Source, nodes[0], fifo(0));
    p.connect(nodes[0], nodes[1], fifo(1));
    for _ in 0..MERGE_SOURCES {
        let ch = match v.merge {
            MergeVariant::A => fifo(2),
            MergeVariant::B => ChannelSpec::pipo(timing.handshake[2]),
        };
        p.connect(nodes[1], nodes[2], ch);
    }
    for i in 3..nodes.len() {
        p.connect(nodes[i - 1], nodes[i], fifo(i));
    }
    p.connect(nodes[nodes.len() - 1], Node::Sink, fifo(7));
    p
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerRun {
    /// Final taus, one list per input event, in input order.
    pub taus: Vec<Vec<Tau>>,
    pub metrics: PipelineMetrics,
}

pub fn run_trigger_pipeline(
    events: &[Event],
    cfg: &TriggerConfig,
    timing: &TimingConfig,
    v: Variants,
) -> Result<TriggerRun, EngineError> {
    let mut p = build_trigger_pipeline(cfg, timing, v);
    let inputs = events.iter().cloned().map(Token::Event).collect();
    let out = p.run(
        inputs,
        &EngineConfig {
            source: timing.source,
        },
    )?;
    let taus = out
        .outputs
        .into_iter()
        .map(|t| match t {
            Token::Taus(t) => t,
            t => unexpected("sink", &t),
        })
        .collect();
    Ok(TriggerRun {
        taus,
        metrics: out.metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AngularCoord, ParticleKind, Pt, Species};

    fn events(n: u64) -> Vec<Event> {
        (0..n)
            .map(|id| {
                let mut e = Event::empty(id);
                e.set(
                    5,
                    Particle::new(
                        Pt(20 + id as u32),
                        AngularCoord::new(10 * id as i32, -30),
                        ParticleKind::charged(Species::ChargedHadron, true),
                    ),
                );
                e
            })
            .collect()
    }

    fn run(v: Variants, timing: &TimingConfig, n: u64) -> TriggerRun {
        run_trigger_pipeline(&events(n), &TriggerConfig::default(), timing, v).unwrap()
    }

    #[test]
    fn default_handshake_totals_eight() {
        assert_eq!(TimingConfig::default().arrangement_overhead(), 8);
    }

    #[test]
    fn stage_tables_per_variant() {
        let t = TimingConfig::default();
        let aa = t.stage_table(Variants::ALL[0]);
        let bb = t.stage_table(Variants::ALL[3]);
        assert_eq!(aa.iter().map(|s| s.latency_cycles).sum::<u64>(), 229);
        assert_eq!((aa[2].latency_cycles, aa[2].ii_cycles), (38, 34));
        assert_eq!((bb[2].latency_cycles, bb[2].ii_cycles), (33, 33));
        assert_eq!((aa[6].latency_cycles, aa[6].ii_cycles), (13, 13));
        assert_eq!((bb[6].latency_cycles, bb[6].ii_cycles), (15, 13));
    }

    #[test]
    fn hand_timeline_latencies() {
        let t = TimingConfig::default();
        assert_eq!(run(Variants::ALL[0], &t, 1).metrics.latency_cycles, 203);
        assert_eq!(run(Variants::ALL[3], &t, 1).metrics.latency_cycles, 200);
    }

    #[test]
    fn steady_state_ii() {
        let t = TimingConfig::default();
        for v in Variants::ALL {
            assert_eq!(run(v, &t, 12).metrics.ii_cycles, 44);
            assert_eq!(run(v, &t.without_handshake(), 12).metrics.ii_cycles, 43);
        }
    }

    #[test]
    fn outputs_follow_events() {
        let r = run(Variants::default(), &TimingConfig::default(), 5);
        assert_eq!(r.taus.len(), 5);
        for (id, taus) in r.taus.iter().enumerate() {
            assert_eq!(taus.len(), 1);
            assert_eq!(taus[0].pt, Pt(20 + id as u32));
        }
    }

    #[test]
    fn periodic_source_at_data_rate() {
        let t = TimingConfig {
            source: SourceMode::Periodic(54),
            ..TimingConfig::default()
        };
        let r = run(Variants::default(), &t, 10);
        assert_eq!(r.metrics.ii_cycles, 54);
        assert_eq!(r.metrics.stalls(), 0);
        assert!(r.metrics.event_latencies.iter().all(|&l| l == 200));
    }
}
