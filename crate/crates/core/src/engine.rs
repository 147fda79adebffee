//! Deterministic cycle-stepped dataflow simulation.
//!
//! A pipeline is a DAG of stages joined by FIFO or ping-pong channels, fed by
//! one source and drained by one sink. Each stage is a process with a
//! latency, an initiation interval and an optional streaming offset; the
//! engine decides *when* each process fires and never touches *what* it
//! computes.
//!
//! Timing rules, for stage `s` and iteration `k`:
//!
//! * `s` may start `k` no sooner than `ii + handshake` cycles after it started
//!   `k - 1`, where `handshake` is the largest handshake of its input
//!   channels.
//! * A producer reserves its output slots when it starts. The token becomes
//!   visible downstream `handshake` cycles later (`opened_at`) and complete
//!   `handshake` cycles after the producer finishes (`ready_at`).
//! * With `start_offset_cycles == 0` a stage waits for complete inputs. With
//!   a positive offset it streams: it may start `offset` cycles after its
//!   first input token opens, but cannot finish before that input is
//!   complete. Ping-pong inputs are always consumed whole.
//! * A stage cannot start while any output channel is full (backpressure).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::channel::{Fifo, Pop};
use crate::error::EngineError;
use crate::Cycle;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSpec {
    pub name: String,
    pub latency_cycles: u64,
    pub ii_cycles: u64,
    #[serde(default)]
    pub start_offset_cycles: u64,
}

impl StageSpec {
    pub fn new(name: impl Into<String>, latency_cycles: u64, ii_cycles: u64) -> Self {
        StageSpec {
            name: name.into(),
            latency_cycles,
            ii_cycles,
            start_offset_cycles: 0,
        }
    }

    pub fn with_offset(mut self, offset: u64) -> Self {
        self.start_offset_cycles = offset;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelKind {
    Fifo { depth: usize },
    Pipo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub handshake_cycles: u64,
}

impl ChannelSpec {
    pub fn fifo(depth: usize, handshake_cycles: u64) -> Self {
        ChannelSpec {
            kind: ChannelKind::Fifo { depth },
            handshake_cycles,
        }
    }

    pub fn pipo(handshake_cycles: u64) -> Self {
        ChannelSpec {
            kind: ChannelKind::Pipo,
            handshake_cycles,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Source,
    Stage(usize),
    Sink,
}

/// How the source offers events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourceMode {
    /// Offer the next event as soon as the first stage can take it.
    #[default]
    Saturate,
    /// Offer one event every `n` cycles, or later if the input is full.
    Periodic(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineConfig {
    pub source: SourceMode,
}

/// A stage body: one token per input channel in, one per output channel out.
pub type Process<P> = Box<dyn FnMut(Vec<P>) -> Vec<P> + Send>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct EdgeDef {
    from: Node,
    to: Node,
    spec: ChannelSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StageStats {
    pub name: String,
    pub fired: u64,
    pub busy_cycles: u64,
    /// II satisfied but some input not yet available.
    pub stall_input_cycles: u64,
    /// II and inputs satisfied but an output channel was full.
    pub stall_output_cycles: u64,
    /// `ii_cycles` plus the largest input handshake.
    pub effective_ii: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub from: String,
    pub to: String,
    pub capacity: usize,
    pub max_occupancy: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineMetrics {
    /// Worst per-event latency, CDC overhead included.
    pub latency_cycles: u64,
    pub event_latencies: Vec<u64>,
    /// Steady-state spacing of sink outputs; the static bound when fewer
    /// than two events ran.
    pub ii_cycles: u64,
    pub ii_measured: bool,
    pub stages: Vec<StageStats>,
    pub channels: Vec<ChannelStats>,
    pub cdc_overhead_cycles: u64,
    pub inject_times: Vec<Cycle>,
    pub sink_times: Vec<Cycle>,
    pub total_cycles: Cycle,
}

impl PipelineMetrics {
    /// Total backpressure stall cycles over all stages.
    pub fn stalls(&self) -> u64 {
        self.stages.iter().map(|s| s.stall_output_cycles).sum()
    }

    pub fn starvation(&self) -> u64 {
        self.stages.iter().map(|s| s.stall_input_cycles).sum()
    }

    /// Largest effective II over all stages.
    pub fn ii_bound(&self) -> u64 {
        self.stages
            .iter()
            .map(|s| s.effective_ii)
            .max()
            .unwrap_or(0)
    }
}

/// Add a clock-domain-crossing penalty to the reported latency. The
/// initiation interval is unaffected.
pub fn apply_cdc(metrics: &PipelineMetrics, overhead_cycles: u64) -> PipelineMetrics {
    let mut m = metrics.clone();
    m.latency_cycles += overhead_cycles;
    for l in &mut m.event_latencies {
        *l += overhead_cycles;
    }
    m.cdc_overhead_cycles += overhead_cycles;
    m
}

pub struct RunOutput<P> {
    pub outputs: Vec<P>,
    pub metrics: PipelineMetrics,
}

struct Slot<P> {
    iter: usize,
    payload: P,
    opened_at: Cycle,
    ready_at: Cycle,
}

enum Bank<P> {
    Free,
    Written(Slot<P>),
    Held { release_at: Cycle },
}

enum ChanState<P> {
    Fifo(Fifo<Slot<P>>),
    Pipo {
        banks: [Bank<P>; 2],
        write_next: usize,
        read_next: usize,
        max_occupancy: usize,
    },
}

impl<P> ChanState<P> {
    fn new(kind: ChannelKind) -> Self {
        match kind {
            ChannelKind::Fifo { depth } => ChanState::Fifo(Fifo::new(depth)),
            ChannelKind::Pipo => ChanState::Pipo {
                banks: [Bank::Free, Bank::Free],
                write_next: 0,
                read_next: 0,
                max_occupancy: 0,
            },
        }
    }

    fn has_space(&self) -> bool {
        match self {
            ChanState::Fifo(f) => !f.is_full(),
            ChanState::Pipo {
                banks, write_next, ..
            } => matches!(banks[*write_next], Bank::Free),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            ChanState::Fifo(f) => f.is_empty(),
            ChanState::Pipo { banks, .. } => !banks.iter().any(|b| matches!(b, Bank::Written(_))),
        }
    }

    fn push(&mut self, slot: Slot<P>) {
        match self {
            ChanState::Fifo(f) => {
                let accepted = f.push(slot).is_accepted();
                debug_assert!(accepted, "push without space");
            }
            ChanState::Pipo {
                banks,
                write_next,
                max_occupancy,
                ..
            } => {
                debug_assert!(matches!(banks[*write_next], Bank::Free));
                banks[*write_next] = Bank::Written(slot);
                *write_next = 1 - *write_next;
                let occ = banks.iter().filter(|b| !matches!(b, Bank::Free)).count();
                *max_occupancy = (*max_occupancy).max(occ);
            }
        }
    }

    /// Head token as `(iter, opened_at, ready_at, streamable)`.
    fn head(&self) -> Option<(usize, Cycle, Cycle, bool)> {
        match self {
            ChanState::Fifo(f) => f.front().map(|s| (s.iter, s.opened_at, s.ready_at, true)),
            ChanState::Pipo {
                banks, read_next, ..
            } => match &banks[*read_next] {
                Bank::Written(s) => Some((s.iter, s.opened_at, s.ready_at, false)),
                _ => None,
            },
        }
    }

    /// Remove the head; ping-pong banks stay held until `release_at`.
    fn take(&mut self, release_at: Cycle) -> Slot<P> {
        match self {
            ChanState::Fifo(f) => match f.pop() {
                Pop::Token(s) => s,
                Pop::Stall => unreachable!("take on empty fifo"),
            },
            ChanState::Pipo {
                banks, read_next, ..
            } => {
                let bank = std::mem::replace(&mut banks[*read_next], Bank::Held { release_at });
                *read_next = 1 - *read_next;
                match bank {
                    Bank::Written(s) => s,
                    _ => unreachable!("take on uncommitted bank"),
                }
            }
        }
    }

    /// Free held banks whose reader finished; true if anything changed.
    fn release(&mut self, t: Cycle) -> bool {
        let mut changed = false;
        if let ChanState::Pipo { banks, .. } = self {
            for b in banks.iter_mut() {
                if let Bank::Held { release_at } = b {
                    if *release_at <= t {
                        *b = Bank::Free;
                        changed = true;
                    }
                }
            }
        }
        changed
    }

    /// Latest cycle at which something in this channel changes on its own.
    fn future_event(&self, t: Cycle) -> bool {
        match self {
            ChanState::Fifo(f) => f.front().is_some_and(|s| s.ready_at > t || s.opened_at > t),
            ChanState::Pipo { banks, .. } => banks.iter().any(|b| match b {
                Bank::Written(s) => s.ready_at > t,
                Bank::Held { release_at } => *release_at > t,
                Bank::Free => false,
            }),
        }
    }

    fn capacity(&self) -> usize {
        match self {
            ChanState::Fifo(f) => f.depth(),
            ChanState::Pipo { .. } => 2,
        }
    }

    fn max_occupancy(&self) -> usize {
        match self {
            ChanState::Fifo(f) => f.max_occupancy(),
            ChanState::Pipo { max_occupancy, .. } => *max_occupancy,
        }
    }
}

struct StageRt {
    next_iter: usize,
    last_start: Option<Cycle>,
    in_flight: VecDeque<(Cycle, Cycle)>,
    eff_ii: u64,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    stats: StageStats,
}

/// A wired pipeline ready to simulate.
pub struct Pipeline<P> {
    specs: Vec<StageSpec>,
    processes: Vec<Process<P>>,
    edges: Vec<EdgeDef>,
}

impl<P> Default for Pipeline<P> {
    fn default() -> Self {
        Pipeline {
            specs: Vec::new(),
            processes: Vec::new(),
            edges: Vec::new(),
        }
    }
}

impl<P: Clone + Send> Pipeline<P> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_stage(&mut self, spec: StageSpec, process: Process<P>) -> Node {
        self.specs.push(spec);
        self.processes.push(process);
        Node::Stage(self.specs.len() - 1)
    }

    /// Channels are ordered per stage by the order of `connect` calls; that
    /// order defines a process's input and output positions.
    pub fn connect(&mut self, from: Node, to: Node, spec: ChannelSpec) {
        self.edges.push(EdgeDef { from, to, spec });
    }

    pub fn stage_specs(&self) -> &[StageSpec] {
        &self.specs
    }

    fn node_name(&self, n: Node) -> String {
        match n {
            Node::Source => "source".into(),
            Node::Sink => "sink".into(),
            Node::Stage(i) => self.specs[i].name.clone(),
        }
    }

    /// Stage indices in dependency order.
    fn topo_order(&self) -> Result<Vec<usize>, EngineError> {
        let n = self.specs.len();
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            if let (Node::Stage(_), Node::Stage(b)) = (e.from, e.to) {
                indeg[b] += 1;
            }
        }
        let mut ready: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_front() {
            order.push(i);
            for e in &self.edges {
                if let (Node::Stage(a), Node::Stage(b)) = (e.from, e.to) {
                    if a == i {
                        indeg[b] -= 1;
                        if indeg[b] == 0 {
                            ready.push_back(b);
                        }
                    }
                }
            }
        }
        if order.len() != n {
            return Err(EngineError::Wiring("stage graph has a cycle".into()));
        }
        Ok(order)
    }

    fn validate(&self) -> Result<Vec<usize>, EngineError> {
        let wiring = |m: String| Err(EngineError::Wiring(m));
        for (i, s) in self.specs.iter().enumerate() {
            if s.ii_cycles == 0 {
                return Err(EngineError::ZeroIi {
                    stage: s.name.clone(),
                });
            }
            let ins = self.edges.iter().filter(|e| e.to == Node::Stage(i)).count();
            let outs = self
                .edges
                .iter()
                .filter(|e| e.from == Node::Stage(i))
                .count();
            if ins == 0 || outs == 0 {
                return wiring(format!(
                    "stage `{}` has {ins} inputs and {outs} outputs",
                    s.name
                ));
            }
        }
        for e in &self.edges {
            if e.to == Node::Source || e.from == Node::Sink {
                return wiring("edges may not enter the source or leave the sink".into());
            }
            for n in [e.from, e.to] {
                if let Node::Stage(i) = n {
                    if i >= self.specs.len() {
                        return wiring(format!("unknown stage index {i}"));
                    }
                }
            }
        }
        if !self.edges.iter().any(|e| e.from == Node::Source) {
            return wiring("source is not connected".into());
        }
        if self.edges.iter().filter(|e| e.to == Node::Sink).count() != 1 {
            return wiring("sink must have exactly one input".into());
        }
        self.topo_order()
    }

    /// Simulate `inputs` through the pipeline.
    pub fn run(&mut self, inputs: Vec<P>, cfg: &EngineConfig) -> Result<RunOutput<P>, EngineError> {
        let order = self.validate()?;
        let n = inputs.len();
        let mut chans: Vec<ChanState<P>> = self
            .edges
            .iter()
            .map(|e| ChanState::new(e.spec.kind))
            .collect();
        let mut rts: Vec<StageRt> = self
            .specs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let inputs: Vec<usize> = (0..self.edges.len())
                    .filter(|&k| self.edges[k].to == Node::Stage(i))
                    .collect();
                let outputs: Vec<usize> = (0..self.edges.len())
                    .filter(|&k| self.edges[k].from == Node::Stage(i))
                    .collect();
                let hs = inputs
                    .iter()
                    .map(|&k| self.edges[k].spec.handshake_cycles)
                    .max()
                    .unwrap_or(0);
                StageRt {
                    next_iter: 0,
                    last_start: None,
                    in_flight: VecDeque::new(),
                    eff_ii: s.ii_cycles + hs,
                    inputs,
                    outputs,
                    stats: StageStats {
                        name: s.name.clone(),
                        effective_ii: s.ii_cycles + hs,
                        ..StageStats::default()
                    },
                }
            })
            .collect();
        let source_edges: Vec<usize> = (0..self.edges.len())
            .filter(|&k| self.edges[k].from == Node::Source)
            .collect();
        let sink_edge = (0..self.edges.len())
            .find(|&k| self.edges[k].to == Node::Sink)
            .expect("validated");

        let mut pending: VecDeque<P> = inputs.into();
        let mut inject_times: Vec<Cycle> = Vec::with_capacity(n);
        let mut sink_times: Vec<Cycle> = Vec::with_capacity(n);
        let mut outputs: Vec<P> = Vec::with_capacity(n);

        let mut t: Cycle = 0;
        while sink_times.len() < n {
            let mut progressed = false;

            for c in chans.iter_mut() {
                progressed |= c.release(t);
            }

            // Sink drains everything complete.
            while let Some((_, _, ready, _)) = chans[sink_edge].head() {
                if ready > t {
                    break;
                }
                let slot = chans[sink_edge].take(t);
                chans[sink_edge].release(t);
                debug_assert_eq!(slot.iter, sink_times.len());
                sink_times.push(t);
                outputs.push(slot.payload);
                progressed = true;
            }

            // Source.
            if !pending.is_empty() {
                let k = inject_times.len();
                let due = match (cfg.source, inject_times.last()) {
                    (SourceMode::Periodic(iv), Some(&last)) => t >= last + iv,
                    (SourceMode::Saturate, Some(&last)) => t > last,
                    (_, None) => true,
                };
                let space = source_edges.iter().all(|&e| chans[e].has_space());
                let consumers_ready = match cfg.source {
                    SourceMode::Periodic(_) => true,
                    SourceMode::Saturate => source_edges.iter().all(|&e| {
                        let hs = self.edges[e].spec.handshake_cycles;
                        chans[e].is_empty()
                            && match self.edges[e].to {
                                Node::Stage(s) => rts[s]
                                    .last_start
                                    .is_none_or(|ls| t + hs >= ls + rts[s].eff_ii),
                                _ => true,
                            }
                    }),
                };
                if due && space && consumers_ready {
                    let payload = pending.pop_front().expect("non-empty");
                    for &e in &source_edges {
                        let hs = self.edges[e].spec.handshake_cycles;
                        chans[e].push(Slot {
                            iter: k,
                            payload: payload.clone(),
                            opened_at: t + hs,
                            ready_at: t + hs,
                        });
                    }
                    inject_times.push(t);
                    progressed = true;
                }
            }

            // Stages, upstream first.
            for &s in &order {
                let rt = &rts[s];
                if rt.next_iter >= n {
                    continue;
                }
                if rt.last_start.is_some_and(|ls| t < ls + rt.eff_ii) {
                    continue;
                }
                let spec = &self.specs[s];
                let offset = spec.start_offset_cycles;
                let mut inputs_ok = true;
                let mut ready_max: Cycle = 0;
                for &e in &rt.inputs {
                    match chans[e].head() {
                        Some((iter, opened, ready, streamable)) => {
                            debug_assert_eq!(iter, rt.next_iter, "channels preserve order");
                            let ok = if offset > 0 && streamable {
                                opened + offset <= t
                            } else {
                                ready <= t
                            };
                            inputs_ok &= ok;
                            ready_max = ready_max.max(ready);
                        }
                        None => inputs_ok = false,
                    }
                }
                if !inputs_ok {
                    if rt.next_iter < inject_times.len() {
                        rts[s].stats.stall_input_cycles += 1;
                    }
                    continue;
                }
                if !rt.outputs.iter().all(|&e| chans[e].has_space()) {
                    rts[s].stats.stall_output_cycles += 1;
                    continue;
                }

                let finish = (t + spec.latency_cycles).max(ready_max);
                let iter = rt.next_iter;
                let ins: Vec<P> = rt
                    .inputs
                    .iter()
                    .map(|&e| chans[e].take(finish).payload)
                    .collect();
                let outs = (self.processes[s])(ins);
                let rt = &mut rts[s];
                if outs.len() != rt.outputs.len() {
                    return Err(EngineError::Arity {
                        stage: spec.name.clone(),
                        got: outs.len(),
                        expected: rt.outputs.len(),
                    });
                }
                for (&e, payload) in rt.outputs.iter().zip(outs) {
                    let hs = self.edges[e].spec.handshake_cycles;
                    chans[e].push(Slot {
                        iter,
                        payload,
                        opened_at: t + hs,
                        ready_at: finish + hs,
                    });
                }
                rt.next_iter += 1;
                rt.last_start = Some(t);
                rt.in_flight.push_back((t, finish));
                rt.stats.fired += 1;
                progressed = true;
            }

            for rt in rts.iter_mut() {
                while rt.in_flight.front().is_some_and(|&(_, f)| f <= t) {
                    rt.in_flight.pop_front();
                }
                if rt.in_flight.iter().any(|&(st, f)| st <= t && t < f) {
                    rt.stats.busy_cycles += 1;
                }
            }

            if sink_times.len() == n {
                break;
            }

            if !progressed {
                let waiting = rts.iter().any(|rt| {
                    rt.in_flight.iter().any(|&(_, f)| f > t)
                        || rt.last_start.is_some_and(|ls| ls + rt.eff_ii > t)
                }) || chans.iter().any(|c| c.future_event(t))
                    || matches!(
                        (cfg.source, inject_times.last()),
                        (SourceMode::Periodic(iv), Some(&last)) if !pending.is_empty() && last + iv > t
                    );
                // Streaming inputs wait on `opened_at + offset`.
                let streaming_wait = rts.iter().enumerate().any(|(s, rt)| {
                    let off = self.specs[s].start_offset_cycles;
                    off > 0
                        && rt.inputs.iter().any(|&e| {
                            chans[e]
                                .head()
                                .is_some_and(|(_, o, _, st)| st && o + off > t)
                        })
                });
                if !waiting && !streaming_wait {
                    let blocked = rts
                        .iter()
                        .filter(|rt| rt.next_iter < n)
                        .map(|rt| rt.stats.name.clone())
                        .collect();
                    return Err(EngineError::Deadlock { cycle: t, blocked });
                }
            }
            t += 1;
        }

        let event_latencies: Vec<u64> = sink_times
            .iter()
            .zip(&inject_times)
            .map(|(s, i)| s - i)
            .collect();
        let ii_bound = rts.iter().map(|r| r.eff_ii).max().unwrap_or(0);
        let (ii_cycles, ii_measured) = if n >= 2 {
            let from = (n / 2).max(1);
            let ii = (from..n)
                .map(|k| sink_times[k] - sink_times[k - 1])
                .max()
                .unwrap_or(0);
            (ii, true)
        } else {
            (ii_bound, false)
        };
        let channels = self
            .edges
            .iter()
            .zip(&chans)
            .map(|(e, c)| ChannelStats {
                from: self.node_name(e.from),
                to: self.node_name(e.to),
                capacity: c.capacity(),
                max_occupancy: c.max_occupancy(),
            })
            .collect();
        Ok(RunOutput {
            outputs,
            metrics: PipelineMetrics {
                latency_cycles: event_latencies.iter().copied().max().unwrap_or(0),
                event_latencies,
                ii_cycles,
                ii_measured,
                stages: rts.into_iter().map(|r| r.stats).collect(),
                channels,
                cdc_overhead_cycles: 0,
                inject_times,
                sink_times,
                total_cycles: t,
            },
        })
    }
}
