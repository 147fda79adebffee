//! Cycle-approximate simulation of a hadron-plus-strips tau trigger.
//!
//! The functional trigger ([`stages`], [`trigger`]) is pure integer code. The
//! [`engine`] runs it as a dataflow pipeline of timed processes and reports
//! latency, initiation interval and stalls; [`budget`] judges those numbers
//! against clock-dependent cycle budgets. [`oracle`] is an independent
//! naive reference used to check everything else.

pub mod budget;
pub mod channel;
pub mod cli;
pub mod cost;
pub mod engine;
pub mod error;
pub mod fixed;
pub mod io;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod stages;
pub mod trigger;

/// Transverse-momentum word.
pub type PtWord = u32;
/// Signed angular coordinate in grid quanta.
pub type Coord = i32;
/// Squared angular distance.
pub type Dist2 = u64;
/// Simulation time in clock cycles.
pub type Cycle = u64;

pub use budget::{
    cycle_budget, evaluate_feasibility, BudgetConfig, FeasibilityReport, TimingBudget,
};
pub use engine::{apply_cdc, PipelineMetrics, StageSpec};
pub use model::{AngularCoord, Event, Limits, Particle, ParticleKind, Pt, Species};
pub use pipeline::{run_trigger_pipeline, TimingConfig};
pub use stages::{CleanVariant, MergeVariant, Tau, TriggerConfig, Variants};
