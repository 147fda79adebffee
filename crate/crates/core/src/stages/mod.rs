//! The seven functional steps of the tau trigger.
//!
//! Every step is a pure function of its inputs. The `*_metered` variants
//! thread an [`Ops`](crate::cost::Ops) counter for cost accounting; the plain
//! variants discard it.

mod cleaning;
mod cost_report;
mod filter;
mod merge;
mod params;
mod seeding;
mod signal;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::{AngularCoord, Limits, Particle, Pt, Species, SpeciesSet, N_INPUT};
use crate::{Coord, Dist2};

pub use cleaning::{
    build_cleaning_matrix, build_cleaning_matrix_metered, clean_solution_a,
    clean_solution_a_metered, clean_solution_b, clean_solution_b_metered, less_pt, near_by,
    CleaningMatrix,
};
pub use cost_report::{stage_cost_report, CostRow, CostTable};
pub use filter::{filter_block, filter_block_metered, filter_event, filter_event_metered};
pub use merge::{
    merge_solution_a, merge_solution_b, merge_with, MergeATrace, MergeBTrace, MergeOutcome,
    MERGE_SOURCES,
};
pub use params::{
    compute_tau_params, compute_tau_params_metered, compute_total_pt, reconstruct_tau,
};
pub use seeding::{select_seeds, select_seeds_metered};
pub use signal::{select_signal_candidates, select_signal_candidates_metered};

/// A charged particle chosen as the centre of a candidate list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub particle: Particle,
    pub source_index: usize,
}

/// A seed with its associated candidates and their summed pt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateList {
    pub seed: Seed,
    pub candidates: Vec<Particle>,
    pub total_pt: Pt,
}

impl CandidateList {
    pub fn new(seed: Seed, candidates: Vec<Particle>, limits: &Limits) -> Self {
        let total_pt = compute_total_pt(&candidates, limits);
        CandidateList {
            seed,
            candidates,
            total_pt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TauParams {
    pub sum_pt: Pt,
    pub eta_w: Coord,
    pub phi_w: Coord,
    pub valid: bool,
}

impl TauParams {
    pub const INVALID: TauParams = TauParams {
        sum_pt: Pt(0),
        eta_w: 0,
        phi_w: 0,
        valid: false,
    };
}

/// Reconstructed tau. Invalid taus carry zero pt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tau {
    pub pt: Pt,
    pub pos: AngularCoord,
    pub valid: bool,
}

impl Tau {
    pub const INVALID: Tau = Tau {
        pt: Pt(0),
        pos: AngularCoord::new(0, 0),
        valid: false,
    };

    pub fn new(pt: Pt, pos: AngularCoord) -> Self {
        Tau {
            pt,
            pos,
            valid: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum MergeVariant {
    /// FIFO sources with an explicit trimming pass.
    A,
    /// Ping-pong sources read by a shared index register.
    #[default]
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum CleanVariant {
    /// Sort by pt, then suppress later neighbours.
    A,
    /// Pairwise domination matrix, no sort.
    #[default]
    B,
}

macro_rules! ab_variant {
    ($t:ty) => {
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    "A" | "a" => Ok(<$t>::A),
                    "B" | "b" => Ok(<$t>::B),
                    _ => Err(format!("expected A or B, got `{s}`")),
                }
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self {
                    <$t>::A => "A",
                    <$t>::B => "B",
                })
            }
        }
    };
}

ab_variant!(MergeVariant);
ab_variant!(CleanVariant);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Variants {
    pub merge: MergeVariant,
    pub clean: CleanVariant,
}

impl Variants {
    pub const ALL: [Variants; 4] = [
        Variants {
            merge: MergeVariant::A,
            clean: CleanVariant::A,
        },
        Variants {
            merge: MergeVariant::A,
            clean: CleanVariant::B,
        },
        Variants {
            merge: MergeVariant::B,
            clean: CleanVariant::A,
        },
        Variants {
            merge: MergeVariant::B,
            clean: CleanVariant::B,
        },
    ];
}

/// Thresholds and sizes for the functional trigger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerConfig {
    pub limits: Limits,
    pub n_input: usize,
    pub n_seeds: usize,
    pub n_filter_blocks: usize,
    pub block_size: usize,
    pub max_candidates: usize,
    pub max_taus: usize,
    pub filter_cone_r2: Dist2,
    /// Numerator of the inverse-pt signal cone, in units² · pt-units.
    pub signal_cone_k: u64,
    pub signal_cone_r2_min: Dist2,
    pub signal_cone_r2_max: Dist2,
    pub allowed_signal_species: SpeciesSet,
    pub proximity_r2: Dist2,
    pub min_seed_pt: Pt,
    pub min_tau_pt: Pt,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        TriggerConfig {
            limits: Limits::default(),
            n_input: N_INPUT,
            n_seeds: 16,
            n_filter_blocks: 4,
            block_size: 32,
            max_candidates: 30,
            max_taus: 8,
            filter_cone_r2: 16_900,
            signal_cone_k: 16_900 * 256,
            signal_cone_r2_min: 1024,
            signal_cone_r2_max: 16_900,
            allowed_signal_species: [
                Species::ChargedHadron,
                Species::NeutralHadron,
                Species::Photon,
                Species::Electron,
            ]
            .into_iter()
            .collect(),
            proximity_r2: 26_569,
            min_seed_pt: Pt(4),
            min_tau_pt: Pt(16),
        }
    }
}

impl TriggerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invariant(m));
        self.limits
            .validate()
            .map_err(|e| ConfigError::Invariant(e.to_string()))?;
        if self.n_input != N_INPUT {
            return bad(format!("n_input must be {N_INPUT}, got {}", self.n_input));
        }
        if self.n_filter_blocks * self.block_size != self.n_input {
            return bad(format!(
                "n_filter_blocks * block_size = n_input violated: {} * {} != {}",
                self.n_filter_blocks, self.block_size, self.n_input
            ));
        }
        if self.n_filter_blocks != MERGE_SOURCES {
            return bad(format!(
                "the merging stage takes exactly {MERGE_SOURCES} filter blocks, got {}",
                self.n_filter_blocks
            ));
        }
        if self.n_seeds == 0 || self.n_seeds > 16 {
            return bad(format!("n_seeds must be in 1..=16, got {}", self.n_seeds));
        }
        if self.max_candidates == 0 || self.max_candidates > self.n_input {
            return bad(format!(
                "max_candidates must be in 1..={}, got {}",
                self.n_input, self.max_candidates
            ));
        }
        if self.max_taus == 0 || self.max_taus > self.n_seeds {
            return bad(format!(
                "max_taus must be in 1..=n_seeds ({}), got {}",
                self.n_seeds, self.max_taus
            ));
        }
        if self.signal_cone_r2_min > self.signal_cone_r2_max {
            return bad(format!(
                "signal_cone_r2_min <= signal_cone_r2_max violated: {} > {}",
                self.signal_cone_r2_min, self.signal_cone_r2_max
            ));
        }
        Ok(())
    }
}
