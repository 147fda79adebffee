use thiserror::Error;

use crate::model::Species;
use crate::{Coord, PtWord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("pt {pt} exceeds pt_max {max}")]
    PtOutOfRange { pt: PtWord, max: PtWord },
    #[error("eta {eta} outside [-{max}, {max}]")]
    EtaOutOfRange { eta: Coord, max: Coord },
    #[error("phi {phi} outside [-{half}, {half})")]
    PhiOutOfRange { phi: Coord, half: Coord },
    #[error("unknown species token `{0}`")]
    UnknownSpecies(String),
    #[error("charge {charge} is invalid for {species:?}")]
    BadCharge { species: Species, charge: i8 },
    #[error("event has {0} particles, more than 128 slots")]
    TooManyParticles(usize),
    #[error("invalid limits: {0}")]
    BadLimits(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("inconsistent configuration: {0}")]
    Invariant(String),
    #[error("unsupported config version {0}")]
    Version(u32),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EventsError {
    #[error("missing header line")]
    MissingHeader,
    #[error("line 1: unsupported header `{0}`")]
    BadHeader(String),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: duplicate slot {slot} in event {event_id}")]
    DuplicateSlot {
        line: usize,
        event_id: u64,
        slot: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: unsupported format version {version}")]
    Version { line: usize, version: u32 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BudgetError {
    #[error("time budget must be positive")]
    NonPositiveTime,
    #[error("frequency must be positive")]
    NonPositiveFrequency,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid wiring: {0}")]
    Wiring(String),
    #[error("stage `{stage}` has ii_cycles = 0")]
    ZeroIi { stage: String },
    #[error("deadlock at cycle {cycle}: blocked stages {blocked:?}")]
    Deadlock { cycle: u64, blocked: Vec<String> },
    #[error("stage `{stage}` returned {got} outputs, expected {expected}")]
    Arity {
        stage: String,
        got: usize,
        expected: usize,
    },
}
