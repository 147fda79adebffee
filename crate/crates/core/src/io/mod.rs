//! File formats and synthetic input.
//!
//! * Event files: a versioned header, then one CSV record per particle.
//! * Config files: `key = value` lines.
//! * Reports: JSON lines, one per event plus one metrics line.

mod config;
mod events;
mod gen;
mod report;

pub use config::{load_config, RunConfig};
pub use events::{parse_events, write_events, EVENTS_HEADER};
pub use gen::{gen_events, Lcg, Profile};
pub use report::{
    parse_report, write_report, EventRecord, MetricsRecord, RunReport, TauRecord,
    REPORT_FORMAT_VERSION,
};
