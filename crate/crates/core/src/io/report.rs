use serde::{Deserialize, Serialize};

use crate::budget::FeasibilityReport;
use crate::engine::{ChannelStats, StageStats};
use crate::error::ReportError;
use crate::stages::Tau;

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauRecord {
    pub pt: u32,
    pub eta: i32,
    pub phi: i32,
}

impl From<&Tau> for TauRecord {
    fn from(t: &Tau) -> Self {
        TauRecord {
            pt: t.pt.0,
            eta: t.pos.eta,
            phi: t.pos.phi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event_id: u64,
    pub taus: Vec<TauRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub merge: String,
    pub clean: String,
    pub events: u64,
    pub latency_cycles: u64,
    pub cdc_overhead_cycles: u64,
    pub ii_cycles: u64,
    pub ii_measured: bool,
    pub stalls: u64,
    pub starvation: u64,
    pub oracle_checked: bool,
    pub feasibility: FeasibilityReport,
    pub stages: Vec<StageStats>,
    pub channels: Vec<ChannelStats>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub events: Vec<EventRecord>,
    pub metrics: MetricsRecord,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Record {
    Event(EventRecord),
    Metrics(MetricsRecord),
}

#[derive(Serialize, Deserialize)]
struct Line {
    format_version: u32,
    #[serde(flatten)]
    record: Record,
}

fn line_of(record: Record) -> String {
    serde_json::to_string(&Line {
        format_version: REPORT_FORMAT_VERSION,
        record,
    })
    .expect("report records always serialize")
}

/// One JSON object per line: every event in order, then the metrics.
pub fn write_report(report: &RunReport) -> String {
    let mut out = String::new();
    for e in &report.events {
        out.push_str(&line_of(Record::Event(e.clone())));
        out.push('\n');
    }
    out.push_str(&line_of(Record::Metrics(report.metrics.clone())));
    out.push('\n');
    out
}

pub fn parse_report(text: &str) -> Result<RunReport, ReportError> {
    let mut events = Vec::new();
    let mut metrics = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| ReportError::Malformed { line, reason };
        let value: serde_json::Value = serde_json::from_str(raw).map_err(|e| bad(e.to_string()))?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| bad("missing format_version".into()))?;
        if version != u64::from(REPORT_FORMAT_VERSION) {
            return Err(ReportError::Version {
                line,
                version: u32::try_from(version).unwrap_or(u32::MAX),
            });
        }
        if metrics.is_some() {
            return Err(bad("record after the metrics line".into()));
        }
        let parsed: Line = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
        match parsed.record {
            Record::Event(e) => events.push(e),
            Record::Metrics(m) => metrics = Some(m),
        }
    }
    let metrics = metrics.ok_or(ReportError::Malformed {
        line: text.lines().count(),
        reason: "missing metrics line".into(),
    })?;
    Ok(RunReport { events, metrics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::{evaluate_cycles, TimingBudget};

    fn sample() -> RunReport {
        RunReport {
            events: vec![
                EventRecord {
                    event_id: 3,
                    taus: vec![TauRecord {
                        pt: 40,
                        eta: -12,
                        phi: 1000,
                    }],
                },
                EventRecord {
                    event_id: 4,
                    taus: vec![],
                },
            ],
            metrics: MetricsRecord {
                merge: "B".into(),
                clean: "B".into(),
                events: 2,
                latency_cycles: 210,
                cdc_overhead_cycles: 10,
                ii_cycles: 44,
                ii_measured: true,
                stalls: 0,
                starvation: 3,
                oracle_checked: true,
                feasibility: evaluate_cycles(
                    210,
                    44,
                    &TimingBudget {
                        frequency_mhz: 300,
                        ii_budget_ns: 150,
                        ii_budget_cycles: 45,
                        latency_budget_cycles: 220,
                    },
                ),
                stages: vec![StageStats {
                    name: "seeding".into(),
                    fired: 2,
                    busy_cycles: 86,
                    stall_input_cycles: 0,
                    stall_output_cycles: 0,
                    effective_ii: 44,
                }],
                channels: vec![ChannelStats {
                    from: "source".into(),
                    to: "seeding".into(),
                    capacity: 32,
                    max_occupancy: 1,
                }],
            },
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let text = write_report(&sample());
        let parsed = parse_report(&text).unwrap();
        assert_eq!(parsed, sample());
        assert_eq!(write_report(&parsed), text);
    }

    #[test]
    fn lines_lead_with_version_and_type() {
        let text = write_report(&sample());
        let first = text.lines().next().unwrap();
        assert!(
            first.starts_with(r#"{"format_version":1,"type":"event","event_id":3"#),
            "{first}"
        );
        let last = text.lines().last().unwrap();
        assert!(
            last.starts_with(r#"{"format_version":1,"type":"metrics""#),
            "{last}"
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            parse_report(""),
            Err(ReportError::Malformed { .. })
        ));
        let text = write_report(&sample()).replace("\"format_version\":1", "\"format_version\":2");
        assert!(matches!(
            parse_report(&text),
            Err(ReportError::Version {
                line: 1,
                version: 2
            })
        ));
        assert!(matches!(
            parse_report("{not json"),
            Err(ReportError::Malformed { line: 1, .. })
        ));
    }
}
