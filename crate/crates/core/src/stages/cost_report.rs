use std::fmt;

use super::{TriggerConfig, Variants};
use crate::cost::Ops;
use crate::io::{gen_events, Profile};
use crate::model::Event;
use crate::trigger::{run_event_traced, StageOps};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostRow {
    pub stage: &'static str,
    /// What one processed unit is for this stage.
    pub unit: &'static str,
    pub units: u64,
    pub ops: Ops,
}

impl CostRow {
    fn ratio(n: u64, d: u64) -> f64 {
        if d == 0 {
            0.0
        } else {
            n as f64 / d as f64
        }
    }

    pub fn mul_per_unit(&self) -> f64 {
        Self::ratio(self.ops.mul, self.units)
    }

    pub fn div_per_unit(&self) -> f64 {
        Self::ratio(self.ops.div, self.units)
    }

    pub fn cmp_per_unit(&self) -> f64 {
        Self::ratio(self.ops.cmp, self.units)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostTable {
    pub events: u64,
    pub rows: Vec<CostRow>,
}

impl CostTable {
    pub fn row(&self, stage: &str) -> Option<&CostRow> {
        self.rows.iter().find(|r| r.stage == stage)
    }

    /// Measure the counters over `events` with `variants`.
    pub fn measure(events: &[Event], cfg: &TriggerConfig, variants: Variants) -> CostTable {
        let mut ops = StageOps::default();
        for e in events {
            run_event_traced(e, cfg, variants, &mut ops);
        }
        let row = |stage, unit, units, ops| CostRow {
            stage,
            unit,
            units,
            ops,
        };
        CostTable {
            events: events.len() as u64,
            rows: vec![
                row("seeding", "event", events.len() as u64, ops.seeding),
                row(
                    "filtering",
                    "particle-seed distance",
                    ops.filtering.distance_evals,
                    ops.filtering,
                ),
                row(
                    "merging",
                    "candidate list",
                    ops.candidate_lists,
                    ops.merging,
                ),
                row(
                    "signal_selection",
                    "candidate",
                    ops.signal_candidates,
                    ops.signal,
                ),
                row(
                    "tau_params",
                    "candidate group",
                    ops.param_groups,
                    ops.params,
                ),
                row(
                    "tau_reconstruction",
                    "tau",
                    ops.taus_built,
                    ops.reconstruction,
                ),
                row(
                    "tau_cleaning",
                    "tau-pair distance",
                    ops.cleaning.distance_evals,
                    ops.cleaning,
                ),
            ],
        }
    }
}

impl fmt::Display for CostTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<20} {:<24} {:>8} {:>9} {:>9} {:>9}",
            "stage", "unit", "units", "mul/unit", "div/unit", "cmp/unit"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<20} {:<24} {:>8} {:>9.3} {:>9.3} {:>9.3}",
                r.stage,
                r.unit,
                r.units,
                r.mul_per_unit(),
                r.div_per_unit(),
                r.cmp_per_unit()
            )?;
        }
        Ok(())
    }
}

/// Operation counts per processed unit, measured on a fixed probe workload
/// with the default variants.
pub fn stage_cost_report(cfg: &TriggerConfig) -> CostTable {
    let events = gen_events(7, 16, &Profile::clustered());
    CostTable::measure(&events, cfg, Variants::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headline_counts() {
        let t = stage_cost_report(&TriggerConfig::default());
        let filt = t.row("filtering").unwrap();
        assert!(filt.units > 0);
        assert_eq!(filt.ops.mul, 2 * filt.units);
        let par = t.row("tau_params").unwrap();
        assert!(par.units > 0);
        assert_eq!(par.ops.div, 2 * par.units);
        let rec = t.row("tau_reconstruction").unwrap();
        assert_eq!((rec.ops.mul, rec.ops.div), (0, 0));
        for r in &t.rows {
            if r.stage != "tau_params" {
                assert_eq!(r.ops.div, 0, "{}", r.stage);
            }
        }
        assert!(t.to_string().contains("tau_cleaning"));
    }
}
