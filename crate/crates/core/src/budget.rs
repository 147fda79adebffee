//! Time budgets converted to cycle budgets, and feasibility of a run.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::PipelineMetrics;
use crate::error::BudgetError;

/// `floor(time_ns * freq_mhz / 1000)`.
pub fn cycle_budget(time_ns: u64, freq_mhz: u64) -> Result<u64, BudgetError> {
    if time_ns == 0 {
        return Err(BudgetError::NonPositiveTime);
    }
    if freq_mhz == 0 {
        return Err(BudgetError::NonPositiveFrequency);
    }
    let product = u128::from(time_ns) * u128::from(freq_mhz);
    Ok(u64::try_from(product / 1000).unwrap_or(u64::MAX))
}

/// Budget settings shared by every frequency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetConfig {
    /// Event period.
    pub ii_budget_ns: u64,
    /// Latency limit for frequencies without an explicit cycle budget.
    pub latency_budget_ns: u64,
    /// Explicit latency budgets in cycles, by frequency.
    pub latency_budget_cycles: BTreeMap<u64, u64>,
    /// Clock of the main logic; any other clock pays the CDC overhead.
    pub base_freq_mhz: u64,
    pub cdc_overhead_cycles: u64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            ii_budget_ns: 150,
            latency_budget_ns: 760,
            latency_budget_cycles: BTreeMap::from([(300, 220), (360, 275)]),
            base_freq_mhz: 360,
            cdc_overhead_cycles: 10,
        }
    }
}

impl BudgetConfig {
    pub fn timing_budget(&self, freq_mhz: u64) -> Result<TimingBudget, BudgetError> {
        let ii_budget_cycles = cycle_budget(self.ii_budget_ns, freq_mhz)?;
        let latency_budget_cycles = match self.latency_budget_cycles.get(&freq_mhz) {
            Some(&c) => c,
            None => cycle_budget(self.latency_budget_ns, freq_mhz)?,
        };
        Ok(TimingBudget {
            frequency_mhz: freq_mhz,
            ii_budget_ns: self.ii_budget_ns,
            ii_budget_cycles,
            latency_budget_cycles,
        })
    }

    pub fn cdc_for(&self, freq_mhz: u64) -> u64 {
        if freq_mhz == self.base_freq_mhz {
            0
        } else {
            self.cdc_overhead_cycles
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingBudget {
    pub frequency_mhz: u64,
    pub ii_budget_ns: u64,
    pub ii_budget_cycles: u64,
    pub latency_budget_cycles: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub frequency_mhz: u64,
    pub latency_budget_cycles: u64,
    pub ii_budget_cycles: u64,
    pub achieved_latency_cycles: u64,
    pub achieved_ii_cycles: u64,
    pub latency_ok: bool,
    pub ii_ok: bool,
    pub latency_slack_cycles: i64,
    pub ii_slack_cycles: i64,
    pub feasible: bool,
}

fn slack(budget: u64, achieved: u64) -> i64 {
    (i128::from(budget) - i128::from(achieved)).clamp(i64::MIN.into(), i64::MAX.into()) as i64
}

/// Compare achieved latency and II with the budgets.
pub fn evaluate_feasibility(metrics: &PipelineMetrics, budget: &TimingBudget) -> FeasibilityReport {
    evaluate_cycles(metrics.latency_cycles, metrics.ii_cycles, budget)
}

pub fn evaluate_cycles(latency: u64, ii: u64, budget: &TimingBudget) -> FeasibilityReport {
    let latency_ok = latency <= budget.latency_budget_cycles;
    let ii_ok = ii <= budget.ii_budget_cycles;
    FeasibilityReport {
        frequency_mhz: budget.frequency_mhz,
        latency_budget_cycles: budget.latency_budget_cycles,
        ii_budget_cycles: budget.ii_budget_cycles,
        achieved_latency_cycles: latency,
        achieved_ii_cycles: ii,
        latency_ok,
        ii_ok,
        latency_slack_cycles: slack(budget.latency_budget_cycles, latency),
        ii_slack_cycles: slack(budget.ii_budget_cycles, ii),
        feasible: latency_ok && ii_ok,
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |ok| if ok { "ok" } else { "VIOLATED" };
        writeln!(f, "frequency {} MHz", self.frequency_mhz)?;
        writeln!(
            f,
            "  latency {:>4} / {:>4} cycles  slack {:>4}  {}",
            self.achieved_latency_cycles,
            self.latency_budget_cycles,
            self.latency_slack_cycles,
            verdict(self.latency_ok)
        )?;
        writeln!(
            f,
            "  II      {:>4} / {:>4} cycles  slack {:>4}  {}",
            self.achieved_ii_cycles,
            self.ii_budget_cycles,
            self.ii_slack_cycles,
            verdict(self.ii_ok)
        )?;
        write!(
            f,
            "  {}",
            if self.feasible {
                "FEASIBLE"
            } else {
                "INFEASIBLE"
            }
        )
    }
}
