use std::collections::HashSet;
use std::str::FromStr;

use crate::budget::BudgetConfig;
use crate::engine::SourceMode;
use crate::error::ConfigError;
use crate::model::{Pt, Species, SpeciesSet};
use crate::pipeline::{TimingConfig, HOP_NAMES, STAGE_NAMES};
use crate::stages::{TriggerConfig, Variants};

/// Everything a run needs besides the events.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunConfig {
    pub trigger: TriggerConfig,
    pub variants: Variants,
    pub timing: TimingConfig,
    pub budget: BudgetConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.trigger.validate()?;
        self.timing.validate()?;
        let b = &self.budget;
        if b.ii_budget_ns == 0 || b.latency_budget_ns == 0 || b.base_freq_mhz == 0 {
            return Err(ConfigError::Invariant(
                "budget times and base frequency must be positive".into(),
            ));
        }
        if b.latency_budget_cycles
            .iter()
            .any(|(&f, &c)| f == 0 || c == 0)
        {
            return Err(ConfigError::Invariant(
                "latency_budget.<freq> entries must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e: T::Err| ConfigError::BadValue {
        line,
        key: key.to_string(),
        reason: e.to_string(),
    })
}

fn species_set(line: usize, key: &str, raw: &str) -> Result<SpeciesSet, ConfigError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| value::<Species>(line, key, s))
        .collect()
}

/// Parse `key = value` lines over the defaults. `#` starts a comment. An
/// optional `version = 1` may precede every other key.
pub fn load_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut seen = HashSet::new();
    let mut first = true;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, raw_value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            reason: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let v = raw_value.trim();
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::Syntax {
                line,
                reason: format!("duplicate key `{key}`"),
            });
        }
        let is_first = std::mem::replace(&mut first, false);
        set_key(&mut cfg, line, key, v, is_first)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn set_key(
    cfg: &mut RunConfig,
    line: usize,
    key: &str,
    v: &str,
    is_first: bool,
) -> Result<(), ConfigError> {
    let t = &mut cfg.trigger;
    match key {
        "version" => {
            let ver: u32 = value(line, key, v)?;
            if !is_first {
                return Err(ConfigError::Syntax {
                    line,
                    reason: "`version` must be the first key".into(),
                });
            }
            if ver != 1 {
                return Err(ConfigError::Version(ver));
            }
        }
        "pt_max" => t.limits.pt_max = value(line, key, v)?,
        "phi_range" => t.limits.phi_range = value(line, key, v)?,
        "eta_max" => t.limits.eta_max = value(line, key, v)?,
        "n_input" => t.n_input = value(line, key, v)?,
        "n_seeds" => t.n_seeds = value(line, key, v)?,
        "n_filter_blocks" => t.n_filter_blocks = value(line, key, v)?,
        "block_size" => t.block_size = value(line, key, v)?,
        "max_candidates" => t.max_candidates = value(line, key, v)?,
        "max_taus" => t.max_taus = value(line, key, v)?,
        "filter_cone_r2" => t.filter_cone_r2 = value(line, key, v)?,
        "signal_cone_k" => t.signal_cone_k = value(line, key, v)?,
        "signal_cone_r2_min" => t.signal_cone_r2_min = value(line, key, v)?,
        "signal_cone_r2_max" => t.signal_cone_r2_max = value(line, key, v)?,
        "proximity_r2" => t.proximity_r2 = value(line, key, v)?,
        "min_seed_pt" => t.min_seed_pt = Pt(value(line, key, v)?),
        "min_tau_pt" => t.min_tau_pt = Pt(value(line, key, v)?),
        "allowed_signal_species" => t.allowed_signal_species = species_set(line, key, v)?,
        "merge" => cfg.variants.merge = value(line, key, v)?,
        "clean" => cfg.variants.clean = value(line, key, v)?,
        "fifo_depth" => cfg.timing.fifo_depth = value(line, key, v)?,
        "arrival_interval" => {
            cfg.timing.source = match v {
                "saturate" => SourceMode::Saturate,
                _ => SourceMode::Periodic(value(line, key, v)?),
            }
        }
        "ii_budget_ns" => cfg.budget.ii_budget_ns = value(line, key, v)?,
        "latency_budget_ns" => cfg.budget.latency_budget_ns = value(line, key, v)?,
        "base_freq_mhz" => cfg.budget.base_freq_mhz = value(line, key, v)?,
        "cdc_overhead" => cfg.budget.cdc_overhead_cycles = value(line, key, v)?,
        "sink.handshake" => cfg.timing.handshake[HOP_NAMES.len() - 1] = value(line, key, v)?,
        _ => return set_dotted(cfg, line, key, v),
    }
    Ok(())
}

fn set_dotted(cfg: &mut RunConfig, line: usize, key: &str, v: &str) -> Result<(), ConfigError> {
    let unknown = || ConfigError::UnknownKey {
        line,
        key: key.to_string(),
    };
    if let Some(freq) = key.strip_prefix("latency_budget.") {
        let freq: u64 = value(line, key, freq)?;
        cfg.budget
            .latency_budget_cycles
            .insert(freq, value(line, key, v)?);
        return Ok(());
    }
    let rest = key.strip_prefix("stage.").ok_or_else(unknown)?;
    let (name, field) = rest.split_once('.').ok_or_else(unknown)?;
    let idx = STAGE_NAMES
        .iter()
        .position(|s| *s == name)
        .ok_or_else(unknown)?;
    let o = &mut cfg.timing.overrides[idx];
    match field {
        "latency" => o.latency = Some(value(line, key, v)?),
        "ii" => o.ii = Some(value(line, key, v)?),
        "offset" => o.offset = Some(value(line, key, v)?),
        "handshake" => cfg.timing.handshake[idx] = value(line, key, v)?,
        _ => return Err(unknown()),
    }
    Ok(())
}
