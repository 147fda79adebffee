//! `taupipe` command-line front end.
//!
//! Exit codes: 0 success, 1 a timing budget is violated, 2 input error,
//! 3 functional divergence between implementations.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::budget::evaluate_feasibility;
use crate::engine::{apply_cdc, PipelineMetrics};
use crate::io::{
    gen_events, load_config, parse_events, write_events, write_report, EventRecord, MetricsRecord,
    Profile, RunConfig, RunReport, TauRecord,
};
use crate::model::{Event, Particle};
use crate::oracle::{oracle_merge, oracle_overflow, oracle_trigger};
use crate::pipeline::{run_trigger_pipeline, TriggerRun};
use crate::stages::{CleanVariant, MergeVariant, Tau, Variants};
use crate::trigger::{run_event, run_event_traced, StageOps};

#[derive(Debug, Parser)]
#[command(name = "taupipe", version, about = "Tau trigger pipeline simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate events through the pipeline and check them against the oracle.
    Run(RunArgs),
    /// Run both solutions of one step and compare outputs and timing.
    Compare(CompareArgs),
    /// Evaluate timing budgets at several clock frequencies.
    Explore(ExploreArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct EventSource {
    /// Event file.
    #[arg(long, value_name = "FILE")]
    pub events: Option<PathBuf>,
    /// Generated events.
    #[arg(long, value_name = "SEED:COUNT:PROFILE")]
    pub gen: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: EventSource,
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub merge: Option<MergeVariant>,
    #[arg(long)]
    pub clean: Option<CleanVariant>,
    /// Clock frequency in MHz.
    #[arg(long, default_value_t = 360)]
    pub freq: u64,
    /// Write the JSON-lines report here.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Skip the oracle cross-check.
    #[arg(long)]
    pub no_oracle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dimension {
    Merge,
    Clean,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_enum)]
    pub dimension: Dimension,
    #[command(flatten)]
    pub source: EventSource,
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Also write the minimized counterexample event file here.
    #[arg(long, value_name = "FILE")]
    pub counterexample: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExploreArgs {
    /// Comma-separated frequencies in MHz.
    #[arg(long, value_name = "LIST")]
    pub freqs: String,
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub events: Option<PathBuf>,
    #[arg(
        long,
        value_name = "SEED:COUNT:PROFILE",
        default_value = "1:100:clustered"
    )]
    pub gen: String,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Divergence(String),
}

type CliResult<T> = Result<T, Failure>;

fn input<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{context}: {e}"))
}

fn load_run_config(path: &Option<PathBuf>) -> CliResult<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(input(&p.display().to_string()))?;
            load_config(&text).map_err(input(&p.display().to_string()))
        }
    }
}

fn parse_gen(spec: &str) -> CliResult<(u64, usize, Profile)> {
    let bad = || Failure::Input(format!("--gen expects SEED:COUNT:PROFILE, got `{spec}`"));
    let mut parts = spec.split(':');
    let (Some(seed), Some(count), Some(profile), None) =
        (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return Err(bad());
    };
    let seed = seed.parse().map_err(|_| bad())?;
    let count = count.parse().map_err(|_| bad())?;
    let profile = profile.parse().map_err(Failure::Input)?;
    Ok((seed, count, profile))
}

fn load_events(
    events: &Option<PathBuf>,
    gen: &Option<String>,
    cfg: &RunConfig,
) -> CliResult<Vec<Event>> {
    match (events, gen) {
        (Some(p), _) => {
            let text = fs::read_to_string(p).map_err(input(&p.display().to_string()))?;
            parse_events(&text, &cfg.trigger.limits).map_err(input(&p.display().to_string()))
        }
        (None, Some(g)) => {
            let (seed, count, profile) = parse_gen(g)?;
            Ok(gen_events(seed, count, &profile))
        }
        (None, None) => Err(Failure::Input("no event source given".into())),
    }
}

fn simulate(events: &[Event], cfg: &RunConfig, v: Variants) -> CliResult<TriggerRun> {
    run_trigger_pipeline(events, &cfg.trigger, &cfg.timing, v).map_err(input("simulation"))
}

/// Pipeline against the direct chain, then against the oracle.
fn cross_check(
    events: &[Event],
    run: &TriggerRun,
    cfg: &RunConfig,
    v: Variants,
    oracle: bool,
) -> CliResult<()> {
    let t = &cfg.trigger;
    for (e, got) in events.iter().zip(&run.taus) {
        if *got != run_event(e, t, v) {
            return Err(Failure::Divergence(format!(
                "event {}: pipeline output differs from the direct stage chain",
                e.event_id
            )));
        }
        if !oracle {
            continue;
        }
        if v.merge == MergeVariant::B && oracle_overflow(e, t) {
            // The oracle fixes one overflow choice; B may keep another.
            let trace = run_event_traced(e, t, v, &mut StageOps::default());
            for (s, list) in trace.candidates.iter().enumerate() {
                let sources: Vec<Vec<Particle>> =
                    trace.blocks.iter().map(|b| b[s].clone()).collect();
                if let Err(why) = oracle_merge(&sources, t.max_candidates).check(&list.candidates) {
                    return Err(Failure::Divergence(format!(
                        "event {} seed {s}: merge output rejected: {why}",
                        e.event_id
                    )));
                }
            }
        } else if *got != oracle_trigger(e, t) {
            return Err(Failure::Divergence(format!(
                "event {}: pipeline output differs from the oracle",
                e.event_id
            )));
        }
    }
    Ok(())
}

fn tau_records(taus: &[Tau]) -> Vec<TauRecord> {
    taus.iter().map(TauRecord::from).collect()
}

fn cmd_run(a: &RunArgs) -> CliResult<ExitCode> {
    let mut cfg = load_run_config(&a.config)?;
    if let Some(m) = a.merge {
        cfg.variants.merge = m;
    }
    if let Some(c) = a.clean {
        cfg.variants.clean = c;
    }
    let events = load_events(&a.source.events, &a.source.gen, &cfg)?;
    let budget = cfg.budget.timing_budget(a.freq).map_err(input("--freq"))?;
    let v = cfg.variants;
    let run = simulate(&events, &cfg, v)?;
    cross_check(&events, &run, &cfg, v, !a.no_oracle)?;

    let metrics = apply_cdc(&run.metrics, cfg.budget.cdc_for(a.freq));
    let feas = evaluate_feasibility(&metrics, &budget);
    let report = RunReport {
        events: events
            .iter()
            .zip(&run.taus)
            .map(|(e, t)| EventRecord {
                event_id: e.event_id,
                taus: tau_records(t),
            })
            .collect(),
        metrics: MetricsRecord {
            merge: v.merge.to_string(),
            clean: v.clean.to_string(),
            events: events.len() as u64,
            latency_cycles: metrics.latency_cycles,
            cdc_overhead_cycles: metrics.cdc_overhead_cycles,
            ii_cycles: metrics.ii_cycles,
            ii_measured: metrics.ii_measured,
            stalls: metrics.stalls(),
            starvation: metrics.starvation(),
            oracle_checked: !a.no_oracle,
            feasibility: feas,
            stages: metrics.stages.clone(),
            channels: metrics.channels.clone(),
        },
    };
    if let Some(p) = &a.report {
        fs::write(p, write_report(&report)).map_err(input(&p.display().to_string()))?;
    }

    let taus: usize = run.taus.iter().map(Vec::len).sum();
    println!(
        "events {}  taus {}  merge {}  clean {}",
        events.len(),
        taus,
        v.merge,
        v.clean
    );
    println!(
        "latency {} cycles (cdc +{})  II {} cycles{}  stalls {}",
        metrics.latency_cycles,
        metrics.cdc_overhead_cycles,
        metrics.ii_cycles,
        if metrics.ii_measured {
            ""
        } else {
            " (static bound)"
        },
        metrics.stalls()
    );
    println!(
        "cross-check: {}",
        if a.no_oracle {
            "direct chain only"
        } else {
            "direct chain and oracle agree"
        }
    );
    println!("{feas}");
    Ok(if feas.feasible {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Greedily drop particles while the two variants still disagree.
fn minimize(event: &Event, cfg: &RunConfig, a: Variants, b: Variants) -> Event {
    let t = &cfg.trigger;
    let diverges = |e: &Event| run_event(e, t, a) != run_event(e, t, b);
    let mut cur = event.clone();
    loop {
        let mut shrunk = false;
        for slot in 0..cur.particles().len() {
            if !cur.particles()[slot].valid {
                continue;
            }
            let mut cand = cur.clone();
            cand.set(slot, Particle::padding());
            if diverges(&cand) {
                cur = cand;
                shrunk = true;
            }
        }
        if !shrunk {
            return cur;
        }
    }
}

fn comparison_table(
    dim: Dimension,
    runs: &[(Variants, PipelineMetrics); 2],
    cfg: &RunConfig,
) -> String {
    let stage = match dim {
        Dimension::Merge => 2,
        Dimension::Clean => 6,
    };
    let specs: Vec<_> = runs
        .iter()
        .map(|(v, _)| cfg.timing.stage_table(*v)[stage].clone())
        .collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<22}{:>12}{:>12}",
        format!("{} step", specs[0].name),
        "solution A",
        "solution B"
    );
    let row = |s: &mut String, name: &str, a: u64, b: u64| {
        let _ = writeln!(s, "{name:<22}{a:>12}{b:>12}");
    };
    row(
        &mut s,
        "stage latency",
        specs[0].latency_cycles,
        specs[1].latency_cycles,
    );
    row(&mut s, "stage II", specs[0].ii_cycles, specs[1].ii_cycles);
    row(
        &mut s,
        "pipeline latency",
        runs[0].1.latency_cycles,
        runs[1].1.latency_cycles,
    );
    row(
        &mut s,
        "pipeline II",
        runs[0].1.ii_cycles,
        runs[1].1.ii_cycles,
    );
    s
}

fn cmd_compare(a: &CompareArgs) -> CliResult<ExitCode> {
    let cfg = load_run_config(&a.config)?;
    let events = load_events(&a.source.events, &a.source.gen, &cfg)?;
    let base = cfg.variants;
    let pair = match a.dimension {
        Dimension::Merge => [
            Variants {
                merge: MergeVariant::A,
                ..base
            },
            Variants {
                merge: MergeVariant::B,
                ..base
            },
        ],
        Dimension::Clean => [
            Variants {
                clean: CleanVariant::A,
                ..base
            },
            Variants {
                clean: CleanVariant::B,
                ..base
            },
        ],
    };
    let ra = simulate(&events, &cfg, pair[0])?;
    let rb = simulate(&events, &cfg, pair[1])?;
    print!(
        "{}",
        comparison_table(
            a.dimension,
            &[(pair[0], ra.metrics.clone()), (pair[1], rb.metrics.clone())],
            &cfg
        )
    );
    let diverging = events
        .iter()
        .zip(ra.taus.iter().zip(&rb.taus))
        .find(|(_, (x, y))| x != y)
        .map(|(e, _)| e);
    match diverging {
        None => {
            println!("functional outputs identical on {} events", events.len());
            Ok(ExitCode::SUCCESS)
        }
        Some(e) => {
            let small = minimize(e, &cfg, pair[0], pair[1]);
            let dump = write_events(std::slice::from_ref(&small));
            let t = &cfg.trigger;
            println!(
                "DIVERGENCE on event {} ({} of {} particles kept after minimization)",
                e.event_id,
                small.valid_count(),
                e.valid_count()
            );
            println!(
                "solution A: {:?}",
                tau_records(&run_event(&small, t, pair[0]))
            );
            println!(
                "solution B: {:?}",
                tau_records(&run_event(&small, t, pair[1]))
            );
            println!("counterexample:");
            print!("{dump}");
            if let Some(p) = &a.counterexample {
                fs::write(p, &dump).map_err(input(&p.display().to_string()))?;
            }
            Err(Failure::Divergence(format!(
                "{} solutions disagree on event {}",
                match a.dimension {
                    Dimension::Merge => "merge",
                    Dimension::Clean => "clean",
                },
                e.event_id
            )))
        }
    }
}

fn parse_freqs(list: &str) -> CliResult<Vec<u64>> {
    let freqs: Vec<u64> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u64>()
                .ok()
                .filter(|&f| f > 0)
                .ok_or_else(|| Failure::Input(format!("bad frequency `{s}`")))
        })
        .collect::<CliResult<_>>()?;
    if freqs.is_empty() {
        return Err(Failure::Input(
            "--freqs must list at least one frequency".into(),
        ));
    }
    Ok(freqs)
}

fn cmd_explore(a: &ExploreArgs) -> CliResult<ExitCode> {
    let freqs = parse_freqs(&a.freqs)?;
    let cfg = load_run_config(&a.config)?;
    let events = load_events(&a.events, &Some(a.gen.clone()), &cfg)?;
    let run = simulate(&events, &cfg, cfg.variants)?;
    println!(
        "merge {}  clean {}  events {}  base latency {} cycles  II {} cycles",
        cfg.variants.merge,
        cfg.variants.clean,
        events.len(),
        run.metrics.latency_cycles,
        run.metrics.ii_cycles
    );
    println!(
        "{:>8}{:>12}{:>12}{:>10}{:>6}{:>10}{:>8}{:>12}",
        "MHz", "II budget", "lat budget", "latency", "cdc", "II", "slack", "verdict"
    );
    for f in freqs {
        let budget = cfg.budget.timing_budget(f).map_err(input("--freqs"))?;
        let m = apply_cdc(&run.metrics, cfg.budget.cdc_for(f));
        let r = evaluate_feasibility(&m, &budget);
        println!(
            "{:>8}{:>12}{:>12}{:>10}{:>6}{:>10}{:>8}{:>12}",
            f,
            r.ii_budget_cycles,
            r.latency_budget_cycles,
            r.achieved_latency_cycles,
            m.cdc_overhead_cycles,
            r.achieved_ii_cycles,
            r.latency_slack_cycles,
            if r.feasible { "feasible" } else { "INFEASIBLE" }
        );
    }
    Ok(ExitCode::SUCCESS)
}

pub fn run(cli: &Cli) -> ExitCode {
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Explore(a) => cmd_explore(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Divergence(msg)) => {
            eprintln!("divergence: {msg}");
            ExitCode::from(3)
        }
    }
}

pub fn main() -> ExitCode {
    run(&Cli::parse())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gen_spec_parsing() {
        let (s, c, p) = parse_gen("1:100:clustered").unwrap();
        assert_eq!((s, c, p.to_string().as_str()), (1, 100, "clustered"));
        assert!(parse_gen("1:100").is_err());
        assert!(parse_gen("x:1:uniform").is_err());
        assert!(parse_gen("1:1:weird").is_err());
        assert!(parse_gen("1:1:uniform:extra").is_err());
    }

    #[test]
    fn freq_list_parsing() {
        assert_eq!(parse_freqs("360,300").unwrap(), vec![360, 300]);
        assert_eq!(parse_freqs(" 250 ").unwrap(), vec![250]);
        assert!(parse_freqs("").is_err());
        assert!(parse_freqs("0").is_err());
        assert!(parse_freqs("fast").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
