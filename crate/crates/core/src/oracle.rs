//! Naive reference implementation of the whole trigger.
//!
//! Written from the algorithm description alone: full sorts, whole-event
//! scans, wide integers, division-form cone radius. It shares only the data
//! types with the production stages. Where a candidate list overflows, the
//! canonical choice is the first in-cone particles in slot order.

use crate::model::{AngularCoord, Event, Particle, Pt};
use crate::stages::{Tau, TriggerConfig};

fn wrap(d: i64, range: i64) -> i64 {
    let half = range / 2;
    (d + half).rem_euclid(range) - half
}

fn dist2(a: AngularCoord, b: AngularCoord, cfg: &TriggerConfig) -> u64 {
    let de = i64::from(a.eta) - i64::from(b.eta);
    let dp = wrap(
        i64::from(a.phi) - i64::from(b.phi),
        i64::from(cfg.limits.phi_range),
    );
    (de * de + dp * dp) as u64
}

fn capped_sum(pts: impl Iterator<Item = u32>, cfg: &TriggerConfig) -> u32 {
    pts.map(u64::from)
        .sum::<u64>()
        .min(u64::from(cfg.limits.pt_max)) as u32
}

/// Seed slots, highest pt first, ties to the lower slot.
fn oracle_seeds(event: &Event, cfg: &TriggerConfig) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..event.particles().len())
        .filter(|&i| {
            let p = &event.particles()[i];
            p.valid && p.kind.species().is_charged() && p.pt >= cfg.min_seed_pt
        })
        .collect();
    idx.sort_by_key(|&i| (std::cmp::Reverse(event.particles()[i].pt), i));
    idx.truncate(cfg.n_seeds);
    idx
}

fn in_cone(event: &Event, seed: &Particle, cfg: &TriggerConfig) -> Vec<Particle> {
    event
        .particles()
        .iter()
        .filter(|p| p.valid && dist2(p.pos, seed.pos, cfg) <= cfg.filter_cone_r2)
        .copied()
        .collect()
}

fn build_tau(seed: &Particle, candidates: &[Particle], cfg: &TriggerConfig) -> Tau {
    let total = capped_sum(candidates.iter().map(|p| p.pt.0), cfg);
    let radius2 = (cfg.signal_cone_k / u64::from(total.max(1)))
        .clamp(cfg.signal_cone_r2_min, cfg.signal_cone_r2_max);
    let signal: Vec<&Particle> = candidates
        .iter()
        .filter(|p| {
            cfg.allowed_signal_species.contains(p.kind.species())
                && dist2(p.pos, seed.pos, cfg) <= radius2
        })
        .collect();
    let weight: i64 = signal.iter().map(|p| i64::from(p.pt.0)).sum();
    if weight == 0 {
        return Tau::INVALID;
    }
    let range = i64::from(cfg.limits.phi_range);
    let seed_phi = i64::from(seed.pos.phi);
    let eta: i64 = signal
        .iter()
        .map(|p| i64::from(p.pt.0) * i64::from(p.pos.eta))
        .sum::<i64>()
        / weight;
    let dphi: i64 = signal
        .iter()
        .map(|p| i64::from(p.pt.0) * wrap(i64::from(p.pos.phi) - seed_phi, range))
        .sum::<i64>()
        / weight;
    let sum_pt = Pt(capped_sum(signal.iter().map(|p| p.pt.0), cfg));
    if sum_pt < cfg.min_tau_pt {
        return Tau::INVALID;
    }
    Tau::new(
        sum_pt,
        AngularCoord::new(eta as i32, wrap(seed_phi + dphi, range) as i32),
    )
}

/// The `n_seeds` tau slots before cleaning; missing seeds are invalid.
pub fn oracle_taus(event: &Event, cfg: &TriggerConfig) -> Vec<Tau> {
    let mut taus: Vec<Tau> = oracle_seeds(event, cfg)
        .into_iter()
        .map(|s| {
            let seed = event.particles()[s];
            let mut cone = in_cone(event, &seed, cfg);
            cone.truncate(cfg.max_candidates);
            build_tau(&seed, &cone, cfg)
        })
        .collect();
    taus.resize(cfg.n_seeds, Tau::INVALID);
    taus
}

/// Some seed has more in-cone particles than the candidate limit, so the
/// merge solutions may legitimately pick different subsets.
pub fn oracle_overflow(event: &Event, cfg: &TriggerConfig) -> bool {
    oracle_seeds(event, cfg)
        .into_iter()
        .any(|s| in_cone(event, &event.particles()[s], cfg).len() > cfg.max_candidates)
}

/// Survivors of cleaning: taus with no valid neighbour that outranks them,
/// capped to the `max_taus` highest, in slot order.
pub fn oracle_clean(taus: &[Tau], cfg: &TriggerConfig) -> Vec<Tau> {
    let outranks =
        |j: usize, i: usize| taus[j].pt > taus[i].pt || (taus[j].pt == taus[i].pt && j < i);
    let mut survivors: Vec<usize> = (0..taus.len())
        .filter(|&i| {
            taus[i].valid
                && !(0..taus.len()).any(|j| {
                    j != i
                        && taus[j].valid
                        && dist2(taus[i].pos, taus[j].pos, cfg) <= cfg.proximity_r2
                        && outranks(j, i)
                })
        })
        .collect();
    survivors.sort_by_key(|&i| (std::cmp::Reverse(taus[i].pt), i));
    survivors.truncate(cfg.max_taus);
    survivors.sort_unstable();
    survivors.into_iter().map(|i| taus[i]).collect()
}

/// Final taus of one event.
pub fn oracle_trigger(event: &Event, cfg: &TriggerConfig) -> Vec<Tau> {
    oracle_clean(&oracle_taus(event, cfg), cfg)
}

/// What a correct merge must produce, without choosing which items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeDescriptor {
    pub required_len: usize,
    pub sources: Vec<Particle>,
    /// All source items must appear.
    pub exact: bool,
}

impl MergeDescriptor {
    /// `Ok` iff `output` has the required size and is drawn from the sources
    /// without reuse.
    pub fn check(&self, output: &[Particle]) -> Result<(), String> {
        if output.len() != self.required_len {
            return Err(format!(
                "expected {} items, got {}",
                self.required_len,
                output.len()
            ));
        }
        let mut pool = self.sources.clone();
        for (k, p) in output.iter().enumerate() {
            match pool.iter().position(|q| q == p) {
                Some(at) => {
                    pool.swap_remove(at);
                }
                None => return Err(format!("item {k} ({p:?}) is not an unused source item")),
            }
        }
        if self.exact && !pool.is_empty() {
            return Err(format!("{} source items missing", pool.len()));
        }
        Ok(())
    }
}

pub fn oracle_merge(lists: &[Vec<Particle>], limit: usize) -> MergeDescriptor {
    let sources: Vec<Particle> = lists.iter().flatten().copied().collect();
    MergeDescriptor {
        required_len: sources.len().min(limit),
        exact: sources.len() <= limit,
        sources,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ParticleKind, Species};

    fn hadron(pt: u32, eta: i32, phi: i32) -> Particle {
        Particle::new(
            Pt(pt),
            AngularCoord::new(eta, phi),
            ParticleKind::charged(Species::ChargedHadron, false),
        )
    }

    #[test]
    fn empty_event() {
        assert!(oracle_trigger(&Event::empty(0), &TriggerConfig::default()).is_empty());
    }

    #[test]
    fn single_hadron_identity() {
        let mut e = Event::empty(1);
        e.set(90, hadron(33, -700, 1000));
        let out = oracle_trigger(&e, &TriggerConfig::default());
        assert_eq!(out, vec![Tau::new(Pt(33), AngularCoord::new(-700, 1000))]);
    }

    #[test]
    fn wrap_is_centered() {
        assert_eq!(wrap(1024, 2048), -1024);
        assert_eq!(wrap(-1025, 2048), 1023);
        assert_eq!(wrap(3000, 2048), 952);
    }

    #[test]
    fn merge_descriptor_boundaries() {
        let p = |k: u32| hadron(k + 1, 0, 0);
        let twelve = vec![(0..3).map(p).collect::<Vec<_>>(); 4];
        let d = oracle_merge(&twelve, 30);
        assert_eq!((d.required_len, d.exact), (12, true));
        assert!(d.check(&twelve.concat()).is_ok());
        assert!(d.check(&twelve.concat()[..11]).is_err());

        let full: Vec<Vec<Particle>> = (0..4)
            .map(|l| (0..32).map(|k| p(l * 32 + k)).collect())
            .collect();
        let d = oracle_merge(&full, 30);
        assert_eq!((d.required_len, d.exact), (30, false));
        assert!(d.check(&full[3][..30]).is_ok());
        let mut dup = full[0][..29].to_vec();
        dup.push(full[0][0]);
        assert!(d.check(&dup).is_err());

        let thirty = vec![
            (0..8).map(p).collect(),
            (0..8).map(p).collect(),
            (0..8).map(p).collect(),
            (0..6).map(p).collect(),
        ];
        let d = oracle_merge(&thirty, 30);
        assert_eq!((d.required_len, d.exact), (30, true));
    }

    #[test]
    fn overflow_detected() {
        let mut e = Event::empty(0);
        for s in 0..31 {
            e.set(s, hadron(10, s as i32, 0));
        }
        assert!(oracle_overflow(&e, &TriggerConfig::default()));
        let mut e = Event::empty(0);
        for s in 0..30 {
            e.set(s, hadron(10, s as i32, 0));
        }
        assert!(!oracle_overflow(&e, &TriggerConfig::default()));
    }
}
