use std::fmt;
use std::str::FromStr;

use crate::model::{AngularCoord, Event, Particle, ParticleKind, Pt, Species, N_INPUT};

const LCG_A: u64 = 6_364_136_223_846_793_005;
const LCG_C: u64 = 1_442_695_040_888_963_407;

/// 64-bit linear congruential generator; each draw is the high 32 bits of
/// `state = state * A + C (mod 2^64)`.
#[derive(Debug, Clone)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn next_u32(&mut self) -> u32 {
        self.state = self.state.wrapping_mul(LCG_A).wrapping_add(LCG_C);
        (self.state >> 32) as u32
    }

    /// Uniform in `0..n` by multiply-shift.
    pub fn below(&mut self, n: u32) -> u32 {
        ((u64::from(self.next_u32()) * u64::from(n)) >> 32) as u32
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: i32, hi: i32) -> i32 {
        debug_assert!(lo <= hi);
        lo + self.below((hi - lo) as u32 + 1) as i32
    }

    fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        items[self.below(items.len() as u32) as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Uniform,
    Clustered,
    Dense,
}

/// Multiplicity, pt spectrum and clustering of generated events.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Profile {
    pub kind: ProfileKind,
    pub background: (i32, i32),
    pub background_pt: (i32, i32),
    pub clusters: (i32, i32),
    pub cluster_size: (i32, i32),
    /// Half-width of a cluster in each coordinate.
    pub spread: i32,
    pub core_pt: (i32, i32),
    pub member_pt: (i32, i32),
    pub eta_span: i32,
    pub phi_range: i32,
}

impl Profile {
    /// Isolated particles spread over the whole grid.
    pub fn uniform() -> Self {
        Profile {
            kind: ProfileKind::Uniform,
            background: (20, 60),
            background_pt: (1, 60),
            clusters: (0, 0),
            cluster_size: (0, 0),
            spread: 0,
            core_pt: (0, 0),
            member_pt: (0, 0),
            eta_span: 2000,
            phi_range: 2048,
        }
    }

    /// Jet-like clusters, each with at least two hard charged hadrons, over
    /// a soft background.
    pub fn clustered() -> Self {
        Profile {
            kind: ProfileKind::Clustered,
            background: (10, 40),
            background_pt: (1, 12),
            clusters: (2, 4),
            cluster_size: (3, 8),
            spread: 60,
            core_pt: (20, 80),
            member_pt: (2, 40),
            eta_span: 2000,
            phi_range: 2048,
        }
    }

    /// One very busy region that overflows the candidate limit.
    pub fn dense() -> Self {
        Profile {
            kind: ProfileKind::Dense,
            background: (10, 30),
            background_pt: (1, 12),
            clusters: (1, 2),
            cluster_size: (36, 48),
            spread: 50,
            core_pt: (20, 80),
            member_pt: (2, 40),
            eta_span: 2000,
            phi_range: 2048,
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(Profile::uniform()),
            "clustered" => Ok(Profile::clustered()),
            "dense" => Ok(Profile::dense()),
            _ => Err(format!("unknown profile `{s}` (uniform, clustered, dense)")),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.kind {
            ProfileKind::Uniform => "uniform",
            ProfileKind::Clustered => "clustered",
            ProfileKind::Dense => "dense",
        })
    }
}

fn random_kind(rng: &mut Lcg, species: &[Species]) -> ParticleKind {
    let s = rng.pick(species);
    if s.is_charged() {
        ParticleKind::charged(s, rng.below(2) == 0)
    } else {
        ParticleKind::neutral(s)
    }
}

fn wrap_phi(phi: i32, range: i32) -> i32 {
    let half = range / 2;
    (phi + half).rem_euclid(range) - half
}

fn gen_event(rng: &mut Lcg, id: u64, p: &Profile) -> Event {
    let mut particles: Vec<Particle> = Vec::new();
    let half = p.phi_range / 2;
    let eta_max = p.eta_span + p.spread;
    let n_clusters = rng.range(p.clusters.0, p.clusters.1);
    for _ in 0..n_clusters {
        let ce = rng.range(-p.eta_span, p.eta_span);
        let cp = rng.range(-half, half - 1);
        let size = rng.range(p.cluster_size.0, p.cluster_size.1).max(2);
        for k in 0..size {
            let (kind, pt) = if k < 2 {
                (
                    ParticleKind::charged(Species::ChargedHadron, rng.below(2) == 0),
                    rng.range(p.core_pt.0, p.core_pt.1),
                )
            } else {
                (
                    random_kind(
                        rng,
                        &[
                            Species::ChargedHadron,
                            Species::Photon,
                            Species::NeutralHadron,
                            Species::Electron,
                        ],
                    ),
                    rng.range(p.member_pt.0, p.member_pt.1),
                )
            };
            let eta = (ce + rng.range(-p.spread, p.spread)).clamp(-eta_max, eta_max);
            let phi = wrap_phi(cp + rng.range(-p.spread, p.spread), p.phi_range);
            particles.push(Particle::new(
                Pt(pt as u32),
                AngularCoord::new(eta, phi),
                kind,
            ));
        }
    }
    let n_bg = rng.range(p.background.0, p.background.1).max(1);
    for _ in 0..n_bg {
        let kind = random_kind(rng, &Species::ALL);
        let pt = rng.range(p.background_pt.0, p.background_pt.1);
        let eta = rng.range(-p.eta_span, p.eta_span);
        let phi = rng.range(-half, half - 1);
        particles.push(Particle::new(
            Pt(pt as u32),
            AngularCoord::new(eta, phi),
            kind,
        ));
    }
    particles.truncate(N_INPUT);

    // Scatter over random slots so every filter block sees traffic.
    let mut slots: Vec<usize> = (0..N_INPUT).collect();
    for i in (1..N_INPUT).rev() {
        let j = rng.below(i as u32 + 1) as usize;
        slots.swap(i, j);
    }
    let mut event = Event::empty(id);
    for (p, &s) in particles.into_iter().zip(&slots) {
        event.set(s, p);
    }
    event
}

/// `count` events with ids `0..count`, fully determined by `seed`.
pub fn gen_events(seed: u64, count: usize, profile: &Profile) -> Vec<Event> {
    let mut rng = Lcg::new(seed);
    (0..count as u64)
        .map(|id| gen_event(&mut rng, id, profile))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Limits;

    #[test]
    fn lcg_reference_values() {
        let mut r = Lcg::new(0);
        let s1 = LCG_C;
        assert_eq!(r.next_u32(), (s1 >> 32) as u32);
        let s2 = s1.wrapping_mul(LCG_A).wrapping_add(LCG_C);
        assert_eq!(r.next_u32(), (s2 >> 32) as u32);
    }

    #[test]
    fn range_bounds() {
        let mut r = Lcg::new(3);
        for _ in 0..10_000 {
            let v = r.range(-5, 5);
            assert!((-5..=5).contains(&v));
        }
        assert_eq!(r.range(7, 7), 7);
    }

    #[test]
    fn deterministic_and_in_range() {
        let limits = Limits::default();
        for prof in [Profile::uniform(), Profile::clustered(), Profile::dense()] {
            let a = gen_events(11, 20, &prof);
            assert_eq!(a, gen_events(11, 20, &prof));
            assert_ne!(a, gen_events(12, 20, &prof));
            for e in &a {
                assert!(e.valid_count() >= 1);
                for p in e.particles().iter().filter(|p| p.valid) {
                    limits.check_pt(p.pt.0).unwrap();
                    limits.check_coord(p.pos.eta, p.pos.phi).unwrap();
                }
            }
        }
        assert!(gen_events(1, 0, &Profile::clustered()).is_empty());
    }

    #[test]
    fn profile_names_round_trip() {
        for name in ["uniform", "clustered", "dense"] {
            assert_eq!(name.parse::<Profile>().unwrap().to_string(), name);
        }
        assert!("sparse".parse::<Profile>().is_err());
    }
}
