//! Fixed-point particle records and the angular-distance metric.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cost::Ops;
use crate::error::ModelError;
use crate::fixed;
use crate::{Coord, Dist2, PtWord};

/// Number of particle slots in one event frame.
pub const N_INPUT: usize = 128;

/// Saturation ceilings and the azimuth period shared by every stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub pt_max: PtWord,
    /// Azimuth period. Must be positive and even.
    pub phi_range: Coord,
    pub eta_max: Coord,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            pt_max: 65_535,
            phi_range: 2048,
            eta_max: 4096,
        }
    }
}

impl Limits {
    pub fn phi_half(&self) -> Coord {
        self.phi_range / 2
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.phi_range <= 0 || self.phi_range % 2 != 0 {
            return Err(ModelError::BadLimits(format!(
                "phi_range must be positive and even, got {}",
                self.phi_range
            )));
        }
        if self.eta_max < 0 {
            return Err(ModelError::BadLimits(format!(
                "eta_max must be non-negative, got {}",
                self.eta_max
            )));
        }
        Ok(())
    }

    pub fn check_pt(&self, pt: PtWord) -> Result<Pt, ModelError> {
        if pt > self.pt_max {
            Err(ModelError::PtOutOfRange {
                pt,
                max: self.pt_max,
            })
        } else {
            Ok(Pt(pt))
        }
    }

    pub fn check_coord(&self, eta: Coord, phi: Coord) -> Result<AngularCoord, ModelError> {
        if eta.unsigned_abs() > self.eta_max.unsigned_abs() {
            return Err(ModelError::EtaOutOfRange {
                eta,
                max: self.eta_max,
            });
        }
        let half = self.phi_half();
        if phi < -half || phi >= half {
            return Err(ModelError::PhiOutOfRange { phi, half });
        }
        Ok(AngularCoord { eta, phi })
    }
}

/// Transverse momentum in hardware quanta.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Pt(pub PtWord);

impl Pt {
    pub const ZERO: Pt = Pt(0);

    pub fn value(self) -> PtWord {
        self.0
    }

    /// Saturating accumulation; see [`saturating_pt_add`].
    pub fn saturating_add(self, other: Pt, limits: &Limits) -> Pt {
        saturating_pt_add(self, other, limits)
    }
}

impl fmt::Display for Pt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Position on the (eta, phi) grid. Both axes share one quantum.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct AngularCoord {
    pub eta: Coord,
    pub phi: Coord,
}

impl AngularCoord {
    pub const fn new(eta: Coord, phi: Coord) -> Self {
        AngularCoord { eta, phi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Species {
    ChargedHadron,
    NeutralHadron,
    Electron,
    Photon,
    Muon,
}

impl Species {
    pub const ALL: [Species; 5] = [
        Species::ChargedHadron,
        Species::NeutralHadron,
        Species::Electron,
        Species::Photon,
        Species::Muon,
    ];

    pub fn is_charged(self) -> bool {
        !matches!(self, Species::NeutralHadron | Species::Photon)
    }

    pub fn name(self) -> &'static str {
        match self {
            Species::ChargedHadron => "ChargedHadron",
            Species::NeutralHadron => "NeutralHadron",
            Species::Electron => "Electron",
            Species::Photon => "Photon",
            Species::Muon => "Muon",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl FromStr for Species {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Species::ALL
            .into_iter()
            .find(|sp| sp.name() == s)
            .ok_or_else(|| ModelError::UnknownSpecies(s.to_string()))
    }
}

/// A small set of species, stored as a bitmask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SpeciesSet(u8);

impl SpeciesSet {
    pub fn empty() -> Self {
        SpeciesSet(0)
    }

    pub fn contains(self, s: Species) -> bool {
        self.0 & s.bit() != 0
    }

    pub fn insert(&mut self, s: Species) {
        self.0 |= s.bit();
    }

    pub fn iter(self) -> impl Iterator<Item = Species> {
        Species::ALL.into_iter().filter(move |s| self.contains(*s))
    }
}

impl FromIterator<Species> for SpeciesSet {
    fn from_iter<I: IntoIterator<Item = Species>>(iter: I) -> Self {
        let mut set = SpeciesSet::empty();
        for s in iter {
            set.insert(s);
        }
        set
    }
}

/// Species plus electric charge. Charge is zero exactly for neutral species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParticleKind {
    species: Species,
    charge: i8,
}

impl ParticleKind {
    pub fn new(species: Species, charge: i8) -> Result<Self, ModelError> {
        let ok = if species.is_charged() {
            charge == 1 || charge == -1
        } else {
            charge == 0
        };
        if ok {
            Ok(ParticleKind { species, charge })
        } else {
            Err(ModelError::BadCharge { species, charge })
        }
    }

    pub fn charged(species: Species, positive: bool) -> Self {
        assert!(species.is_charged(), "{species:?} is neutral");
        ParticleKind {
            species,
            charge: if positive { 1 } else { -1 },
        }
    }

    pub fn neutral(species: Species) -> Self {
        assert!(!species.is_charged(), "{species:?} is charged");
        ParticleKind { species, charge: 0 }
    }

    pub fn species(self) -> Species {
        self.species
    }

    pub fn charge(self) -> i8 {
        self.charge
    }
}

/// Canonical file token: `ChargedHadron+`, `Muon-`, `Photon`, ...
impl fmt::Display for ParticleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.charge {
            1 => "+",
            -1 => "-",
            _ => "",
        };
        write!(f, "{}{}", self.species.name(), sign)
    }
}

impl FromStr for ParticleKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, charge) = if let Some(n) = s.strip_suffix('+') {
            (n, 1)
        } else if let Some(n) = s.strip_suffix('-') {
            (n, -1)
        } else {
            (s, 0)
        };
        let species: Species = name.parse()?;
        if charge == 0 && species.is_charged() {
            return Ok(ParticleKind::charged(species, true));
        }
        ParticleKind::new(species, charge)
    }
}

/// One detector hit in a fixed 128-slot frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Particle {
    pub pt: Pt,
    pub pos: AngularCoord,
    pub kind: ParticleKind,
    pub valid: bool,
}

impl Particle {
    pub fn new(pt: Pt, pos: AngularCoord, kind: ParticleKind) -> Self {
        Particle {
            pt,
            pos,
            kind,
            valid: true,
        }
    }

    /// Padding slot: zero pt, zero position, neutral, invalid.
    pub const fn padding() -> Self {
        Particle {
            pt: Pt(0),
            pos: AngularCoord::new(0, 0),
            kind: ParticleKind {
                species: Species::NeutralHadron,
                charge: 0,
            },
            valid: false,
        }
    }

    pub fn is_charged(&self) -> bool {
        self.kind.charge != 0
    }
}

/// One bunch-crossing worth of particles, always exactly [`N_INPUT`] slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub event_id: u64,
    particles: Vec<Particle>,
}

impl Event {
    /// Pads `particles` with invalid slots up to [`N_INPUT`].
    pub fn new(event_id: u64, mut particles: Vec<Particle>) -> Result<Self, ModelError> {
        if particles.len() > N_INPUT {
            return Err(ModelError::TooManyParticles(particles.len()));
        }
        particles.resize(N_INPUT, Particle::padding());
        Ok(Event {
            event_id,
            particles,
        })
    }

    pub fn empty(event_id: u64) -> Self {
        Event {
            event_id,
            particles: vec![Particle::padding(); N_INPUT],
        }
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn set(&mut self, slot: usize, p: Particle) {
        self.particles[slot] = p;
    }

    pub fn valid_count(&self) -> usize {
        self.particles.iter().filter(|p| p.valid).count()
    }
}

/// Wrapped azimuth difference `a - b` in `[-phi_half, phi_half)`.
pub fn wrap_delta_phi(a: Coord, b: Coord, limits: &Limits) -> Coord {
    let d = i64::from(a) - i64::from(b);
    fixed::wrap_centered(d, i64::from(limits.phi_range)) as Coord
}

/// Squared angular distance; see [`delta_r2_metered`].
pub fn delta_r2(p: AngularCoord, q: AngularCoord, limits: &Limits) -> Dist2 {
    delta_r2_metered(p, q, limits, &mut Ops::default())
}

/// `deta^2 + wrap(dphi)^2`, saturating. Costs two multiplications.
pub fn delta_r2_metered(p: AngularCoord, q: AngularCoord, limits: &Limits, ops: &mut Ops) -> Dist2 {
    let deta: Dist2 = fixed::abs_diff_widened(p.eta, q.eta);
    let dphi: Dist2 = wrap_delta_phi(p.phi, q.phi, limits).unsigned_abs().into();
    ops.distance();
    fixed::saturating_square(deta).saturating_add(fixed::saturating_square(dphi))
}

/// `min(a + b, pt_max)`.
pub fn saturating_pt_add(a: Pt, b: Pt, limits: &Limits) -> Pt {
    Pt(fixed::saturating_add_capped(a.0, b.0, limits.pt_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_wrap(a: i64, b: i64, range: i64) -> i64 {
        let half = range / 2;
        (-4..=4)
            .map(|k| a - b + k * range)
            .find(|d| (-half..half).contains(d))
            .unwrap()
    }

    #[test]
    fn wrap_examples() {
        let l = Limits::default();
        assert_eq!(wrap_delta_phi(100, 100, &l), 0);
        assert_eq!(brute_wrap(1000, -1000, 2048), -48);
        assert_eq!(wrap_delta_phi(1000, -1000, &l), -48);
        assert_eq!(wrap_delta_phi(-1000, 1000, &l), 48);
    }

    #[test]
    fn wrap_matches_brute_force_exhaustively_on_small_range() {
        let l = Limits {
            phi_range: 16,
            ..Limits::default()
        };
        for a in -8..8 {
            for b in -8..8 {
                assert_eq!(
                    i64::from(wrap_delta_phi(a, b, &l)),
                    brute_wrap(a.into(), b.into(), 16)
                );
            }
        }
    }

    #[test]
    fn delta_r2_examples() {
        let l = Limits::default();
        let p = AngularCoord::new(10, 20);
        assert_eq!(delta_r2(p, p, &l), 0);
        assert_eq!(
            delta_r2(AngularCoord::new(3, 4), AngularCoord::new(0, 0), &l),
            25
        );
        assert_eq!(
            delta_r2(AngularCoord::new(0, 1000), AngularCoord::new(0, -1000), &l),
            2304
        );
    }

    #[test]
    fn delta_r2_counts_two_multiplications() {
        let mut ops = Ops::default();
        delta_r2_metered(
            AngularCoord::new(1, 2),
            AngularCoord::new(3, 4),
            &Limits::default(),
            &mut ops,
        );
        assert_eq!(ops.mul, 2);
        assert_eq!(ops.div, 0);
        assert_eq!(ops.distance_evals, 1);
    }

    #[test]
    fn pt_add_examples() {
        let l = Limits::default();
        assert_eq!(saturating_pt_add(Pt(0), Pt(7), &l), Pt(7));
        assert_eq!(saturating_pt_add(Pt(60_000), Pt(10_000), &l), Pt(65_535));
        assert_eq!(saturating_pt_add(Pt(300), Pt(400), &l), Pt(700));
    }

    #[test]
    fn kind_tokens() {
        for tok in [
            "ChargedHadron+",
            "ChargedHadron-",
            "NeutralHadron",
            "Electron-",
            "Photon",
            "Muon+",
        ] {
            let k: ParticleKind = tok.parse().unwrap();
            assert_eq!(k.to_string(), tok);
        }
        assert!("Photon+".parse::<ParticleKind>().is_err());
        assert_eq!("ChargedHadron".parse::<ParticleKind>().unwrap().charge(), 1);
        assert!("Proton+".parse::<ParticleKind>().is_err());
    }

    #[test]
    fn charge_zero_iff_neutral() {
        for s in Species::ALL {
            for c in -1..=1i8 {
                let ok = ParticleKind::new(s, c).is_ok();
                assert_eq!(ok, (c == 0) != s.is_charged(), "{s:?} {c}");
            }
        }
    }

    #[test]
    fn event_is_padded() {
        let e = Event::new(
            3,
            vec![Particle::new(
                Pt(5),
                AngularCoord::new(0, 0),
                ParticleKind::neutral(Species::Photon),
            )],
        )
        .unwrap();
        assert_eq!(e.particles().len(), N_INPUT);
        assert_eq!(e.valid_count(), 1);
        assert!(e.particles()[1..].iter().all(|p| !p.valid && p.pt == Pt(0)));
        assert!(Event::new(0, vec![Particle::padding(); 129]).is_err());
    }

    #[test]
    fn limit_checks() {
        let l = Limits::default();
        assert!(l.check_pt(65_535).is_ok());
        assert!(l.check_pt(65_536).is_err());
        assert!(l.check_coord(4096, -1024).is_ok());
        assert!(l.check_coord(4097, 0).is_err());
        assert!(l.check_coord(0, 1024).is_err());
        assert!(Limits { phi_range: 7, ..l }.validate().is_err());
    }
}
