use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::EventsError;
use crate::model::{Event, Limits, Particle, ParticleKind, N_INPUT};

pub const EVENTS_HEADER: &str = "v1,event_id,slot,pt,eta,phi,species";

/// Parse an event file. Records are grouped by `event_id` in order of first
/// appearance; unlisted slots are padding.
pub fn parse_events(text: &str, limits: &Limits) -> Result<Vec<Event>, EventsError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        None => return Err(EventsError::MissingHeader),
        Some((_, h)) if h.trim_end() == EVENTS_HEADER => {}
        Some((_, h)) => return Err(EventsError::BadHeader(h.to_string())),
    }
    let mut events: Vec<Event> = Vec::new();
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut filled: Vec<[bool; N_INPUT]> = Vec::new();
    for (n, raw) in lines {
        let line = n + 1;
        let raw = raw.trim_end();
        if raw.is_empty() {
            continue;
        }
        let bad = |reason: String| EventsError::Malformed { line, reason };
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(bad(format!("expected 6 fields, got {}", fields.len())));
        }
        let int = |i: usize, name: &str| -> Result<i64, EventsError> {
            fields[i]
                .parse::<i64>()
                .map_err(|e| bad(format!("{name} `{}`: {e}", fields[i])))
        };
        let event_id = u64::try_from(int(0, "event_id")?)
            .map_err(|_| bad("event_id must be non-negative".into()))?;
        let slot = int(1, "slot")?;
        if !(0..N_INPUT as i64).contains(&slot) {
            return Err(bad(format!("slot {slot} outside 0..{N_INPUT}")));
        }
        let slot = slot as usize;
        let pt = u32::try_from(int(2, "pt")?).map_err(|_| bad("pt out of range".into()))?;
        let pt = limits.check_pt(pt).map_err(|e| bad(e.to_string()))?;
        let eta = i32::try_from(int(3, "eta")?).map_err(|_| bad("eta out of range".into()))?;
        let phi = i32::try_from(int(4, "phi")?).map_err(|_| bad("phi out of range".into()))?;
        let pos = limits
            .check_coord(eta, phi)
            .map_err(|e| bad(e.to_string()))?;
        let kind: ParticleKind = fields[5]
            .parse()
            .map_err(|e: crate::error::ModelError| bad(e.to_string()))?;

        let at = *index.entry(event_id).or_insert_with(|| {
            events.push(Event::empty(event_id));
            filled.push([false; N_INPUT]);
            events.len() - 1
        });
        if filled[at][slot] {
            return Err(EventsError::DuplicateSlot {
                line,
                event_id,
                slot,
            });
        }
        filled[at][slot] = true;
        events[at].set(slot, Particle::new(pt, pos, kind));
    }
    Ok(events)
}

/// Canonical event file: events in order, valid slots ascending.
pub fn write_events(events: &[Event]) -> String {
    let mut out = String::new();
    out.push_str(EVENTS_HEADER);
    out.push('\n');
    for e in events {
        for (slot, p) in e.particles().iter().enumerate().filter(|(_, p)| p.valid) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                e.event_id, slot, p.pt.0, p.pos.eta, p.pos.phi, p.kind
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Pt, Species};

    fn parse(text: &str) -> Result<Vec<Event>, EventsError> {
        parse_events(text, &Limits::default())
    }

    #[test]
    fn header_only() {
        assert!(parse(&format!("{EVENTS_HEADER}\n")).unwrap().is_empty());
        assert_eq!(parse(""), Err(EventsError::MissingHeader));
        assert!(matches!(
            parse("event,slot\n"),
            Err(EventsError::BadHeader(_))
        ));
    }

    #[test]
    fn one_record() {
        let ev = parse(&format!("{EVENTS_HEADER}\n7,3,50,10,-20,ChargedHadron+\n")).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].event_id, 7);
        assert_eq!(ev[0].valid_count(), 1);
        let p = ev[0].particles()[3];
        assert_eq!((p.pt, p.pos.eta, p.pos.phi), (Pt(50), 10, -20));
        assert_eq!(p.kind.species(), Species::ChargedHadron);
    }

    #[test]
    fn unsigned_charged_token_reads_as_positive() {
        let ev = parse(&format!("{EVENTS_HEADER}\n7,3,50,10,-20,ChargedHadron\n")).unwrap();
        assert_eq!(ev[0].particles()[3].kind.charge(), 1);
    }

    #[test]
    fn errors_name_the_line() {
        let h = EVENTS_HEADER;
        let e = parse(&format!("{h}\n1,0,5,0,0,Photon\n1,0,6,0,0,Photon\n")).unwrap_err();
        assert_eq!(
            e,
            EventsError::DuplicateSlot {
                line: 3,
                event_id: 1,
                slot: 0
            }
        );
        let e = parse(&format!("{h}\n1,0,70000,0,0,Photon\n")).unwrap_err();
        assert!(e.to_string().starts_with("line 2:"), "{e}");
        assert!(e.to_string().contains("pt_max"), "{e}");
        for bad in [
            "1,128,5,0,0,Photon",
            "1,0,5,0,0,Graviton",
            "1,0,5,0,1024,Photon",
            "1,0,x,0,0,Photon",
            "1,0,5,0",
        ] {
            let e = parse(&format!("{h}\n{bad}\n")).unwrap_err();
            assert!(e.to_string().starts_with("line 2:"), "{bad}: {e}");
        }
    }

    #[test]
    fn grouping_in_first_appearance_order() {
        let text =
            format!("{EVENTS_HEADER}\n9,1,5,0,0,Photon\n2,0,5,0,0,Photon\n9,0,6,0,0,Muon-\n");
        let ev = parse(&text).unwrap();
        assert_eq!(
            ev.iter().map(|e| e.event_id).collect::<Vec<_>>(),
            vec![9, 2]
        );
        assert_eq!(ev[0].valid_count(), 2);
        let canon = write_events(&ev);
        assert_eq!(
            canon,
            format!("{EVENTS_HEADER}\n9,0,6,0,0,Muon-\n9,1,5,0,0,Photon\n2,0,5,0,0,Photon\n")
        );
        assert_eq!(write_events(&parse(&canon).unwrap()), canon);
    }
}
