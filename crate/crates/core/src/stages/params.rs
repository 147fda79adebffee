use super::{CandidateList, Tau, TauParams, TriggerConfig};
use crate::cost::Ops;
use crate::fixed;
use crate::model::{wrap_delta_phi, AngularCoord, Limits, Particle, Pt};
use crate::Coord;

/// Saturating sum of candidate pt.
pub fn compute_total_pt(candidates: &[Particle], limits: &Limits) -> Pt {
    Pt(fixed::saturating_sum_capped(
        candidates.iter().map(|p| p.pt.0),
        limits.pt_max,
    ))
}

/// pt-weighted centroid of the signal candidates.
pub fn compute_tau_params(list: &CandidateList, limits: &Limits) -> TauParams {
    compute_tau_params_metered(list, limits, &mut Ops::default())
}

/// The azimuth is averaged as wrapped offsets from the seed. Both divisions
/// use the exact (unsaturated) weight sum and truncate toward zero.
pub fn compute_tau_params_metered(
    list: &CandidateList,
    limits: &Limits,
    ops: &mut Ops,
) -> TauParams {
    let seed_phi = list.seed.particle.pos.phi;
    let mut weight: i64 = 0;
    let mut eta_acc: i64 = 0;
    let mut phi_acc: i64 = 0;
    for c in &list.candidates {
        let w = i64::from(c.pt.0);
        let dphi = i64::from(wrap_delta_phi(c.pos.phi, seed_phi, limits));
        weight += w;
        eta_acc += w * i64::from(c.pos.eta);
        phi_acc += w * dphi;
        ops.mul(2);
        ops.add(4);
    }
    ops.cmp(1);
    if weight == 0 {
        return TauParams::INVALID;
    }
    let eta_w = eta_acc / weight;
    let dphi_w = phi_acc / weight;
    ops.div(2);
    let phi_w = wrap_delta_phi((i64::from(seed_phi) + dphi_w) as Coord, 0, limits);
    ops.add(1);
    TauParams {
        sum_pt: compute_total_pt(&list.candidates, limits),
        eta_w: eta_w as Coord,
        phi_w,
        valid: true,
    }
}

/// Valid tau iff the parameters are valid and clear `min_tau_pt`.
pub fn reconstruct_tau(params: &TauParams, cfg: &TriggerConfig) -> Tau {
    if params.valid && params.sum_pt >= cfg.min_tau_pt {
        Tau::new(params.sum_pt, AngularCoord::new(params.eta_w, params.phi_w))
    } else {
        Tau::INVALID
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stages::test_util::*;

    fn list(cands: Vec<Particle>, seed_phi: i32) -> CandidateList {
        CandidateList::new(
            seed_of(hadron(50, 0, seed_phi), 0),
            cands,
            &Limits::default(),
        )
    }

    #[test]
    fn total_pt_examples() {
        let l = Limits::default();
        assert_eq!(compute_total_pt(&[], &l), Pt(0));
        let c = vec![photon(3, 0, 0), photon(4, 0, 0), photon(5, 0, 0)];
        assert_eq!(compute_total_pt(&c, &l), Pt(12));
        let c = vec![photon(40_000, 0, 0), photon(40_000, 0, 0)];
        assert_eq!(compute_total_pt(&c, &l), Pt(65_535));
    }

    #[test]
    fn single_candidate_is_identity() {
        let p = compute_tau_params(&list(vec![photon(10, 100, -50)], 30), &Limits::default());
        assert_eq!(
            p,
            TauParams {
                sum_pt: Pt(10),
                eta_w: 100,
                phi_w: -50,
                valid: true
            }
        );
    }

    #[test]
    fn weighted_eta() {
        let p = compute_tau_params(
            &list(vec![photon(1, 0, 7), photon(3, 4, 7)], 7),
            &Limits::default(),
        );
        // (1*0 + 3*4) / 4 = 3 exactly.
        assert_eq!(p.eta_w, 3);
        assert_eq!(p.phi_w, 7);
        assert_eq!(p.sum_pt, Pt(4));
    }

    #[test]
    fn truncation_toward_zero() {
        // (-1*1 + -1*2) / 2 = -1.5 -> -1
        let p = compute_tau_params(
            &list(vec![photon(1, -1, 0), photon(1, -2, 0)], 0),
            &Limits::default(),
        );
        assert_eq!(p.eta_w, -1);
    }

    #[test]
    fn phi_average_across_seam() {
        let p = compute_tau_params(
            &list(vec![photon(1, 0, 1020), photon(1, 0, -1022)], 1020),
            &Limits::default(),
        );
        // offsets 0 and +6 from the seed; mean +3 -> 1023
        assert_eq!(p.phi_w, 1023);
    }

    #[test]
    fn empty_list_is_invalid_and_divides_nothing() {
        let mut ops = Ops::default();
        let p = compute_tau_params_metered(&list(vec![], 0), &Limits::default(), &mut ops);
        assert!(!p.valid);
        assert_eq!(p.sum_pt, Pt(0));
        assert_eq!(ops.div, 0);
    }

    #[test]
    fn group_costs_two_divisions() {
        let mut ops = Ops::default();
        let c: Vec<Particle> = (0..7).map(|i| photon(5 + i, i as i32, 0)).collect();
        compute_tau_params_metered(&list(c, 0), &Limits::default(), &mut ops);
        assert_eq!(ops.div, 2);
    }

    #[test]
    fn reconstruction_threshold() {
        let cfg = TriggerConfig::default();
        let mk = |pt| TauParams {
            sum_pt: Pt(pt),
            eta_w: 5,
            phi_w: -5,
            valid: true,
        };
        assert_eq!(reconstruct_tau(&TauParams::INVALID, &cfg), Tau::INVALID);
        assert_eq!(reconstruct_tau(&mk(15), &cfg), Tau::INVALID);
        assert_eq!(reconstruct_tau(&mk(16), &cfg), tau(16, 5, -5));
    }
}
