use super::{CandidateList, TriggerConfig};
use crate::cost::Ops;
use crate::model::delta_r2_metered;

/// Keep candidates of an allowed species inside the pt-dependent signal cone.
///
/// The cone is `clamp(signal_cone_k / max(total_pt, 1), r2_min, r2_max)`.
pub fn select_signal_candidates(list: &CandidateList, cfg: &TriggerConfig) -> CandidateList {
    select_signal_candidates_metered(list, cfg, &mut Ops::default())
}

/// The quotient is never formed: for integers `d <= floor(k / t)` is the same
/// test as `d * t <= k`, so the clamp reduces to
/// `d <= r2_min || (d <= r2_max && d * t <= k)`.
pub fn select_signal_candidates_metered(
    list: &CandidateList,
    cfg: &TriggerConfig,
    ops: &mut Ops,
) -> CandidateList {
    let t = u64::from(list.total_pt.0.max(1));
    let k = cfg.signal_cone_k;
    let kept = list
        .candidates
        .iter()
        .filter(|c| {
            ops.cmp(1);
            if !cfg.allowed_signal_species.contains(c.kind.species()) {
                return false;
            }
            let d = delta_r2_metered(c.pos, list.seed.particle.pos, &cfg.limits, ops);
            let scaled = u128::from(d) * u128::from(t);
            ops.mul(1);
            ops.cmp(3);
            d <= cfg.signal_cone_r2_min || (d <= cfg.signal_cone_r2_max && scaled <= u128::from(k))
        })
        .copied()
        .collect();
    CandidateList::new(list.seed, kept, &cfg.limits)
}
