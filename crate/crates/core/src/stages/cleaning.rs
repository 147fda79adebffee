//! Duplicate suppression among the reconstructed taus.
//!
//! A tau is dominated by a nearby tau with strictly higher pt, or with equal
//! pt and a lower slot index. Both solutions drop exactly the dominated taus,
//! then keep at most `max_taus` survivors.

use super::{Tau, TriggerConfig};
use crate::cost::Ops;
use crate::model::delta_r2_metered;

/// `delta_r2 <= proximity_r2`.
pub fn near_by(a: &Tau, b: &Tau, cfg: &TriggerConfig, ops: &mut Ops) -> bool {
    ops.cmp(1);
    delta_r2_metered(a.pos, b.pos, &cfg.limits, ops) <= cfg.proximity_r2
}

/// Tau `i` ranks below tau `j`: lower pt, or equal pt and higher slot.
pub fn less_pt(i: usize, ti: &Tau, j: usize, tj: &Tau) -> bool {
    ti.pt < tj.pt || (ti.pt == tj.pt && i > j)
}

/// Square boolean matrix, `m(i, j) = NearBy(i, j) AND LessPt(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleaningMatrix {
    n: usize,
    cells: Vec<bool>,
}

impl CleaningMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j]
    }

    /// Row `i` has any set cell: tau `i` is dropped.
    pub fn row_any(&self, i: usize) -> bool {
        self.cells[i * self.n..(i + 1) * self.n].iter().any(|c| *c)
    }

    /// All set cells as `(row, column)`, zero-based, row-major.
    pub fn ones(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j))
            .collect()
    }
}

pub fn build_cleaning_matrix(taus: &[Tau], cfg: &TriggerConfig) -> CleaningMatrix {
    build_cleaning_matrix_metered(taus, cfg, &mut Ops::default())
}

pub fn build_cleaning_matrix_metered(
    taus: &[Tau],
    cfg: &TriggerConfig,
    ops: &mut Ops,
) -> CleaningMatrix {
    let n = taus.len();
    let mut cells = vec![false; n * n];
    for i in 0..n {
        for j in i + 1..n {
            if !(taus[i].valid && taus[j].valid) {
                continue;
            }
            if !near_by(&taus[i], &taus[j], cfg, ops) {
                continue;
            }
            ops.cmp(2);
            if less_pt(i, &taus[i], j, &taus[j]) {
                cells[i * n + j] = true;
            } else {
                cells[j * n + i] = true;
            }
        }
    }
    CleaningMatrix { n, cells }
}

/// Keep the `max_taus` highest-pt survivors, reported in slot order.
fn cap_survivors(taus: &[Tau], mut survivors: Vec<usize>, max: usize, ops: &mut Ops) -> Vec<Tau> {
    if survivors.len() > max {
        survivors.sort_by(|&a, &b| {
            ops.cmp(1);
            taus[b].pt.cmp(&taus[a].pt).then(a.cmp(&b))
        });
        survivors.truncate(max);
        survivors.sort_unstable();
    }
    survivors.into_iter().map(|i| taus[i]).collect()
}

/// Matrix formulation: drop every tau whose row has a set cell.
pub fn clean_solution_b(taus: &[Tau], cfg: &TriggerConfig) -> Vec<Tau> {
    clean_solution_b_metered(taus, cfg, &mut Ops::default())
}

pub fn clean_solution_b_metered(taus: &[Tau], cfg: &TriggerConfig, ops: &mut Ops) -> Vec<Tau> {
    let m = build_cleaning_matrix_metered(taus, cfg, ops);
    let survivors = (0..taus.len())
        .filter(|&i| taus[i].valid && !m.row_any(i))
        .collect();
    cap_survivors(taus, survivors, cfg.max_taus, ops)
}

/// Sort-then-suppress formulation. A dropped tau keeps suppressing the taus
/// graded after it.
pub fn clean_solution_a(taus: &[Tau], cfg: &TriggerConfig) -> Vec<Tau> {
    clean_solution_a_metered(taus, cfg, &mut Ops::default())
}

pub fn clean_solution_a_metered(taus: &[Tau], cfg: &TriggerConfig, ops: &mut Ops) -> Vec<Tau> {
    let mut graded: Vec<usize> = (0..taus.len()).filter(|&i| taus[i].valid).collect();
    graded.sort_by(|&a, &b| {
        ops.cmp(1);
        taus[b].pt.cmp(&taus[a].pt).then(a.cmp(&b))
    });
    let mut dropped = vec![false; taus.len()];
    for (k, &i) in graded.iter().enumerate() {
        for &j in &graded[k + 1..] {
            if near_by(&taus[i], &taus[j], cfg, ops) {
                dropped[j] = true;
            }
        }
    }
    let survivors = (0..taus.len())
        .filter(|&i| taus[i].valid && !dropped[i])
        .collect();
    cap_survivors(taus, survivors, cfg.max_taus, ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stages::test_util::tau;

    fn cfg() -> TriggerConfig {
        TriggerConfig::default()
    }

    /// Six taus in three well-separated proximity groups, padded to 16.
    fn three_groups() -> Vec<Tau> {
        let a = (0, 0);
        let b = (1000, 500);
        let c = (-1000, -500);
        let rows = [(a, 74), (b, 37), (a, 25), (b, 25), (c, 70), (b, 59)];
        let mut v: Vec<Tau> = rows
            .iter()
            .enumerate()
            .map(|(k, ((e, p), pt))| tau(*pt, e + k as i32, *p))
            .collect();
        v.resize(16, Tau::INVALID);
        v
    }

    #[test]
    fn three_group_matrix() {
        let m = build_cleaning_matrix(&three_groups(), &cfg());
        // 1-based (2,6) (3,1) (4,2) (4,6)
        assert_eq!(m.ones(), vec![(1, 5), (2, 0), (3, 1), (3, 5)]);
        for i in 0..16 {
            assert!(!m.get(i, i));
        }
    }

    #[test]
    fn three_group_survivors_both_solutions() {
        let t = three_groups();
        let want = vec![t[0], t[4], t[5]];
        assert_eq!(clean_solution_b(&t, &cfg()), want);
        assert_eq!(clean_solution_a(&t, &cfg()), want);
    }

    #[test]
    fn single_tau_matrix_is_empty() {
        let mut t = vec![Tau::INVALID; 16];
        t[3] = tau(40, 0, 0);
        assert!(build_cleaning_matrix(&t, &cfg()).ones().is_empty());
    }

    #[test]
    fn equal_pt_lower_index_wins() {
        let mut t = vec![Tau::INVALID; 16];
        t[2] = tau(30, 0, 0);
        t[9] = tau(30, 10, 0);
        let m = build_cleaning_matrix(&t, &cfg());
        assert!(m.get(9, 2));
        assert!(!m.get(2, 9));
        assert_eq!(clean_solution_b(&t, &cfg()), vec![t[2]]);
        assert_eq!(clean_solution_a(&t, &cfg()), vec![t[2]]);
    }

    #[test]
    fn chain_keeps_only_head() {
        // a near b, b near c, a not near c (120 + 120 > 163).
        let mut t = vec![Tau::INVALID; 16];
        t[0] = tau(30, 240, 0); // c
        t[1] = tau(90, 0, 0); // a
        t[2] = tau(60, 120, 0); // b
        assert_eq!(clean_solution_b(&t, &cfg()), vec![t[1]]);
        assert_eq!(clean_solution_a(&t, &cfg()), vec![t[1]]);
    }

    #[test]
    fn isolated_taus_capped_to_top_eight() {
        let t: Vec<Tau> = (0..16)
            .map(|i| tau(100 + (i as u32 * 7) % 16, (i - 8) * 400, 0))
            .collect();
        let out = clean_solution_b(&t, &cfg());
        assert_eq!(out.len(), 8);
        let mut by_pt: Vec<usize> = (0..16).collect();
        by_pt.sort_by_key(|&i| (std::cmp::Reverse(t[i].pt), i));
        let mut keep: Vec<usize> = by_pt[..8].to_vec();
        keep.sort();
        assert_eq!(out, keep.iter().map(|&i| t[i]).collect::<Vec<_>>());
        assert_eq!(clean_solution_a(&t, &cfg()), out);
    }

    #[test]
    fn all_invalid_gives_nothing() {
        let t = vec![Tau::INVALID; 16];
        assert!(clean_solution_a(&t, &cfg()).is_empty());
        assert!(clean_solution_b(&t, &cfg()).is_empty());
    }
}
