use std::time::Instant;

use super::{GraspPlan, MilpInstance, SolveOutcome, SolveStatus, TOLERANCE};
use crate::error::SetCoverError;

const MAX_CANDIDATES: usize = 20;

/// Enumerates every subset of candidates. Test oracle for [`super::solve_exact`].
///
/// Garments are dropped by the same rule the exact solver applies: first those
/// that no valid plan covers on its own, then, if the rest still cannot be
/// covered together, a garment is kept (in index order) only when it can be
/// covered jointly with those kept before it. Among the minimum-size valid
/// plans covering the kept garments, the lexicographically smallest is returned.
pub fn brute_force(inst: &MilpInstance) -> Result<SolveOutcome, SetCoverError> {
    let n = inst.n();
    if n > MAX_CANDIDATES {
        return Err(SetCoverError::TooLarge(n));
    }
    assert!(inst.m() <= 64, "brute force tracks garments in a u64");
    let start = Instant::now();
    let m = inst.m();
    let conflict_masks: Vec<u32> = {
        let mut masks = vec![0u32; n];
        for &(i, k) in inst.conflicts() {
            masks[i] |= 1 << k;
            masks[k] |= 1 << i;
        }
        masks
    };
    // Valid subsets and the garments each one covers.
    let mut valid: Vec<(u32, u64)> = Vec::new();
    for set in 0u32..(1u32 << n) {
        if (0..n).any(|i| set & (1 << i) != 0 && set & conflict_masks[i] != 0) {
            continue;
        }
        let mut covered = 0u64;
        for j in 0..m {
            let lhs: f64 = (0..n).filter(|i| set & (1 << i) != 0).map(|i| inst.a(i, j)).sum();
            if lhs <= inst.b()[j] + TOLERANCE {
                covered |= 1 << j;
            }
        }
        valid.push((set, covered));
    }
    let coverable = |need: u64| valid.iter().any(|&(_, c)| c & need == need);

    let mut keep: u64 = (0..m).filter(|&j| coverable(1 << j)).fold(0, |acc, j| acc | (1 << j));
    if !coverable(keep) {
        let mut joint = 0u64;
        for j in 0..m {
            if keep & (1 << j) != 0 && coverable(joint | (1 << j)) {
                joint |= 1 << j;
            }
        }
        keep = joint;
    }
    let mut best: Option<Vec<usize>> = None;
    for &(set, covered) in &valid {
        if covered & keep != keep {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| set & (1 << i) != 0).collect();
        let better = match &best {
            None => true,
            Some(b) => idx.len() < b.len() || (idx.len() == b.len() && idx < *b),
        };
        if better {
            best = Some(idx);
        }
    }
    let dropped: Vec<usize> = (0..m).filter(|&j| keep & (1 << j) == 0).collect();
    Ok(SolveOutcome {
        plan: GraspPlan::new(best.unwrap_or_default()),
        status: if dropped.is_empty() { SolveStatus::Optimal } else { SolveStatus::Relaxed },
        dropped_garments: dropped,
        nodes_explored: valid.len() as u64,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
