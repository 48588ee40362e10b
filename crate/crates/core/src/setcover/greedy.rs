use std::time::Instant;

use super::{GraspPlan, MilpInstance, SolveOutcome, SolveStatus, TOLERANCE};

/// Repeatedly takes the available candidate with the largest capped
/// log-coverage `sum_j min(residual_j, -A[i][j])`, lowest index on ties, until
/// every garment is covered or nothing helps. Garments left short are dropped.
pub fn solve_greedy(inst: &MilpInstance) -> SolveOutcome {
    let start = Instant::now();
    let cands: Vec<usize> = (0..inst.n()).collect();
    let garments: Vec<usize> = (0..inst.m()).collect();
    let adj = inst.adjacency();
    let (selected, residual) = greedy_cover(inst, &cands, &garments, &adj);
    let dropped: Vec<usize> = garments.iter().copied().filter(|&j| residual[j] > TOLERANCE).collect();
    SolveOutcome {
        plan: GraspPlan::new(selected),
        status: if dropped.is_empty() { SolveStatus::FeasibleIncumbent } else { SolveStatus::Relaxed },
        dropped_garments: dropped,
        nodes_explored: 0,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

/// Greedy over a sub-problem. `adj` is indexed by global candidate id.
/// Returns the chosen candidates and the residual need per entry of `garments`.
pub(crate) fn greedy_cover(
    inst: &MilpInstance,
    cands: &[usize],
    garments: &[usize],
    adj: &[Vec<usize>],
) -> (Vec<usize>, Vec<f64>) {
    let mut residual: Vec<f64> = garments.iter().map(|&j| inst.need(j)).collect();
    let mut blocked = vec![false; inst.n()];
    let mut selected = Vec::new();
    loop {
        if residual.iter().all(|&r| r <= TOLERANCE) {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for &i in cands {
            if blocked[i] {
                continue;
            }
            let score: f64 = garments
                .iter()
                .zip(&residual)
                .filter(|(_, &r)| r > TOLERANCE)
                .map(|(&j, &r)| inst.gain(i, j).min(r))
                .sum();
            if score > 1e-12 && best.map_or(true, |(bi, bs)| score > bs || (score == bs && i < bi)) {
                best = Some((i, score));
            }
        }
        let Some((i, _)) = best else { break };
        selected.push(i);
        blocked[i] = true;
        for &k in &adj[i] {
            blocked[k] = true;
        }
        for (r, &j) in residual.iter_mut().zip(garments) {
            *r -= inst.gain(i, j);
        }
    }
    (selected, residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::ProbMatrix;
    use crate::setcover::build_milp;

    #[test]
    fn single_sufficient_candidate() {
        let p = ProbMatrix::from_rows(&[vec![0.2, 0.1], vec![0.8, 0.9], vec![0.5, 0.5]], 2);
        let out = solve_greedy(&build_milp(&p, 0.7, &[]).unwrap());
        assert_eq!(out.plan.selected, vec![1]);
        assert!(out.dropped_garments.is_empty());
    }

    #[test]
    fn conflicts_respected_and_unreachable_dropped() {
        let p = ProbMatrix::from_rows(&[vec![0.5, 0.0], vec![0.5, 0.0], vec![0.0, 0.1]], 2);
        let out = solve_greedy(&build_milp(&p, 0.7, &[(0, 1)]).unwrap());
        assert_eq!(out.plan.selected, vec![0, 2]);
        assert_eq!(out.dropped_garments, vec![0, 1]);
        assert_eq!(out.status, SolveStatus::Relaxed);
    }
}
