//! Probabilistic set cover over grasp candidates.
//!
//! Taking logs turns the per-garment requirement
//! `prod_i (1 - p_ij)^{x_i} <= 1 - q_j` into the linear covering constraint
//! `sum_i x_i log(1 - p_ij) <= log(1 - q_j)`; overlapping grasps are kept out
//! of the same plan by pairwise packing constraints. The resulting 0/1
//! program is solved exactly by branch-and-bound ([`solve_exact`]),
//! approximately by a greedy rule ([`solve_greedy`]), and by enumeration for
//! testing ([`brute_force`]).
//!
//! Internally everything works with non-negative gains `-A[i][j]` and needs
//! `-b[j]`: a garment is covered once its accumulated gain reaches its need
//! within [`TOLERANCE`].

mod brute;
mod exact;
mod greedy;
pub mod io;

pub use brute::brute_force;
pub use exact::solve_exact;
pub use greedy::solve_greedy;

use serde::{Deserialize, Serialize};

use crate::error::SetCoverError;
use crate::predictor::ProbMatrix;

/// Slack on log-domain constraint comparisons.
pub const TOLERANCE: f64 = 1e-9;

/// The covering program `min 1'x  s.t.  A'x <= b,  x_i + x_k <= 1 (conflicts)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MilpInstance {
    n: usize,
    m: usize,
    /// `A[i][j] = log(1 - p_ij)`, row-major n x m.
    a: Vec<f64>,
    /// `b[j] = log(1 - q_j)`.
    b: Vec<f64>,
    /// Sorted, deduplicated pairs with `i < k`.
    conflicts: Vec<(usize, usize)>,
}

impl MilpInstance {
    pub fn new(n: usize, m: usize, a: Vec<f64>, b: Vec<f64>, conflicts: &[(usize, usize)]) -> Result<Self, SetCoverError> {
        assert_eq!(a.len(), n * m, "A shape");
        assert_eq!(b.len(), m, "b length");
        for (k, &v) in a.iter().enumerate() {
            if !(v.is_finite() && v <= 0.0) {
                return Err(SetCoverError::InvalidProbability { row: k / m.max(1), col: k % m.max(1), value: 1.0 - v.exp() });
            }
        }
        for &v in &b {
            if !(v.is_finite() && v < 0.0) {
                return Err(SetCoverError::InvalidTarget(1.0 - v.exp()));
            }
        }
        let mut pairs = Vec::with_capacity(conflicts.len());
        for &(i, k) in conflicts {
            if i >= n || k >= n {
                return Err(SetCoverError::InvalidConflict(i, k));
            }
            if i != k {
                pairs.push((i.min(k), i.max(k)));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self { n, m, a, b, conflicts: pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.m + j]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn conflicts(&self) -> &[(usize, usize)] {
        &self.conflicts
    }

    /// `-A[i][j]`, the log-coverage grasp `i` contributes to garment `j`.
    #[inline]
    pub(crate) fn gain(&self, i: usize, j: usize) -> f64 {
        -self.a[i * self.m + j]
    }

    /// `-b[j]`.
    #[inline]
    pub(crate) fn need(&self, j: usize) -> f64 {
        -self.b[j]
    }

    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, k) in &self.conflicts {
            adj[i].push(k);
            adj[k].push(i);
        }
        adj
    }

    /// No conflicting pair is fully selected.
    pub fn is_valid(&self, selected: &[usize]) -> bool {
        let mut chosen = vec![false; self.n];
        for &i in selected {
            chosen[i] = true;
        }
        !self.conflicts.iter().any(|&(i, k)| chosen[i] && chosen[k])
    }

    /// Garments whose covering constraint holds under `selected`.
    pub fn satisfied(&self, selected: &[usize]) -> Vec<bool> {
        (0..self.m)
            .map(|j| {
                let lhs: f64 = selected.iter().map(|&i| self.a(i, j)).sum();
                lhs <= self.b[j] + TOLERANCE
            })
            .collect()
    }
}

/// Builds the covering program from a probability table and a uniform target `q`.
pub fn build_milp(p: &ProbMatrix, q: f64, conflicts: &[(usize, usize)]) -> Result<MilpInstance, SetCoverError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(SetCoverError::InvalidTarget(q));
    }
    let (n, m) = (p.n(), p.m());
    let mut a = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            let v = p.get(i, j);
            if !(0.0..1.0).contains(&v) {
                return Err(SetCoverError::InvalidProbability { row: i, col: j, value: v });
            }
            a.push((1.0 - v).ln());
        }
    }
    MilpInstance::new(n, m, a, vec![(1.0 - q).ln(); m], conflicts)
}

/// Support of the 0/1 plan vector, ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraspPlan {
    pub selected: Vec<usize>,
}

impl GraspPlan {
    pub fn new(mut selected: Vec<usize>) -> Self {
        selected.sort_unstable();
        selected.dedup();
        Self { selected }
    }

    pub fn objective(&self) -> usize {
        self.selected.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Exact,
    Greedy,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "greedy" => Ok(Self::Greedy),
            other => Err(format!("unknown strategy '{other}' (expected exact|greedy)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Minimum removal probability per garment.
    pub q: f64,
    /// Wall-clock budget in seconds; unset means unlimited. Leaving it unset
    /// keeps runs reproducible, since only the node budget is deterministic.
    pub time_budget: Option<f64>,
    /// Branch-and-bound nodes before the search settles for its incumbent.
    pub node_budget: u64,
    pub strategy: Strategy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { q: 0.7, time_budget: None, node_budget: 20_000, strategy: Strategy::Exact }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// Every constraint holds and no smaller valid plan exists.
    Optimal,
    /// Every constraint holds; optimality was not established.
    FeasibleIncumbent,
    /// The search ran out of budget before finding any feasible plan.
    Infeasible,
    /// Some garments could not be covered and were dropped; the plan covers the rest.
    Relaxed,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Optimal => "optimal",
            Self::FeasibleIncumbent => "feasible-incumbent",
            Self::Infeasible => "infeasible",
            Self::Relaxed => "relaxed",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub plan: GraspPlan,
    pub status: SolveStatus,
    /// Garments whose constraint was dropped, ascending.
    pub dropped_garments: Vec<usize>,
    pub nodes_explored: u64,
    /// Seconds.
    pub wall_time: f64,
}

impl SolveOutcome {
    pub fn has_plan(&self) -> bool {
        self.status != SolveStatus::Infeasible
    }
}

/// Dispatches on `cfg.strategy`; an exact search that exhausts its budget
/// without a plan falls back to greedy.
pub fn solve(inst: &MilpInstance, cfg: &SolverConfig) -> SolveOutcome {
    match cfg.strategy {
        Strategy::Greedy => solve_greedy(inst),
        Strategy::Exact => {
            let out = solve_exact(inst, cfg);
            if out.has_plan() {
                out
            } else {
                log::debug!("exact search exhausted its budget without a plan; using greedy");
                let mut g = solve_greedy(inst);
                g.nodes_explored += out.nodes_explored;
                g.wall_time += out.wall_time;
                g
            }
        }
    }
}

/// Per-garment failure probability `prod_{i in plan} (1 - p_ij)`.
pub fn plan_failure_prob(plan: &GraspPlan, p: &ProbMatrix) -> Vec<f64> {
    (0..p.m())
        .map(|j| plan.selected.iter().map(|&i| 1.0 - p.get(i, j)).product())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_candidate_meets_target_exactly() {
        let p = ProbMatrix::from_rows(&[vec![0.7]], 1);
        let inst = build_milp(&p, 0.7, &[]).unwrap();
        assert!((inst.a(0, 0) - 0.3f64.ln()).abs() < 1e-15);
        assert!((inst.b()[0] - 0.3f64.ln()).abs() < 1e-15);
        let out = solve_exact(&inst, &SolverConfig::default());
        assert_eq!(out.plan.selected, vec![0]);
        assert_eq!(out.status, SolveStatus::Optimal);
    }

    #[test]
    fn zero_probability_gives_zero_coefficient() {
        let p = ProbMatrix::from_rows(&[vec![0.0, 0.4]], 2);
        let inst = build_milp(&p, 0.7, &[]).unwrap();
        assert_eq!(inst.a(0, 0), 0.0);
    }

    #[test]
    fn certain_grasp_is_rejected() {
        let p = ProbMatrix::from_rows(&[vec![1.0]], 1);
        assert!(matches!(build_milp(&p, 0.7, &[]), Err(SetCoverError::InvalidProbability { .. })));
        let p = ProbMatrix::from_rows(&[vec![0.5]], 1);
        assert!(build_milp(&p, 1.0, &[]).is_err());
        assert!(build_milp(&p, 0.0, &[]).is_err());
        assert!(build_milp(&p, 0.7, &[(0, 3)]).is_err());
    }

    #[test]
    fn half_probability_needs_two_grasps() {
        // ceil(ln 0.3 / ln 0.5) = ceil(1.737) = 2
        let p = ProbMatrix::from_rows(&vec![vec![0.5]; 4], 1);
        let inst = build_milp(&p, 0.7, &[]).unwrap();
        assert_eq!(solve_exact(&inst, &SolverConfig::default()).plan.objective(), 2);
        assert_eq!(solve_greedy(&inst).plan.objective(), 2);
        assert_eq!(brute_force(&inst).unwrap().plan.objective(), 2);
    }

    #[test]
    fn failure_probabilities() {
        let p = ProbMatrix::from_rows(&[vec![0.7], vec![0.5], vec![0.5]], 1);
        assert_eq!(plan_failure_prob(&GraspPlan::default(), &p), vec![1.0]);
        assert!((plan_failure_prob(&GraspPlan::new(vec![0]), &p)[0] - 0.3).abs() < 1e-15);
        assert_eq!(plan_failure_prob(&GraspPlan::new(vec![1, 2]), &p), vec![0.25]);
    }

    #[test]
    fn conflicts_are_normalized() {
        let inst = MilpInstance::new(3, 1, vec![-0.1; 3], vec![-1.0], &[(2, 0), (0, 2), (1, 1)]).unwrap();
        assert_eq!(inst.conflicts(), &[(0, 2)]);
        assert!(inst.is_valid(&[0, 1]) && !inst.is_valid(&[0, 2]));
    }

    #[test]
    fn strategy_parses() {
        assert_eq!("greedy".parse::<Strategy>().unwrap(), Strategy::Greedy);
        assert!("lp".parse::<Strategy>().is_err());
    }
}
