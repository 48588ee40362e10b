//! Depth-first branch-and-bound for the covering program.
//!
//! Before searching, the instance is reduced in three exact steps:
//! candidates that cover no live garment are discarded; a candidate is
//! discarded when another one with the same closed conflict neighbourhood
//! covers at least as much of every garment; and the remaining
//! candidate/garment incidence graph (plus conflict edges) is split into
//! connected components that are solved independently.
//!
//! Each node branches on the garment with the largest covering lower bound
//! `ceil(residual_j / max_i gain_ij)`: one child per available candidate that
//! helps that garment, in decreasing order of total coverage, with earlier
//! siblings excluded from later subtrees. A node is pruned when the selected
//! count plus that bound cannot beat the incumbent.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use super::greedy::greedy_cover;
use super::{GraspPlan, MilpInstance, SolveOutcome, SolveStatus, SolverConfig, TOLERANCE};

pub fn solve_exact(inst: &MilpInstance, cfg: &SolverConfig) -> SolveOutcome {
    let start = Instant::now();
    let mut budget = Budget::new(cfg.node_budget, cfg.time_budget.map(Duration::from_secs_f64), start);
    let adj = inst.adjacency();
    let finish = |plan: Vec<usize>, status, dropped: Vec<usize>, budget: &Budget| SolveOutcome {
        plan: GraspPlan::new(plan),
        status,
        dropped_garments: dropped,
        nodes_explored: budget.nodes,
        wall_time: start.elapsed().as_secs_f64(),
    };
    if inst.m() == 0 {
        return finish(Vec::new(), SolveStatus::Optimal, Vec::new(), &budget);
    }

    let (mut kept, mut dropped): (Vec<usize>, Vec<usize>) =
        (0..inst.m()).partition(|&j| reachable_alone(inst, &adj, j, &mut budget));

    let mut result = search(inst, &adj, &kept, Mode::Optimize, &mut budget);
    if let SubResult::Infeasible { proved: true } = result {
        // Every garment is coverable alone but not all together: keep them
        // greedily in index order while a joint cover still exists.
        let mut joint: Vec<usize> = Vec::new();
        for &j in &kept {
            joint.push(j);
            match search(inst, &adj, &joint, Mode::FirstFeasible, &mut budget) {
                SubResult::Feasible { .. } => {}
                _ => {
                    joint.pop();
                }
            }
        }
        dropped.extend(kept.iter().copied().filter(|j| !joint.contains(j)));
        dropped.sort_unstable();
        kept = joint;
        result = search(inst, &adj, &kept, Mode::Optimize, &mut budget);
    }
    match result {
        SubResult::Feasible { plan, proved } => {
            let status = if !dropped.is_empty() {
                SolveStatus::Relaxed
            } else if proved {
                SolveStatus::Optimal
            } else {
                SolveStatus::FeasibleIncumbent
            };
            finish(plan, status, dropped, &budget)
        }
        SubResult::Infeasible { .. } => finish(Vec::new(), SolveStatus::Infeasible, dropped, &budget),
    }
}

struct Budget {
    nodes: u64,
    limit: u64,
    deadline: Option<Instant>,
    exhausted: bool,
}

impl Budget {
    fn new(limit: u64, time: Option<Duration>, start: Instant) -> Self {
        Self { nodes: 0, limit, deadline: time.map(|t| start + t), exhausted: false }
    }

    fn tick(&mut self) -> bool {
        if self.exhausted {
            return false;
        }
        self.nodes += 1;
        if self.nodes > self.limit {
            self.exhausted = true;
        } else if self.nodes % 256 == 0 {
            if let Some(d) = self.deadline {
                self.exhausted = Instant::now() >= d;
            }
        }
        !self.exhausted
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Optimize,
    FirstFeasible,
}

enum SubResult {
    Feasible { plan: Vec<usize>, proved: bool },
    Infeasible { proved: bool },
}

/// Whether some conflict-free set of candidates covers garment `j` by itself
/// (max-weight independent set search with early exit). An exhausted budget
/// counts as reachable; the joint search settles such cases.
fn reachable_alone(inst: &MilpInstance, adj: &[Vec<usize>], j: usize, budget: &mut Budget) -> bool {
    let need = inst.need(j);
    let mut cands: Vec<usize> = (0..inst.n()).filter(|&i| inst.gain(i, j) > 0.0).collect();
    cands.sort_by(|&a, &b| inst.gain(b, j).total_cmp(&inst.gain(a, j)).then(a.cmp(&b)));
    let total: f64 = cands.iter().map(|&i| inst.gain(i, j)).sum();
    if total < need - TOLERANCE {
        return false;
    }
    let mut blocked = vec![0u32; inst.n()];
    let mut suffix = vec![0.0; cands.len() + 1];
    for k in (0..cands.len()).rev() {
        suffix[k] = suffix[k + 1] + inst.gain(cands[k], j);
    }

    fn dfs(
        k: usize,
        acc: f64,
        need: f64,
        j: usize,
        cands: &[usize],
        suffix: &[f64],
        inst: &MilpInstance,
        adj: &[Vec<usize>],
        blocked: &mut [u32],
        budget: &mut Budget,
    ) -> Option<bool> {
        if acc >= need - TOLERANCE {
            return Some(true);
        }
        if k == cands.len() || acc + suffix[k] < need - TOLERANCE {
            return Some(false);
        }
        if !budget.tick() {
            return None;
        }
        let i = cands[k];
        if blocked[i] == 0 {
            for &nb in &adj[i] {
                blocked[nb] += 1;
            }
            let r = dfs(k + 1, acc + inst.gain(i, j), need, j, cands, suffix, inst, adj, blocked, budget);
            for &nb in &adj[i] {
                blocked[nb] -= 1;
            }
            if r != Some(false) {
                return r;
            }
        }
        dfs(k + 1, acc, need, j, cands, suffix, inst, adj, blocked, budget)
    }

    dfs(0, 0.0, need, j, &cands, &suffix, inst, adj, &mut blocked, budget).unwrap_or(true)
}

/// Solves the sub-program restricted to `garments`, component by component.
fn search(inst: &MilpInstance, adj: &[Vec<usize>], garments: &[usize], mode: Mode, budget: &mut Budget) -> SubResult {
    if garments.is_empty() {
        return SubResult::Feasible { plan: Vec::new(), proved: true };
    }
    let relevant: Vec<usize> = (0..inst.n())
        .filter(|&i| garments.iter().any(|&j| inst.gain(i, j) > 0.0))
        .collect();
    let live = drop_dominated(inst, adj, &relevant, garments);

    let mut plan = Vec::new();
    let mut proved = true;
    for comp in components(inst, adj, &live, garments) {
        let mut bb = Component::new(inst, adj, &comp.candidates, &comp.garments, mode);
        match bb.run(budget) {
            SubResult::Feasible { plan: p, proved: pr } => {
                plan.extend(p);
                proved &= pr;
            }
            infeasible => return infeasible,
        }
    }
    plan.sort_unstable();
    SubResult::Feasible { plan, proved }
}

/// Removes candidates dominated by a twin: same closed conflict neighbourhood
/// (within `relevant`) and at least the same gain on every garment. Swapping
/// such a candidate for its dominator keeps any plan valid and covering.
fn drop_dominated(inst: &MilpInstance, adj: &[Vec<usize>], relevant: &[usize], garments: &[usize]) -> Vec<usize> {
    let mut is_relevant = vec![false; inst.n()];
    for &i in relevant {
        is_relevant[i] = true;
    }
    let mut groups: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for &i in relevant {
        let mut sig: Vec<usize> = adj[i].iter().copied().filter(|&k| is_relevant[k]).collect();
        sig.push(i);
        sig.sort_unstable();
        groups.entry(sig).or_default().push(i);
    }
    let mut keep = vec![false; inst.n()];
    for members in groups.values() {
        for &i in members {
            let dominated = members.iter().any(|&k| {
                if k == i {
                    return false;
                }
                let mut all_ge = true;
                let mut any_gt = false;
                for &j in garments {
                    let (gk, gi) = (inst.gain(k, j), inst.gain(i, j));
                    if gk < gi {
                        all_ge = false;
                        break;
                    }
                    any_gt |= gk > gi;
                }
                all_ge && (any_gt || k < i)
            });
            keep[i] = !dominated;
        }
    }
    relevant.iter().copied().filter(|&i| keep[i]).collect()
}

struct ComponentSpec {
    candidates: Vec<usize>,
    garments: Vec<usize>,
}

/// Connected components of the graph joining candidates to the garments they
/// help and to the candidates they conflict with. Ordered by lowest garment.
fn components(inst: &MilpInstance, adj: &[Vec<usize>], live: &[usize], garments: &[usize]) -> Vec<ComponentSpec> {
    let nc = live.len();
    let ng = garments.len();
    let mut parent: Vec<usize> = (0..nc + ng).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    fn union(p: &mut [usize], a: usize, b: usize) {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            p[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut local = HashMap::with_capacity(nc);
    for (li, &i) in live.iter().enumerate() {
        local.insert(i, li);
    }
    for (li, &i) in live.iter().enumerate() {
        for (lj, &j) in garments.iter().enumerate() {
            if inst.gain(i, j) > 0.0 {
                union(&mut parent, li, nc + lj);
            }
        }
        for nb in &adj[i] {
            if let Some(&lk) = local.get(nb) {
                union(&mut parent, li, lk);
            }
        }
    }
    let mut by_root: Vec<(usize, ComponentSpec)> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for (lj, &j) in garments.iter().enumerate() {
        let root = find(&mut parent, nc + lj);
        let s = *slot.entry(root).or_insert_with(|| {
            by_root.push((root, ComponentSpec { candidates: Vec::new(), garments: Vec::new() }));
            by_root.len() - 1
        });
        by_root[s].1.garments.push(j);
    }
    for (li, &i) in live.iter().enumerate() {
        let root = find(&mut parent, li);
        if let Some(&s) = slot.get(&root) {
            by_root[s].1.candidates.push(i);
        }
    }
    by_root.into_iter().map(|(_, c)| c).collect()
}

struct Component {
    mode: Mode,
    /// Global candidate ids.
    ids: Vec<usize>,
    mg: usize,
    needs: Vec<f64>,
    /// Row-major `ids.len() x mg` gains.
    gains: Vec<f64>,
    adj: Vec<Vec<usize>>,
    /// Local candidates by decreasing total coverage.
    order: Vec<usize>,
    blocked: Vec<u32>,
    selected: Vec<usize>,
    best: Option<Vec<usize>>,
    best_len: usize,
    aborted: bool,
    done: bool,
}

impl Component {
    fn new(inst: &MilpInstance, global_adj: &[Vec<usize>], ids: &[usize], garments: &[usize], mode: Mode) -> Self {
        let nc = ids.len();
        let mg = garments.len();
        let mut gains = Vec::with_capacity(nc * mg);
        for &i in ids {
            for &j in garments {
                gains.push(inst.gain(i, j));
            }
        }
        let local: HashMap<usize, usize> = ids.iter().enumerate().map(|(l, &i)| (i, l)).collect();
        let adj: Vec<Vec<usize>> = ids
            .iter()
            .map(|&i| global_adj[i].iter().filter_map(|k| local.get(k).copied()).collect())
            .collect();
        let total: Vec<f64> = (0..nc).map(|l| gains[l * mg..(l + 1) * mg].iter().sum()).collect();
        let mut order: Vec<usize> = (0..nc).collect();
        order.sort_by(|&a, &b| total[b].total_cmp(&total[a]).then(ids[a].cmp(&ids[b])));

        let mut this = Self {
            mode,
            ids: ids.to_vec(),
            mg,
            needs: garments.iter().map(|&j| inst.need(j)).collect(),
            gains,
            adj,
            order,
            blocked: vec![0; nc],
            selected: Vec::new(),
            best: None,
            best_len: usize::MAX,
            aborted: false,
            done: false,
        };
        if mode == Mode::Optimize {
            let (plan, residual) = greedy_cover(inst, ids, garments, global_adj);
            if residual.iter().all(|&r| r <= TOLERANCE) {
                this.best_len = plan.len();
                this.best = Some(plan.iter().map(|i| local[i]).collect());
            }
        }
        this
    }

    fn run(&mut self, budget: &mut Budget) -> SubResult {
        let needs = self.needs.clone();
        self.dfs(needs, budget);
        match self.best.take() {
            Some(local) => SubResult::Feasible {
                plan: local.into_iter().map(|l| self.ids[l]).collect(),
                proved: !self.aborted,
            },
            None => SubResult::Infeasible { proved: !self.aborted },
        }
    }

    #[inline]
    fn gain(&self, l: usize, g: usize) -> f64 {
        self.gains[l * self.mg + g]
    }

    fn dfs(&mut self, residual: Vec<f64>, budget: &mut Budget) {
        if self.aborted || self.done {
            return;
        }
        if !budget.tick() {
            self.aborted = true;
            return;
        }
        let open: Vec<usize> = (0..self.mg).filter(|&g| residual[g] > TOLERANCE).collect();
        if open.is_empty() {
            if self.selected.len() < self.best_len {
                self.best_len = self.selected.len();
                self.best = Some(self.selected.clone());
            }
            if self.mode == Mode::FirstFeasible {
                self.done = true;
            }
            return;
        }
        if self.mode == Mode::Optimize && self.selected.len() + 1 >= self.best_len {
            return;
        }
        let mut max_gain = vec![0.0f64; open.len()];
        let mut sum_gain = vec![0.0f64; open.len()];
        for l in 0..self.ids.len() {
            if self.blocked[l] != 0 {
                continue;
            }
            for (k, &g) in open.iter().enumerate() {
                let v = self.gain(l, g);
                sum_gain[k] += v;
                if v > max_gain[k] {
                    max_gain[k] = v;
                }
            }
        }
        let mut bound = 0usize;
        let mut branch_on = open[0];
        for (k, &g) in open.iter().enumerate() {
            if sum_gain[k] < residual[g] - TOLERANCE {
                return;
            }
            let lb = ((residual[g] - TOLERANCE) / max_gain[k]).ceil() as usize;
            if lb > bound {
                bound = lb;
                branch_on = g;
            }
        }
        if self.mode == Mode::Optimize && self.selected.len() + bound >= self.best_len {
            return;
        }
        let children: Vec<usize> = self
            .order
            .iter()
            .copied()
            .filter(|&l| self.blocked[l] == 0 && self.gain(l, branch_on) > 0.0)
            .collect();
        let mut excluded = 0;
        for &l in &children {
            let mut next = residual.clone();
            for (g, r) in next.iter_mut().enumerate() {
                *r -= self.gain(l, g);
            }
            self.select(l, 1);
            self.dfs(next, budget);
            self.select(l, -1);
            self.blocked[l] += 1;
            excluded += 1;
            if self.aborted || self.done {
                break;
            }
            if self.mode == Mode::Optimize && self.selected.len() + 1 >= self.best_len {
                break;
            }
        }
        for &l in &children[..excluded] {
            self.blocked[l] -= 1;
        }
    }

    fn select(&mut self, l: usize, dir: i32) {
        if dir > 0 {
            self.selected.push(l);
        } else {
            self.selected.pop();
        }
        self.blocked[l] = (self.blocked[l] as i32 + dir) as u32;
        for k in 0..self.adj[l].len() {
            let nb = self.adj[l][k];
            self.blocked[nb] = (self.blocked[nb] as i32 + dir) as u32;
        }
    }
}
