//! Weighted score-guided local search with care-driven constraint selection.
//!
//! Hard constraints and the dynamic objective constraint (`objective <=
//! cost* - 1`) share one store. For a constraint `c` with sum `s` of true
//! coefficients, bound `B` and weight `w`, a term `a * l` contributes to the
//! score of its variable:
//!
//! * `-w` if `l` is true, `s >= B` and `s - a < B` (flipping breaks `c`),
//! * `+w` if `l` is false, `s < B` and `s + a >= B` (flipping repairs `c`),
//! * `0` otherwise.
//!
//! Only terms with `a >= threshold(s)` can contribute, so terms are kept in
//! decreasing coefficient order and updates stop at the first term below the
//! threshold.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decimation::{igup_decimation, DecimationStats};
use crate::model::{objective_bound_for, Assignment, Objective, PboInstance, Term};
use crate::opb::SolveStatus;

/// Wall clock is checked once per this many steps.
pub const CLOCK_POLL_INTERVAL: u64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub cutoff: Duration,
    pub seed: u64,
    /// Probability of picking a random falsified hard constraint at a local
    /// optimum; otherwise the one with the highest care.
    pub p: f64,
    pub decimation: bool,
    /// Best-of-k sampling in the greedy step; `None` is a full argmax.
    pub bms: Option<usize>,
    pub hard_weight_inc: i64,
    pub objective_weight_inc: i64,
    pub objective_weight_cap: i64,
    pub max_flips: Option<u64>,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            cutoff: Duration::from_secs(300),
            seed: 1,
            p: 0.5,
            decimation: true,
            bms: None,
            hard_weight_inc: 1,
            objective_weight_inc: 1,
            objective_weight_cap: 1000,
            max_flips: None,
        }
    }
}

/// Set of small integers with O(1) insert, remove and random access.
#[derive(Debug, Clone)]
struct IndexedSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl IndexedSet {
    const ABSENT: u32 = u32::MAX;

    fn new(capacity: usize) -> Self {
        IndexedSet {
            items: Vec::new(),
            pos: vec![Self::ABSENT; capacity],
        }
    }

    fn contains(&self, x: usize) -> bool {
        self.pos[x] != Self::ABSENT
    }

    fn insert(&mut self, x: usize) {
        if !self.contains(x) {
            self.pos[x] = self.items.len() as u32;
            self.items.push(x as u32);
        }
    }

    fn remove(&mut self, x: usize) {
        let p = self.pos[x];
        if p == Self::ABSENT {
            return;
        }
        let last = *self.items.last().unwrap();
        self.items.swap_remove(p as usize);
        if last as usize != x {
            self.pos[last as usize] = p;
        }
        self.pos[x] = Self::ABSENT;
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
struct Occ {
    constraint: u32,
    coeff: i64,
    negated: bool,
}

#[inline]
fn threshold(sum: i64, bound: i64) -> i64 {
    if sum >= bound {
        sum - bound + 1
    } else {
        bound - sum
    }
}

/// Score contribution of one term for unit weight.
#[inline]
fn unit_contrib(truth: bool, coeff: i64, sum: i64, bound: i64) -> i64 {
    if truth {
        -((sum >= bound && sum - coeff < bound) as i64)
    } else {
        (sum < bound && sum + coeff >= bound) as i64
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub flips: u64,
    pub local_optima: u64,
    pub decimation: DecimationStats,
    pub decimation_contradictions: usize,
    pub time_to_first_feasible: Option<Duration>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub best: Option<(Assignment, i64)>,
    pub stats: SolveStats,
    pub initial: Assignment,
    /// Every improving cost, in the order found.
    pub improvements: Vec<i64>,
}

/// Incremental search state for one run.
pub struct SolverState {
    num_hard: usize,
    objective_idx: Option<usize>,
    objective: Objective,
    /// Terms per constraint, decreasing coefficient.
    terms: Vec<Vec<Term>>,
    bound: Vec<i64>,
    weight: Vec<i64>,
    care: Vec<u64>,
    sum: Vec<i64>,
    occs: Vec<Vec<Occ>>,
    values: Vec<bool>,
    score: Vec<i64>,
    falsified: IndexedSet,
    good: IndexedSet,
    best: Option<(Assignment, i64)>,
    rng: ChaCha8Rng,
    params: SolverParams,
    flips: u64,
    local_optima: u64,
}

impl SolverState {
    pub fn new(instance: &PboInstance, initial: Assignment, params: SolverParams) -> Self {
        assert_eq!(initial.len(), instance.num_vars);
        let n = instance.num_vars;
        let num_hard = instance.hard.len();
        let mut terms: Vec<Vec<Term>> = instance.hard.iter().map(|c| c.terms.clone()).collect();
        let mut bound: Vec<i64> = instance.hard.iter().map(|c| c.bound).collect();
        let mut weight: Vec<i64> = instance.hard.iter().map(|c| c.weight).collect();
        let objective_idx = (!instance.objective.is_empty()).then_some(num_hard);
        if objective_idx.is_some() {
            let obj = &instance.objective;
            terms.push(obj.terms.iter().map(|t| Term::new(t.coeff, !t.lit)).collect());
            bound.push(objective_bound_for(obj, obj.initial_bound()));
            weight.push(1);
        }
        for ts in &mut terms {
            ts.sort_by(|a, b| b.coeff.cmp(&a.coeff).then(a.lit.var().cmp(&b.lit.var())));
        }
        let mut occs = vec![Vec::new(); n];
        for (c, ts) in terms.iter().enumerate() {
            for t in ts {
                occs[t.lit.index()].push(Occ {
                    constraint: c as u32,
                    coeff: t.coeff,
                    negated: t.lit.is_negated(),
                });
            }
        }
        let total = terms.len();
        let mut state = SolverState {
            num_hard,
            objective_idx,
            objective: instance.objective.clone(),
            terms,
            bound,
            weight,
            care: vec![0; num_hard],
            sum: vec![0; total],
            occs,
            values: initial.values().to_vec(),
            score: vec![0; n],
            falsified: IndexedSet::new(num_hard),
            good: IndexedSet::new(n),
            best: None,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            params,
            flips: 0,
            local_optima: 0,
        };
        state.rebuild();
        state
    }

    /// Recomputes sums, falsified set and scores from the assignment.
    fn rebuild(&mut self) {
        let (sum, score) = self.recompute();
        self.sum = sum;
        self.score = score;
        self.falsified = IndexedSet::new(self.num_hard);
        for c in 0..self.num_hard {
            if self.sum[c] < self.bound[c] {
                self.falsified.insert(c);
            }
        }
        self.good = IndexedSet::new(self.values.len());
        for v in 0..self.values.len() {
            if self.score[v] > 0 {
                self.good.insert(v);
            }
        }
    }

    fn recompute(&self) -> (Vec<i64>, Vec<i64>) {
        let sum: Vec<i64> = self
            .terms
            .iter()
            .map(|ts| {
                ts.iter()
                    .filter(|t| t.lit.is_true_under(self.values[t.lit.index()]))
                    .map(|t| t.coeff)
                    .sum()
            })
            .collect();
        let mut score = vec![0; self.values.len()];
        for (c, ts) in self.terms.iter().enumerate() {
            for t in ts {
                let truth = t.lit.is_true_under(self.values[t.lit.index()]);
                score[t.lit.index()] +=
                    self.weight[c] * unit_contrib(truth, t.coeff, sum[c], self.bound[c]);
            }
        }
        (sum, score)
    }

    /// Compares every cache against a from-scratch recomputation.
    pub fn check_consistency(&self) -> Result<(), String> {
        let (sum, score) = self.recompute();
        if sum != self.sum {
            return Err("constraint sums diverged".into());
        }
        if score != self.score {
            let v = (0..score.len()).find(|&v| score[v] != self.score[v]).unwrap();
            return Err(format!(
                "score of x{} is {} but recomputes to {}",
                v + 1,
                self.score[v],
                score[v]
            ));
        }
        for (c, (&s, &b)) in sum.iter().zip(&self.bound).enumerate().take(self.num_hard) {
            if (s < b) != self.falsified.contains(c) {
                return Err(format!("falsified set wrong for constraint {c}"));
            }
        }
        for (v, &s) in score.iter().enumerate() {
            if (s > 0) != self.good.contains(v) {
                return Err(format!("positive-score set wrong for x{}", v + 1));
            }
        }
        if let Some((a, cost)) = &self.best {
            let actual = crate::model::objective_value(&self.objective, a);
            if actual != *cost {
                return Err(format!("best cost {cost} but assignment evaluates to {actual}"));
            }
        }
        Ok(())
    }

    #[inline]
    fn add_score(&mut self, v: usize, delta: i64) {
        if delta == 0 {
            return;
        }
        self.score[v] += delta;
        if self.score[v] > 0 {
            self.good.insert(v);
        } else {
            self.good.remove(v);
        }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn num_hard(&self) -> usize {
        self.num_hard
    }

    /// Store index of the objective constraint (after the hard ones).
    pub fn objective_constraint(&self) -> Option<usize> {
        self.objective_idx
    }

    pub fn assignment(&self) -> Assignment {
        Assignment::from_values(self.values.clone())
    }

    /// Weighted make-minus-break of flipping the 0-based variable `v`.
    pub fn score(&self, v: usize) -> i64 {
        self.score[v]
    }

    pub fn weight(&self, c: usize) -> i64 {
        self.weight[c]
    }

    pub fn care(&self, c: usize) -> u64 {
        self.care[c]
    }

    pub fn bound(&self, c: usize) -> i64 {
        self.bound[c]
    }

    pub fn sum(&self, c: usize) -> i64 {
        self.sum[c]
    }

    pub fn is_falsified(&self, c: usize) -> bool {
        self.sum[c] < self.bound[c]
    }

    /// Falsified hard constraints, in internal order.
    pub fn falsified_hard(&self) -> Vec<usize> {
        self.falsified.items.iter().map(|&c| c as usize).collect()
    }

    pub fn is_feasible(&self) -> bool {
        self.falsified.is_empty()
    }

    /// Objective value of the current assignment.
    pub fn cost(&self) -> i64 {
        match self.objective_idx {
            Some(o) => self.objective.constant_offset + self.objective.coeff_sum() - self.sum[o],
            None => self.objective.constant_offset,
        }
    }

    pub fn best(&self) -> Option<&(Assignment, i64)> {
        self.best.as_ref()
    }

    pub fn flips(&self) -> u64 {
        self.flips
    }

    pub fn local_optima(&self) -> u64 {
        self.local_optima
    }

    /// Raises care of hard constraint `c`.
    pub fn add_care(&mut self, c: usize, amount: u64) {
        self.care[c] += amount;
    }

    /// Variable with the largest positive score, ties broken uniformly.
    pub fn pick_scoring_var(&mut self) -> Option<usize> {
        if self.good.is_empty() {
            return None;
        }
        let len = self.good.len();
        let mut best: Option<usize> = None;
        let mut ties = 0u32;
        let mut consider = |v: usize, rng: &mut ChaCha8Rng, score: &[i64]| match best {
            Some(b) if score[v] < score[b] => {}
            Some(b) if score[v] == score[b] => {
                if b == v {
                    return;
                }
                ties += 1;
                if rng.gen_range(0..=ties) == 0 {
                    best = Some(v);
                }
            }
            _ => {
                best = Some(v);
                ties = 0;
            }
        };
        match self.params.bms {
            Some(k) if k < len => {
                for _ in 0..k {
                    let v = self.good.items[self.rng.gen_range(0..len)] as usize;
                    consider(v, &mut self.rng, &self.score);
                }
            }
            _ => {
                for i in 0..len {
                    let v = self.good.items[i] as usize;
                    consider(v, &mut self.rng, &self.score);
                }
            }
        }
        best
    }

    /// Adds `delta` to the weight of store constraint `c`, refreshing scores.
    fn add_weight(&mut self, c: usize, delta: i64) {
        self.weight[c] += delta;
        let (s, b) = (self.sum[c], self.bound[c]);
        let thr = threshold(s, b);
        for i in 0..self.terms[c].len() {
            let t = self.terms[c][i];
            if t.coeff < thr {
                break;
            }
            let truth = t.lit.is_true_under(self.values[t.lit.index()]);
            self.add_score(t.lit.index(), delta * unit_contrib(truth, t.coeff, s, b));
        }
    }

    /// Weight update at a local optimum.
    pub fn update_weights(&mut self) {
        if !self.falsified.is_empty() {
            let inc = self.params.hard_weight_inc;
            for i in 0..self.falsified.len() {
                let c = self.falsified.items[i] as usize;
                self.add_weight(c, inc);
            }
        } else if let Some(o) = self.objective_idx {
            if self.is_falsified(o) && self.weight[o] < self.params.objective_weight_cap {
                let inc = self
                    .params
                    .objective_weight_inc
                    .min(self.params.objective_weight_cap - self.weight[o]);
                self.add_weight(o, inc);
            }
        }
    }

    /// Care of every falsified hard constraint goes up by one.
    pub fn update_care(&mut self) {
        for &c in &self.falsified.items {
            self.care[c as usize] += 1;
        }
    }

    /// Constraint to repair at a local optimum.
    ///
    /// With probability `p` a uniformly random falsified hard constraint,
    /// otherwise the falsified hard constraint of highest care (ties uniform).
    /// Falls back to the objective constraint when every hard constraint
    /// holds.
    pub fn select_stuck_constraint(&mut self) -> Option<usize> {
        if !self.falsified.is_empty() {
            let len = self.falsified.len();
            if self.rng.gen::<f64>() < self.params.p {
                return Some(self.falsified.items[self.rng.gen_range(0..len)] as usize);
            }
            let mut best = self.falsified.items[0] as usize;
            let mut ties = 0u32;
            for i in 1..len {
                let c = self.falsified.items[i] as usize;
                if self.care[c] > self.care[best] {
                    best = c;
                    ties = 0;
                } else if self.care[c] == self.care[best] {
                    ties += 1;
                    if self.rng.gen_range(0..=ties) == 0 {
                        best = c;
                    }
                }
            }
            return Some(best);
        }
        self.objective_idx.filter(|&o| self.is_falsified(o))
    }

    /// Highest-score variable of store constraint `c`, ties uniform.
    pub fn best_var_in(&mut self, c: usize) -> usize {
        let mut best = self.terms[c][0].lit.index();
        let mut ties = 0u32;
        for i in 1..self.terms[c].len() {
            let v = self.terms[c][i].lit.index();
            if self.score[v] > self.score[best] {
                best = v;
                ties = 0;
            } else if self.score[v] == self.score[best] {
                ties += 1;
                if self.rng.gen_range(0..=ties) == 0 {
                    best = v;
                }
            }
        }
        best
    }

    /// Flips the 0-based variable `v`. Returns true when the new assignment
    /// is a feasible improvement (recorded as the new best).
    pub fn flip(&mut self, v: usize) -> bool {
        let old = self.values[v];
        self.values[v] = !old;
        self.flips += 1;
        for k in 0..self.occs[v].len() {
            let Occ {
                constraint,
                coeff,
                negated,
            } = self.occs[v][k];
            let c = constraint as usize;
            let was_true = old != negated;
            let (s_old, b, w) = (self.sum[c], self.bound[c], self.weight[c]);
            let s_new = if was_true { s_old - coeff } else { s_old + coeff };
            let thr = threshold(s_old, b).min(threshold(s_new, b));
            for i in 0..self.terms[c].len() {
                let t = self.terms[c][i];
                if t.coeff < thr {
                    break;
                }
                let u = t.lit.index();
                if u == v {
                    continue;
                }
                let truth = t.lit.is_true_under(self.values[u]);
                let d = unit_contrib(truth, t.coeff, s_new, b) - unit_contrib(truth, t.coeff, s_old, b);
                self.add_score(u, w * d);
            }
            let d = unit_contrib(!was_true, coeff, s_new, b) - unit_contrib(was_true, coeff, s_old, b);
            self.add_score(v, w * d);
            self.sum[c] = s_new;
            if c < self.num_hard {
                if s_new < b {
                    self.falsified.insert(c);
                } else {
                    self.falsified.remove(c);
                }
            }
        }
        self.record_if_improved()
    }

    /// Records the current assignment if it is feasible and beats the best.
    pub fn record_if_improved(&mut self) -> bool {
        if !self.falsified.is_empty() {
            return false;
        }
        let cost = self.cost();
        if self.best.as_ref().is_some_and(|(_, b)| cost >= *b) {
            return false;
        }
        self.best = Some((self.assignment(), cost));
        self.tighten_objective_bound(cost);
        true
    }

    /// Rebuilds the objective constraint as `objective <= new_cost - 1`.
    pub fn tighten_objective_bound(&mut self, new_cost: i64) {
        let Some(o) = self.objective_idx else {
            return;
        };
        let b_old = self.bound[o];
        let b_new = objective_bound_for(&self.objective, new_cost - 1);
        let (s, w) = (self.sum[o], self.weight[o]);
        for i in 0..self.terms[o].len() {
            let t = self.terms[o][i];
            let u = t.lit.index();
            let truth = t.lit.is_true_under(self.values[u]);
            let d = unit_contrib(truth, t.coeff, s, b_new) - unit_contrib(truth, t.coeff, s, b_old);
            self.add_score(u, w * d);
        }
        self.bound[o] = b_new;
    }

    /// One search step. Returns true if a new best was recorded.
    pub fn step(&mut self) -> bool {
        if let Some(v) = self.pick_scoring_var() {
            return self.flip(v);
        }
        self.local_optima += 1;
        self.update_weights();
        self.update_care();
        match self.select_stuck_constraint() {
            Some(c) => {
                let v = self.best_var_in(c);
                self.flip(v)
            }
            // feasible but not yet recorded: recording tightens the bound
            None => self.record_if_improved(),
        }
    }
}

/// Initial assignment per `params`: decimation, or all variables false.
pub fn initial_assignment(
    instance: &PboInstance,
    params: &SolverParams,
) -> (Assignment, DecimationStats, usize) {
    if params.decimation {
        // The decimation stream is decoupled from the search stream.
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x5DEE_CE66_D1CE_5EED);
        let out = igup_decimation(instance, &mut rng);
        (out.assignment, out.stats, out.contradictions.len())
    } else {
        (Assignment::all_false(instance.num_vars), DecimationStats::default(), 0)
    }
}

/// Runs the solver until the cutoff (or flip budget) and returns the best
/// feasible assignment found. `on_improve` sees every improving cost.
pub fn solve(
    instance: &PboInstance,
    params: &SolverParams,
    mut on_improve: impl FnMut(i64),
) -> SolveResult {
    let start = Instant::now();
    let (initial, decimation, contradictions) = initial_assignment(instance, params);
    let mut state = SolverState::new(instance, initial.clone(), params.clone());
    let mut improvements = Vec::new();
    let mut first_feasible = None;
    let decision = instance.is_decision();
    let mut steps: u64 = 0;
    loop {
        if steps.is_multiple_of(CLOCK_POLL_INTERVAL) && start.elapsed() >= params.cutoff {
            break;
        }
        if params.max_flips.is_some_and(|m| state.flips >= m) {
            break;
        }
        let improved = if steps == 0 {
            state.record_if_improved()
        } else {
            state.step()
        };
        steps += 1;
        if improved {
            let cost = state.best.as_ref().unwrap().1;
            first_feasible.get_or_insert_with(|| start.elapsed());
            improvements.push(cost);
            on_improve(cost);
            // nothing can beat the objective's constant part
            if decision || cost <= instance.objective.lower_bound() {
                break;
            }
        }
    }
    let stats = SolveStats {
        flips: state.flips,
        local_optima: state.local_optima,
        decimation,
        decimation_contradictions: contradictions,
        time_to_first_feasible: first_feasible,
        elapsed: start.elapsed(),
    };
    let best = state.best.take();
    SolveResult {
        status: if best.is_some() {
            SolveStatus::Satisfiable
        } else {
            SolveStatus::Unknown
        },
        best,
        stats,
        initial,
        improvements,
    }
}
