//! Initial assignment by improved generalized unit propagation.
//!
//! Residual view of a hard constraint under a partial assignment:
//! `B'` is the bound minus the coefficients of terms already true, `S'` the
//! coefficient sum of the unassigned terms. Two kinds of forcing are derived
//! from it:
//!
//! * 1-of-all: the unassigned literal with the largest coefficient `a` must be
//!   true when `S' - a < B'`.
//! * all-of-all: every unassigned literal must be true when `S' = B'`.
//!
//! `S' < B'` means the constraint can no longer be satisfied; this is logged
//! as a contradiction and left for local search to repair.

use rand::Rng;

use crate::model::{Assignment, Literal, PboInstance, Term};

/// Literal forced by the 1-of-all rule over the unassigned `terms`, if any.
///
/// Ties on the largest coefficient go to the lowest variable index.
pub fn detect_one_of_all(terms: &[Term], residual_bound: i64) -> Option<Literal> {
    if residual_bound < 1 {
        return None;
    }
    let sum: i64 = terms.iter().map(|t| t.coeff).sum();
    let top = terms
        .iter()
        .min_by(|a, b| b.coeff.cmp(&a.coeff).then(a.lit.var().cmp(&b.lit.var())))?;
    (sum >= residual_bound && sum - top.coeff < residual_bound).then_some(top.lit)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AllOfAll {
    /// `S' = B'`: every literal is forced true.
    Forced(Vec<Literal>),
    /// `S' < B'`: the constraint cannot be satisfied any more.
    Falsified,
    NotUnit,
}

pub fn detect_all_of_all(terms: &[Term], residual_bound: i64) -> AllOfAll {
    if residual_bound < 1 {
        return AllOfAll::NotUnit;
    }
    let sum: i64 = terms.iter().map(|t| t.coeff).sum();
    match sum.cmp(&residual_bound) {
        std::cmp::Ordering::Less => AllOfAll::Falsified,
        std::cmp::Ordering::Equal => AllOfAll::Forced(terms.iter().map(|t| t.lit).collect()),
        std::cmp::Ordering::Greater => AllOfAll::NotUnit,
    }
}

/// Why a variable received its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Forced by the hard constraint with this id.
    Hard(usize),
    /// Objective preference.
    Soft,
    /// Free random choice.
    Random,
    /// Random choice after two opposite forcings met.
    Conflict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Contradiction {
    /// Opposite forcings on one variable, from these constraints.
    Variable { var: u32, origins: [usize; 2] },
    /// Residual sum fell below residual bound.
    Constraint { constraint: usize },
}

/// A hard forcing that was applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Forcing {
    pub lit: Literal,
    pub origin: usize,
    /// Detected while every assigned variable was itself forced, i.e. a
    /// logical consequence of the instance.
    pub root: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecimationStats {
    pub hard_forcings: u64,
    pub soft_decisions: u64,
    pub random_decisions: u64,
    pub conflicts: u64,
}

#[derive(Debug, Clone)]
pub struct DecimationOutcome {
    pub assignment: Assignment,
    pub forcings: Vec<Forcing>,
    pub contradictions: Vec<Contradiction>,
    pub stats: DecimationStats,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    lit: Literal,
    origin: usize,
    root: bool,
}

/// Fenwick tree used for weighted sampling of soft units.
#[derive(Debug, Clone)]
struct WeightTree {
    tree: Vec<i64>,
    weights: Vec<i64>,
}

impl WeightTree {
    fn new(n: usize) -> Self {
        WeightTree {
            tree: vec![0; n + 1],
            weights: vec![0; n],
        }
    }

    fn set(&mut self, i: usize, w: i64) {
        let delta = w - self.weights[i];
        self.weights[i] = w;
        let mut k = i + 1;
        while k < self.tree.len() {
            self.tree[k] += delta;
            k += k & k.wrapping_neg();
        }
    }

    fn total(&self) -> i64 {
        let mut k = self.weights.len();
        let mut s = 0;
        while k > 0 {
            s += self.tree[k];
            k &= k - 1;
        }
        s
    }

    /// Index `i` with `prefix(i) <= target < prefix(i + 1)`.
    fn find(&self, mut target: i64) -> usize {
        let mut pos = 0;
        let mut step = self.tree.len().next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

/// Partial assignment plus residual constraints during decimation.
pub struct DecimationState<'a> {
    instance: &'a PboInstance,
    values: Vec<Option<bool>>,
    residual_bound: Vec<i64>,
    residual_sum: Vec<i64>,
    retired: Vec<bool>,
    falsified: Vec<bool>,
    all_of_all_fired: Vec<bool>,
    /// Terms of each hard constraint by decreasing coefficient, then variable.
    sorted: Vec<Vec<Term>>,
    /// First possibly unassigned position in `sorted`.
    head: Vec<usize>,
    pool: Vec<Pending>,
    queued: Vec<[Option<usize>; 2]>,
    soft: WeightTree,
    soft_pref: Vec<bool>,
    unassigned: Vec<u32>,
    unassigned_pos: Vec<usize>,
    free_decision_made: bool,
    forcings: Vec<Forcing>,
    contradictions: Vec<Contradiction>,
    stats: DecimationStats,
}

impl<'a> DecimationState<'a> {
    /// Fresh state; runs detection once over every hard constraint.
    pub fn new(instance: &'a PboInstance) -> Self {
        let n = instance.num_vars;
        let m = instance.hard.len();
        let sorted: Vec<Vec<Term>> = instance
            .hard
            .iter()
            .map(|c| {
                let mut ts = c.terms.clone();
                ts.sort_by(|a, b| b.coeff.cmp(&a.coeff).then(a.lit.var().cmp(&b.lit.var())));
                ts
            })
            .collect();
        let mut soft = WeightTree::new(n);
        let mut soft_pref = vec![false; n];
        for t in &instance.objective.terms {
            soft.set(t.lit.index(), t.coeff);
            soft_pref[t.lit.index()] = t.lit.is_negated();
        }
        let mut state = DecimationState {
            instance,
            values: vec![None; n],
            residual_bound: instance.hard.iter().map(|c| c.bound).collect(),
            residual_sum: instance.hard.iter().map(|c| c.coeff_sum()).collect(),
            retired: vec![false; m],
            falsified: vec![false; m],
            all_of_all_fired: vec![false; m],
            sorted,
            head: vec![0; m],
            pool: Vec::new(),
            queued: vec![[None; 2]; n],
            soft,
            soft_pref,
            unassigned: (1..=n as u32).collect(),
            unassigned_pos: (0..n).collect(),
            free_decision_made: false,
            forcings: Vec::new(),
            contradictions: Vec::new(),
            stats: DecimationStats::default(),
        };
        for c in 0..m {
            state.refresh(c);
        }
        state
    }

    pub fn value(&self, var: u32) -> Option<bool> {
        self.values[var as usize - 1]
    }

    /// `(B', S')` of hard constraint `c`.
    pub fn residual(&self, c: usize) -> (i64, i64) {
        (self.residual_bound[c], self.residual_sum[c])
    }

    /// `(B', S')` recomputed from the partial assignment.
    pub fn recompute_residual(&self, c: usize) -> (i64, i64) {
        let con = &self.instance.hard[c];
        let mut bound = con.bound;
        let mut sum = 0;
        for t in &con.terms {
            match self.values[t.lit.index()] {
                Some(v) if t.lit.is_true_under(v) => bound -= t.coeff,
                Some(_) => {}
                None => sum += t.coeff,
            }
        }
        (bound, sum)
    }

    pub fn is_retired(&self, c: usize) -> bool {
        self.retired[c]
    }

    pub fn is_falsified_residual(&self, c: usize) -> bool {
        self.falsified[c]
    }

    /// Unassigned terms of constraint `c`.
    pub fn unassigned_terms(&self, c: usize) -> Vec<Term> {
        self.instance.hard[c]
            .terms
            .iter()
            .filter(|t| self.values[t.lit.index()].is_none())
            .copied()
            .collect()
    }

    /// Forcings waiting in the hard pool whose variable is still unassigned.
    pub fn pending(&self) -> Vec<(Literal, usize)> {
        self.pool
            .iter()
            .filter(|p| self.values[p.lit.index()].is_none())
            .map(|p| (p.lit, p.origin))
            .collect()
    }

    pub fn contradictions(&self) -> &[Contradiction] {
        &self.contradictions
    }

    pub fn num_unassigned(&self) -> usize {
        self.unassigned.len()
    }

    /// Assigns `var` and updates every constraint containing it.
    ///
    /// Panics if `var` is already assigned.
    pub fn propagate_literal(&mut self, var: u32, value: bool, origin: Origin) {
        let idx = var as usize - 1;
        assert!(self.values[idx].is_none(), "x{var} already assigned");
        self.values[idx] = Some(value);
        self.queued[idx] = [None; 2];
        self.soft.set(idx, 0);
        let pos = self.unassigned_pos[idx];
        let last = *self.unassigned.last().expect("unassigned set non-empty");
        self.unassigned.swap_remove(pos);
        if last != var {
            self.unassigned_pos[last as usize - 1] = pos;
        }
        match origin {
            Origin::Hard(_) => self.stats.hard_forcings += 1,
            Origin::Soft => self.stats.soft_decisions += 1,
            Origin::Random => self.stats.random_decisions += 1,
            Origin::Conflict => self.stats.conflicts += 1,
        }
        if !matches!(origin, Origin::Hard(_)) {
            self.free_decision_made = true;
        }
        let instance = self.instance;
        for occ in instance.occurrences(idx) {
            let c = occ.constraint;
            let a = occ.coeff();
            if value != occ.is_negated() {
                self.residual_bound[c] -= a;
            }
            self.residual_sum[c] -= a;
            self.refresh(c);
        }
    }

    /// Updates flags of `c` and queues any forcings it now implies.
    fn refresh(&mut self, c: usize) {
        if self.retired[c] {
            return;
        }
        let bound = self.residual_bound[c];
        let sum = self.residual_sum[c];
        if bound <= 0 {
            self.retired[c] = true;
            return;
        }
        if sum < bound {
            if !self.falsified[c] {
                self.falsified[c] = true;
                self.contradictions.push(Contradiction::Constraint { constraint: c });
            }
            return;
        }
        while self.head[c] < self.sorted[c].len()
            && self.values[self.sorted[c][self.head[c]].lit.index()].is_some()
        {
            self.head[c] += 1;
        }
        if sum == bound {
            if !self.all_of_all_fired[c] {
                self.all_of_all_fired[c] = true;
                for i in self.head[c]..self.sorted[c].len() {
                    let lit = self.sorted[c][i].lit;
                    if self.values[lit.index()].is_none() {
                        self.enqueue(lit, c);
                    }
                }
            }
        } else {
            let top = self.sorted[c][self.head[c]];
            if sum - top.coeff < bound {
                self.enqueue(top.lit, c);
            }
        }
    }

    fn enqueue(&mut self, lit: Literal, origin: usize) {
        let slot = &mut self.queued[lit.index()][lit.satisfying_value() as usize];
        if slot.is_some() {
            return;
        }
        *slot = Some(origin);
        self.pool.push(Pending {
            lit,
            origin,
            root: !self.free_decision_made,
        });
    }

    /// One step of the decimation loop. Returns false once complete.
    pub fn step<R: Rng>(&mut self, rng: &mut R) -> bool {
        if self.unassigned.is_empty() {
            return false;
        }
        while !self.pool.is_empty() {
            let p = self.pool.swap_remove(rng.gen_range(0..self.pool.len()));
            let idx = p.lit.index();
            if self.values[idx].is_some() {
                continue;
            }
            let want = p.lit.satisfying_value();
            if let Some(other) = self.queued[idx][!want as usize] {
                self.contradictions.push(Contradiction::Variable {
                    var: p.lit.var(),
                    origins: [p.origin, other],
                });
                let value = rng.gen_bool(0.5);
                self.propagate_literal(p.lit.var(), value, Origin::Conflict);
                return true;
            }
            self.forcings.push(Forcing {
                lit: p.lit,
                origin: p.origin,
                root: p.root,
            });
            self.propagate_literal(p.lit.var(), want, Origin::Hard(p.origin));
            return true;
        }
        let total = self.soft.total();
        if total > 0 {
            let idx = self.soft.find(rng.gen_range(0..total));
            let value = self.soft_pref[idx];
            self.propagate_literal(idx as u32 + 1, value, Origin::Soft);
            return true;
        }
        let var = self.unassigned[rng.gen_range(0..self.unassigned.len())];
        let value = rng.gen_bool(0.5);
        self.propagate_literal(var, value, Origin::Random);
        true
    }

    pub fn finish(self) -> DecimationOutcome {
        let values = self
            .values
            .iter()
            .map(|v| v.expect("decimation incomplete"))
            .collect();
        DecimationOutcome {
            assignment: Assignment::from_values(values),
            forcings: self.forcings,
            contradictions: self.contradictions,
            stats: self.stats,
        }
    }
}

/// Builds a complete assignment by propagating forced literals, then
/// objective preferences (weighted by coefficient), then random values.
pub fn igup_decimation<R: Rng>(instance: &PboInstance, rng: &mut R) -> DecimationOutcome {
    let mut state = DecimationState::new(instance);
    while state.step(rng) {}
    state.finish()
}
