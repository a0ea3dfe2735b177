//! Pseudo-Boolean constraints, objectives and assignments.
//!
//! Every constraint is kept in the normalized form `sum a_i * l_i >= B` with
//! strictly positive coefficients, at most one term per variable and `B >= 1`.
//! Raw relations (`>=`, `<=`, `=` with signed coefficients) are rewritten into
//! that form by [`normalize_constraint`].

use std::collections::BTreeMap;
use std::fmt;

use crate::error::ModelError;

/// Largest per-constraint coefficient mass accepted at parse time.
pub const MAX_COEFF_SUM: i64 = 1 << 62;

/// A variable or its negation. Variables are 1-based, as in OPB `x<k>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    pub fn new(var: u32, negated: bool) -> Self {
        assert!(var >= 1, "variables are 1-based");
        Literal { var, negated }
    }

    pub fn pos(var: u32) -> Self {
        Literal::new(var, false)
    }

    pub fn neg(var: u32) -> Self {
        Literal::new(var, true)
    }

    /// 1-based variable number.
    #[inline]
    pub fn var(self) -> u32 {
        self.var
    }

    /// 0-based index into assignment vectors.
    #[inline]
    pub fn index(self) -> usize {
        self.var as usize - 1
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// The variable value that makes this literal true.
    #[inline]
    pub fn satisfying_value(self) -> bool {
        !self.negated
    }

    #[inline]
    pub fn is_true_under(self, value: bool) -> bool {
        value != self.negated
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "~x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: i64,
    pub lit: Literal,
}

impl Term {
    pub fn new(coeff: i64, lit: Literal) -> Self {
        Term { coeff, lit }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Ge => ">=",
            Relation::Le => "<=",
            Relation::Eq => "=",
        })
    }
}

/// A constraint as written in the input: signed coefficients, any relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawConstraint {
    pub terms: Vec<Term>,
    pub relation: Relation,
    pub rhs: i64,
}

impl RawConstraint {
    pub fn new(terms: Vec<Term>, relation: Relation, rhs: i64) -> Self {
        RawConstraint {
            terms,
            relation,
            rhs,
        }
    }

    /// Direct evaluation of the raw relation, used as a reference for
    /// normalization.
    pub fn is_satisfied(&self, assignment: &Assignment) -> bool {
        let lhs: i128 = self
            .terms
            .iter()
            .filter(|t| assignment.lit_value(t.lit))
            .map(|t| t.coeff as i128)
            .sum();
        let rhs = self.rhs as i128;
        match self.relation {
            Relation::Ge => lhs >= rhs,
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Hard,
    Objective,
}

/// Normalized constraint `sum coeff * lit >= bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PbConstraint {
    pub id: usize,
    pub terms: Vec<Term>,
    pub bound: i64,
    pub kind: ConstraintKind,
    pub weight: i64,
    pub care: u64,
}

impl PbConstraint {
    pub fn coeff_sum(&self) -> i64 {
        self.terms.iter().map(|t| t.coeff).sum()
    }

    /// A constraint with `bound <= 0` holds under every assignment.
    pub fn is_tautology(&self) -> bool {
        self.bound <= 0
    }

    /// No assignment reaches the bound.
    pub fn is_unsatisfiable(&self) -> bool {
        self.bound > self.coeff_sum()
    }
}

impl fmt::Display for PbConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "+{} {}", t.coeff, t.lit)?;
        }
        write!(f, " >= {}", self.bound)
    }
}

/// Linear objective `constant_offset + sum coeff * lit`, to be minimized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Objective {
    pub terms: Vec<Term>,
    pub constant_offset: i64,
}

impl Objective {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff_sum(&self) -> i64 {
        self.terms.iter().map(|t| t.coeff).sum()
    }

    /// Smallest value any assignment can reach.
    pub fn lower_bound(&self) -> i64 {
        self.constant_offset
    }

    /// Initial objective bound before any feasible solution is known:
    /// one below the largest possible value.
    pub fn initial_bound(&self) -> i64 {
        self.constant_offset + self.coeff_sum() - 1
    }
}

/// One entry of the per-variable occurrence index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurrence {
    pub constraint: usize,
    /// Coefficient, negative when the variable occurs negated.
    pub signed_coeff: i64,
}

impl Occurrence {
    pub fn coeff(&self) -> i64 {
        self.signed_coeff.abs()
    }

    pub fn is_negated(&self) -> bool {
        self.signed_coeff < 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PboInstance {
    pub num_vars: usize,
    pub hard: Vec<PbConstraint>,
    pub objective: Objective,
    occurrences: Vec<Vec<Occurrence>>,
}

impl PboInstance {
    /// Normalizes raw constraints and objective into an instance.
    ///
    /// Tautologies are dropped, constraint ids are assigned in order of the
    /// surviving normalized constraints.
    pub fn from_raw(
        num_vars: usize,
        raw_constraints: &[RawConstraint],
        raw_objective: Option<&[Term]>,
    ) -> Result<Self, ModelError> {
        let mut hard = Vec::new();
        for (i, raw) in raw_constraints.iter().enumerate() {
            check_vars(&raw.terms, num_vars)?;
            for mut c in normalize_constraint(raw, i)? {
                c.id = hard.len();
                hard.push(c);
            }
        }
        let objective = match raw_objective {
            Some(terms) => {
                check_vars(terms, num_vars)?;
                normalize_objective(terms, 0)?
            }
            None => Objective::default(),
        };
        Ok(PboInstance::new(num_vars, hard, objective))
    }

    /// Builds an instance from already-normalized parts.
    pub fn new(num_vars: usize, mut hard: Vec<PbConstraint>, objective: Objective) -> Self {
        for (i, c) in hard.iter_mut().enumerate() {
            c.id = i;
        }
        let mut occurrences = vec![Vec::new(); num_vars];
        for c in &hard {
            for t in &c.terms {
                let signed = if t.lit.is_negated() { -t.coeff } else { t.coeff };
                occurrences[t.lit.index()].push(Occurrence {
                    constraint: c.id,
                    signed_coeff: signed,
                });
            }
        }
        PboInstance {
            num_vars,
            hard,
            objective,
            occurrences,
        }
    }

    /// Hard-constraint occurrences of the 0-based variable index.
    pub fn occurrences(&self, var_index: usize) -> &[Occurrence] {
        &self.occurrences[var_index]
    }

    pub fn is_decision(&self) -> bool {
        self.objective.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.hard.iter().map(|c| c.terms.len()).sum()
    }
}

fn check_vars(terms: &[Term], num_vars: usize) -> Result<(), ModelError> {
    for t in terms {
        if t.lit.var() as usize > num_vars {
            return Err(ModelError::VariableOutOfRange {
                var: t.lit.var(),
                num_vars,
            });
        }
    }
    Ok(())
}

/// Complete 0/1 valuation, indexed by 0-based variable index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn all_false(num_vars: usize) -> Self {
        Assignment {
            values: vec![false; num_vars],
        }
    }

    pub fn from_values(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    /// Assignment whose bit `i` of `bits` is the value of variable `i + 1`.
    pub fn from_bits(num_vars: usize, bits: u64) -> Self {
        Assignment {
            values: (0..num_vars).map(|i| (bits >> i) & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value of the 1-based variable.
    pub fn value(&self, var: u32) -> bool {
        self.values[var as usize - 1]
    }

    #[inline]
    pub fn lit_value(&self, lit: Literal) -> bool {
        lit.is_true_under(self.values[lit.index()])
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.values[var as usize - 1] = value;
    }

    pub fn flip(&mut self, var: u32) {
        let v = &mut self.values[var as usize - 1];
        *v = !*v;
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }
}

/// Sum of the coefficients of true literals, and whether it reaches the bound.
pub fn evaluate_constraint(c: &PbConstraint, assignment: &Assignment) -> (i64, bool) {
    let sum = c
        .terms
        .iter()
        .filter(|t| assignment.lit_value(t.lit))
        .map(|t| t.coeff)
        .sum();
    (sum, sum >= c.bound)
}

pub fn objective_value(objective: &Objective, assignment: &Assignment) -> i64 {
    objective.constant_offset
        + objective
            .terms
            .iter()
            .filter(|t| assignment.lit_value(t.lit))
            .map(|t| t.coeff)
            .sum::<i64>()
}

/// Collects signed terms into the linear form `sum c_v * x_v + constant`.
///
/// A negated literal `c * ~x` contributes `c - c * x`.
fn linearize(terms: &[Term]) -> Result<(BTreeMap<u32, i64>, i64), ModelError> {
    let mut mass: i64 = 0;
    let mut coeffs: BTreeMap<u32, i64> = BTreeMap::new();
    let mut constant: i64 = 0;
    for t in terms {
        mass = mass
            .checked_add(t.coeff.checked_abs().ok_or(ModelError::Overflow)?)
            .filter(|m| *m <= MAX_COEFF_SUM)
            .ok_or(ModelError::Overflow)?;
        let entry = coeffs.entry(t.lit.var()).or_insert(0);
        if t.lit.is_negated() {
            constant += t.coeff;
            *entry -= t.coeff;
        } else {
            *entry += t.coeff;
        }
    }
    Ok((coeffs, constant))
}

/// Rewrites `sum c_v * x_v >= rhs` into positive-coefficient literal form.
fn positive_ge(coeffs: &BTreeMap<u32, i64>, mut rhs: i64, id: usize) -> Option<PbConstraint> {
    let mut terms = Vec::with_capacity(coeffs.len());
    for (&var, &c) in coeffs {
        match c.cmp(&0) {
            std::cmp::Ordering::Greater => terms.push(Term::new(c, Literal::pos(var))),
            std::cmp::Ordering::Less => {
                // c*x = c - c*~x
                rhs -= c;
                terms.push(Term::new(-c, Literal::neg(var)));
            }
            std::cmp::Ordering::Equal => {}
        }
    }
    if rhs <= 0 {
        return None;
    }
    Some(PbConstraint {
        id,
        terms,
        bound: rhs,
        kind: ConstraintKind::Hard,
        weight: 1,
        care: 0,
    })
}

/// Normalizes one raw relation into zero, one or two `>=` constraints.
///
/// An empty result means the relation is a tautology.
pub fn normalize_constraint(raw: &RawConstraint, id: usize) -> Result<Vec<PbConstraint>, ModelError> {
    let (coeffs, constant) = linearize(&raw.terms)?;
    let rhs = raw.rhs.checked_sub(constant).ok_or(ModelError::Overflow)?;
    let negated: BTreeMap<u32, i64> = coeffs.iter().map(|(&v, &c)| (v, -c)).collect();
    let mut out = Vec::with_capacity(2);
    if matches!(raw.relation, Relation::Ge | Relation::Eq) {
        out.extend(positive_ge(&coeffs, rhs, id));
    }
    if matches!(raw.relation, Relation::Le | Relation::Eq) {
        out.extend(positive_ge(&negated, -rhs, id));
    }
    for c in &out {
        if c.is_unsatisfiable() {
            return Err(ModelError::TriviallyUnsat { constraint: id });
        }
    }
    Ok(out)
}

/// Normalizes a raw objective (signed coefficients) into positive literal
/// form; negative coefficients move mass into `constant_offset`.
pub fn normalize_objective(terms: &[Term], constant: i64) -> Result<Objective, ModelError> {
    let (coeffs, lin_constant) = linearize(terms)?;
    let mut offset = constant + lin_constant;
    let mut out = Vec::with_capacity(coeffs.len());
    for (&var, &c) in &coeffs {
        match c.cmp(&0) {
            std::cmp::Ordering::Greater => out.push(Term::new(c, Literal::pos(var))),
            std::cmp::Ordering::Less => {
                offset += c;
                out.push(Term::new(-c, Literal::neg(var)));
            }
            std::cmp::Ordering::Equal => {}
        }
    }
    Ok(Objective {
        terms: out,
        constant_offset: offset,
    })
}

/// The objective constraint encoding `objective <= k`:
/// `sum b_i * ~l_i >= sum b_i - (k - offset)`.
///
/// The returned constraint may be a tautology (`bound <= 0`) when `k` is at or
/// above the largest reachable objective value.
pub fn build_objective_constraint(objective: &Objective, k: i64) -> PbConstraint {
    let terms = objective
        .terms
        .iter()
        .map(|t| Term::new(t.coeff, !t.lit))
        .collect();
    PbConstraint {
        id: usize::MAX,
        terms,
        bound: objective_bound_for(objective, k),
        kind: ConstraintKind::Objective,
        weight: 1,
        care: 0,
    }
}

/// Bound of the objective constraint for `objective <= k`.
pub fn objective_bound_for(objective: &Objective, k: i64) -> i64 {
    objective.coeff_sum() - (k - objective.constant_offset)
}
