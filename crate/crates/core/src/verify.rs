//! Solution checking and exhaustive oracles.
//!
//! Everything here evaluates constraints from scratch and shares no state or
//! code path with the incremental search.

use crate::error::OracleError;
use crate::model::{Assignment, PboInstance, Term};
use crate::par::{self, Execution};

/// Variable limit of [`brute_force_optimum`].
pub const BRUTE_FORCE_LIMIT: usize = 25;
/// Variable limit of [`forced_literal_oracle`].
pub const FORCED_ORACLE_LIMIT: usize = 20;

const CHUNK: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub feasible: bool,
    pub violated: Vec<usize>,
    pub objective: i64,
}

fn lhs(terms: &[Term], values: &[bool]) -> i64 {
    let mut s = 0;
    for t in terms {
        if values[t.lit.index()] != t.lit.is_negated() {
            s += t.coeff;
        }
    }
    s
}

pub fn verify(instance: &PboInstance, assignment: &Assignment) -> VerificationReport {
    assert_eq!(assignment.len(), instance.num_vars, "assignment must be complete");
    let values = assignment.values();
    let violated: Vec<usize> = instance
        .hard
        .iter()
        .filter(|c| lhs(&c.terms, values) < c.bound)
        .map(|c| c.id)
        .collect();
    VerificationReport {
        feasible: violated.is_empty(),
        violated,
        objective: instance.objective.constant_offset + lhs(&instance.objective.terms, values),
    }
}

/// Assignment number `i` in lexicographic order over `(x1, ..., xn)`;
/// `x1` is the most significant bit.
pub fn lex_assignment(num_vars: usize, i: u64) -> Assignment {
    Assignment::from_values(
        (0..num_vars)
            .map(|k| (i >> (num_vars - 1 - k)) & 1 == 1)
            .collect(),
    )
}

fn fill_lex(values: &mut [bool], i: u64) {
    let n = values.len();
    for (k, v) in values.iter_mut().enumerate() {
        *v = (i >> (n - 1 - k)) & 1 == 1;
    }
}

fn feasible(instance: &PboInstance, values: &[bool]) -> bool {
    instance.hard.iter().all(|c| lhs(&c.terms, values) >= c.bound)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Optimum {
    /// Minimum cost and the lexicographically first assignment reaching it.
    Feasible { cost: i64, assignment: Assignment },
    Infeasible,
}

impl Optimum {
    pub fn cost(&self) -> Option<i64> {
        match self {
            Optimum::Feasible { cost, .. } => Some(*cost),
            Optimum::Infeasible => None,
        }
    }
}

pub fn brute_force_optimum(instance: &PboInstance) -> Result<Optimum, OracleError> {
    brute_force_optimum_with(instance, Execution::default())
}

pub fn brute_force_optimum_with(
    instance: &PboInstance,
    exec: Execution,
) -> Result<Optimum, OracleError> {
    let n = instance.num_vars;
    if n > BRUTE_FORCE_LIMIT {
        return Err(OracleError::TooLarge {
            num_vars: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let best = par::fold_range(
        exec,
        1u64 << n,
        CHUNK,
        |range| {
            let mut values = vec![false; n];
            let mut best: Option<(i64, u64)> = None;
            for i in range {
                fill_lex(&mut values, i);
                if !feasible(instance, &values) {
                    continue;
                }
                let cost =
                    instance.objective.constant_offset + lhs(&instance.objective.terms, &values);
                if best.is_none_or(|(c, _)| cost < c) {
                    best = Some((cost, i));
                }
            }
            best
        },
        |a, b| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        },
    )
    .flatten();
    Ok(match best {
        Some((cost, i)) => Optimum::Feasible {
            cost,
            assignment: lex_assignment(n, i),
        },
        None => Optimum::Infeasible,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcedValue {
    One,
    Zero,
    Free,
    InstanceInfeasible,
}

/// Per variable: the value it takes in every feasible assignment, if unique.
pub fn forced_literal_oracle(instance: &PboInstance) -> Result<Vec<ForcedValue>, OracleError> {
    forced_literal_oracle_with(instance, Execution::default())
}

pub fn forced_literal_oracle_with(
    instance: &PboInstance,
    exec: Execution,
) -> Result<Vec<ForcedValue>, OracleError> {
    let n = instance.num_vars;
    if n > FORCED_ORACLE_LIMIT {
        return Err(OracleError::TooLarge {
            num_vars: n,
            limit: FORCED_ORACLE_LIMIT,
        });
    }
    // (seen-true mask, seen-false mask) over feasible assignments, as bitsets
    // on the lexicographic index; bit (n-1-k) is variable k+1.
    let (ones, zeros, any) = par::fold_range(
        exec,
        1u64 << n,
        CHUNK,
        |range| {
            let mut values = vec![false; n];
            let (mut ones, mut zeros, mut any) = (0u64, 0u64, false);
            for i in range {
                fill_lex(&mut values, i);
                if feasible(instance, &values) {
                    ones |= i;
                    zeros |= !i;
                    any = true;
                }
            }
            (ones, zeros, any)
        },
        |a, b| (a.0 | b.0, a.1 | b.1, a.2 || b.2),
    )
    .unwrap_or((0, 0, false));
    if !any {
        return Ok(vec![ForcedValue::InstanceInfeasible; n]);
    }
    Ok((0..n)
        .map(|k| {
            let bit = 1u64 << (n - 1 - k);
            match (ones & bit != 0, zeros & bit != 0) {
                (true, true) => ForcedValue::Free,
                (true, false) => ForcedValue::One,
                (false, true) => ForcedValue::Zero,
                (false, false) => unreachable!("feasible assignment sets every variable"),
            }
        })
        .collect())
}
