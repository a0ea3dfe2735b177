//! Seeded random instances for tests and benchmarks.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{ConstraintKind, Literal, Objective, PbConstraint, PboInstance, Term};
use crate::opb::write_opb;

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub num_vars: usize,
    pub num_constraints: usize,
    pub terms_min: usize,
    pub terms_max: usize,
    pub coeff_min: i64,
    pub coeff_max: i64,
    /// Probability that a variable carries an objective term.
    pub objective_density: f64,
    /// Draw bounds against a hidden random assignment so that the whole
    /// instance is feasible, not only each constraint on its own.
    pub planted: bool,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            num_vars: 10,
            num_constraints: 15,
            terms_min: 2,
            terms_max: 4,
            coeff_min: 1,
            coeff_max: 5,
            objective_density: 0.5,
            planted: false,
            seed: 1,
        }
    }
}

/// Generates an instance and its OPB text; the text parses back to the same
/// instance.
pub fn generate_random_instance(params: &GenParams) -> (PboInstance, String) {
    assert!(params.num_vars >= 1 && params.num_vars <= 1_000_000);
    assert!(params.terms_min >= 1 && params.terms_min <= params.terms_max);
    assert!(params.coeff_min >= 1 && params.coeff_min <= params.coeff_max);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.num_vars;
    let hidden: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let mut hard = Vec::with_capacity(params.num_constraints);
    for id in 0..params.num_constraints {
        let hi = params.terms_max.min(n);
        let k = rng.gen_range(params.terms_min.min(hi)..=hi);
        let mut vars: Vec<usize> = sample(&mut rng, n, k).into_vec();
        vars.sort_unstable();
        let mut terms: Vec<Term> = vars
            .iter()
            .map(|&v| {
                let coeff = rng.gen_range(params.coeff_min..=params.coeff_max);
                Term::new(coeff, Literal::new(v as u32 + 1, rng.gen_bool(0.5)))
            })
            .collect();
        let reach: i64 = if params.planted {
            let true_sum = |ts: &[Term]| -> i64 {
                ts.iter()
                    .filter(|t| t.lit.is_true_under(hidden[t.lit.index()]))
                    .map(|t| t.coeff)
                    .sum()
            };
            if true_sum(&terms) == 0 {
                let i = rng.gen_range(0..terms.len());
                terms[i].lit = !terms[i].lit;
            }
            true_sum(&terms)
        } else {
            terms.iter().map(|t| t.coeff).sum()
        };
        let bound = rng.gen_range(1..=reach);
        hard.push(PbConstraint {
            id,
            terms,
            bound,
            kind: ConstraintKind::Hard,
            weight: 1,
            care: 0,
        });
    }
    let mut obj_terms = Vec::new();
    for v in 1..=n as u32 {
        if params.objective_density > 0.0 && rng.gen_bool(params.objective_density.min(1.0)) {
            let coeff = rng.gen_range(params.coeff_min..=params.coeff_max);
            obj_terms.push(Term::new(coeff, Literal::new(v, rng.gen_bool(0.5))));
        }
    }
    let instance = PboInstance::new(
        n,
        hard,
        Objective {
            terms: obj_terms,
            constant_offset: 0,
        },
    );
    let text = write_opb(&instance);
    (instance, text)
}
