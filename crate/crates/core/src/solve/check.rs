//! Reference stability check, kept independent of the search engine.
//!
//! Each choice rule `l { h1..hk } u :- B` is normalised into the normal rules
//! `hi :- B, not hi'` and `hi' :- B, not hi` over fresh complement atoms plus
//! a cardinality check; the interpretation, extended with the complements it
//! forces, must then equal the least model of the Gelfond-Lifschitz reduct.

use crate::ground::{GroundHead, GroundProgram};

use super::Interpretation;

struct NormalRule {
    head: usize,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

pub fn is_answer_set(p: &GroundProgram, i: &Interpretation) -> bool {
    let mut truth = vec![false; p.atom_count()];
    for atom in i {
        match p.atom_id(atom) {
            Some(id) => truth[id as usize] = true,
            None => return false,
        }
    }
    is_answer_set_ids(p, &truth)
}

/// Same check for a truth vector indexed by atom id.
pub fn is_answer_set_ids(p: &GroundProgram, truth: &[bool]) -> bool {
    let n = p.atom_count();
    let holds = |pos: &[u32], neg: &[u32]| {
        pos.iter().all(|&a| truth[a as usize]) && neg.iter().all(|&a| !truth[a as usize])
    };

    let mut extended = truth.to_vec();
    let mut normal = Vec::new();
    for rule in &p.rules {
        let pos: Vec<usize> = rule.pos.iter().map(|&a| a as usize).collect();
        let neg: Vec<usize> = rule.neg.iter().map(|&a| a as usize).collect();
        match &rule.head {
            GroundHead::Weak { .. } => {}
            GroundHead::Constraint => {
                if holds(&rule.pos, &rule.neg) {
                    return false;
                }
            }
            GroundHead::Atom(h) => normal.push(NormalRule {
                head: *h as usize,
                pos,
                neg,
            }),
            GroundHead::Choice {
                lower,
                upper,
                elements,
            } => {
                let body = holds(&rule.pos, &rule.neg);
                if body {
                    let count = elements.iter().filter(|&&e| truth[e as usize]).count();
                    if count < *lower || count > *upper {
                        return false;
                    }
                }
                for &e in elements {
                    let complement = extended.len();
                    extended.push(body && !truth[e as usize]);
                    let mut neg_h = neg.clone();
                    neg_h.push(complement);
                    normal.push(NormalRule {
                        head: e as usize,
                        pos: pos.clone(),
                        neg: neg_h,
                    });
                    let mut neg_c = neg.clone();
                    neg_c.push(e as usize);
                    normal.push(NormalRule {
                        head: complement,
                        pos: pos.clone(),
                        neg: neg_c,
                    });
                }
            }
        }
    }
    debug_assert!(extended.len() >= n);
    least_model_of_reduct(&normal, &extended) == extended
}

/// Naive fixpoint over the rules whose negative body is satisfied.
fn least_model_of_reduct(rules: &[NormalRule], interpretation: &[bool]) -> Vec<bool> {
    let reduct: Vec<&NormalRule> = rules
        .iter()
        .filter(|r| r.neg.iter().all(|&a| !interpretation[a]))
        .collect();
    let mut model = vec![false; interpretation.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for r in &reduct {
            if !model[r.head] && r.pos.iter().all(|&a| model[a]) {
                model[r.head] = true;
                changed = true;
            }
        }
    }
    model
}
