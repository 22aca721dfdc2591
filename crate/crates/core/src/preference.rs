//! Weak-constraint scoring and the dominance relation between
//! interpretations.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ground::{ground, GroundHead, GroundProgram, DEFAULT_ATOM_BUDGET};
use crate::solve::Interpretation;
use crate::syntax::{Program, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeakTuple {
    pub weight: i64,
    pub level: i64,
    pub terms: Vec<Term>,
}

/// Level to score. Levels with score zero are left out, so two tables are
/// equal exactly when every level agrees.
pub type ScoreTable = BTreeMap<i64, i64>;

fn truth_of(p: &GroundProgram, i: &Interpretation) -> Vec<bool> {
    let mut truth = vec![false; p.atom_count()];
    for atom in i {
        if let Some(id) = p.atom_id(atom) {
            truth[id as usize] = true;
        }
    }
    truth
}

pub fn weak_tuples(p: &GroundProgram, i: &Interpretation) -> BTreeSet<WeakTuple> {
    weak_tuples_ids(p, &truth_of(p, i))
}

/// Tuples of the ground weak constraints whose body holds in `truth`.
pub fn weak_tuples_ids(p: &GroundProgram, truth: &[bool]) -> BTreeSet<WeakTuple> {
    p.rules
        .iter()
        .filter_map(|r| match &r.head {
            GroundHead::Weak { weight, level, terms } if r.body_holds(truth) => Some(WeakTuple {
                weight: *weight,
                level: *level,
                terms: terms.clone(),
            }),
            _ => None,
        })
        .collect()
}

pub fn table_of<'a>(tuples: impl IntoIterator<Item = &'a WeakTuple>) -> Result<ScoreTable> {
    let mut table = ScoreTable::new();
    for t in tuples {
        let slot = table.entry(t.level).or_insert(0);
        *slot = slot.checked_add(t.weight).ok_or(Error::Overflow("summing weak constraint weights"))?;
    }
    table.retain(|_, s| *s != 0);
    Ok(table)
}

pub fn score_table(p: &GroundProgram, i: &Interpretation) -> Result<ScoreTable> {
    table_of(&weak_tuples(p, i))
}

pub fn score_at_level(p: &GroundProgram, i: &Interpretation, level: i64) -> Result<i64> {
    Ok(score_table(p, i)?.get(&level).copied().unwrap_or(0))
}

/// `a` is preferred to `b`: at the highest level where they differ, `a`
/// has the lower score.
pub fn table_dominates(a: &ScoreTable, b: &ScoreTable) -> bool {
    let levels: BTreeSet<i64> = a.keys().chain(b.keys()).copied().collect();
    for level in levels.into_iter().rev() {
        let (x, y) = (a.get(&level).copied().unwrap_or(0), b.get(&level).copied().unwrap_or(0));
        if x != y {
            return x < y;
        }
    }
    false
}

pub fn dominates(p: &GroundProgram, i1: &Interpretation, i2: &Interpretation) -> Result<bool> {
    Ok(table_dominates(&score_table(p, i1)?, &score_table(p, i2)?))
}

pub fn equally_optimal(p: &GroundProgram, i1: &Interpretation, i2: &Interpretation) -> Result<bool> {
    Ok(score_table(p, i1)? == score_table(p, i2)?)
}

/// The weak constraints of a non-ground program, evaluated over concrete
/// interpretations by grounding them against those interpretations.
#[derive(Clone, Debug)]
pub struct Preference {
    weak: Program,
}

impl Preference {
    pub fn new(p: &Program) -> Self {
        Preference {
            weak: p.rules.iter().filter(|r| r.is_weak()).cloned().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.weak.is_empty()
    }

    pub fn score_table(&self, i: &Interpretation) -> Result<ScoreTable> {
        let mut program = Program::facts(i);
        program.extend(&self.weak);
        let g = ground(&program, DEFAULT_ATOM_BUDGET)?;
        score_table(&g, i)
    }

    pub fn dominates(&self, i1: &Interpretation, i2: &Interpretation) -> Result<bool> {
        Ok(table_dominates(&self.score_table(i1)?, &self.score_table(i2)?))
    }

    pub fn equally_optimal(&self, i1: &Interpretation, i2: &Interpretation) -> Result<bool> {
        Ok(self.score_table(i1)? == self.score_table(i2)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, Atom};

    fn interp(atoms: &[&str]) -> Interpretation {
        atoms.iter().map(|a| a.parse::<Atom>().unwrap()).collect()
    }

    #[test]
    fn duplicate_tails_count_once() {
        let p = parse_program("p. q. :~ p. [1@1, x] :~ q. [1@1, x]").unwrap();
        let g = ground(&p, 10).unwrap();
        let i = interp(&["p", "q"]);
        assert_eq!(weak_tuples(&g, &i).len(), 1);
        assert_eq!(score_at_level(&g, &i, 1).unwrap(), 1);
    }

    #[test]
    fn no_weak_constraints_no_tuples() {
        let g = ground(&parse_program("p.").unwrap(), 10).unwrap();
        assert!(weak_tuples(&g, &interp(&["p"])).is_empty());
    }

    #[test]
    fn irreflexive() {
        let g = ground(&parse_program("p. :~ p. [3@2]").unwrap(), 10).unwrap();
        let i = interp(&["p"]);
        assert!(!dominates(&g, &i, &i).unwrap());
        assert!(equally_optimal(&g, &i, &i).unwrap());
    }

    #[test]
    fn higher_level_decides() {
        let a: ScoreTable = [(1, 0), (2, 5)].into_iter().collect();
        let b: ScoreTable = [(1, 100), (2, 6)].into_iter().collect();
        assert!(table_dominates(&a, &b));
        assert!(!table_dominates(&b, &a));
    }

    #[test]
    fn negative_weights() {
        let p = Preference::new(&parse_program(":~ p. [-1@1]").unwrap());
        assert!(p.dominates(&interp(&["p"]), &interp(&[])).unwrap());
    }

    #[test]
    fn overflow_is_an_error() {
        let t = [
            WeakTuple { weight: i64::MAX, level: 1, terms: vec![] },
            WeakTuple { weight: 1, level: 1, terms: vec![Term::int(1)] },
        ];
        assert!(matches!(table_of(&t), Err(Error::Overflow(_))));
    }
}
