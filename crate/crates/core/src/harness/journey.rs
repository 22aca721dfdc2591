//! Journey-preference tasks: journeys are contexts, orderings compare them,
//! and the hypothesis space holds weak constraints only.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::preference::{table_dominates, Preference, ScoreTable};
use crate::solve::{Interpretation, PartialInterpretation};
use crate::syntax::{parse_program, Atom, Program, Rule, Term};
use crate::task::{Cdpi, LearningTask, Mode, Relation};

pub const MODES: [&str; 4] = ["bus", "car", "walk", "bicycle"];

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Leg {
    pub mode: &'static str,
    pub distance: i64,
    pub crime_rating: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Journey {
    pub legs: Vec<Leg>,
}

impl Journey {
    pub fn atoms(&self) -> Interpretation {
        let mut out = Interpretation::new();
        for (i, leg) in self.legs.iter().enumerate() {
            let l = Term::func("leg", vec![Term::int(i as i64 + 1)]);
            out.insert(Atom::new("mode", vec![l.clone(), Term::constant(leg.mode)]));
            out.insert(Atom::new("distance", vec![l.clone(), Term::int(leg.distance)]));
            out.insert(Atom::new("crime_rating", vec![l, Term::int(leg.crime_rating)]));
        }
        out
    }

    pub fn facts(&self) -> Program {
        Program::facts(&self.atoms())
    }
}

#[derive(Clone, Debug)]
pub struct JourneyConfig {
    pub max_legs: usize,
    pub max_distance: i64,
    pub max_crime: i64,
    /// Truncates the hypothesis space to its first `space_cap` rules.
    pub space_cap: Option<usize>,
    pub max_truth_rules: usize,
}

impl Default for JourneyConfig {
    fn default() -> Self {
        JourneyConfig {
            max_legs: 3,
            max_distance: 200,
            max_crime: 5,
            space_cap: None,
            max_truth_rules: 3,
        }
    }
}

/// Every weak constraint template instantiated over modes, crime
/// thresholds 1..4 and priorities 1..3, without duplicates.
pub fn hypothesis_space(cfg: &JourneyConfig) -> Vec<Rule> {
    let mut text = String::new();
    for p in 1..=3 {
        for m in MODES {
            text.push_str(&format!(":~ mode(L, {m}). [1@{p}, L]\n"));
            text.push_str(&format!(":~ mode(L, {m}), distance(L, D). [D@{p}, L, D]\n"));
        }
        for c in 1..=4 {
            text.push_str(&format!(":~ crime_rating(L, R), R > {c}. [1@{p}, L, R]\n"));
            for m in MODES {
                text.push_str(&format!(":~ mode(L, {m}), crime_rating(L, R), R > {c}. [1@{p}, L, R]\n"));
            }
        }
        text.push_str(&format!(":~ distance(L, D). [D@{p}, L, D]\n"));
    }
    let mut seen = BTreeSet::new();
    let mut rules: Vec<Rule> = parse_program(&text)
        .expect("built-in templates parse")
        .rules
        .into_iter()
        .filter(|r| seen.insert(r.to_string()))
        .collect();
    if let Some(cap) = cfg.space_cap {
        rules.truncate(cap);
    }
    rules
}

pub fn random_journey(rng: &mut ChaCha8Rng, cfg: &JourneyConfig) -> Journey {
    let legs = (0..rng.gen_range(1..=cfg.max_legs))
        .map(|_| Leg {
            mode: MODES[rng.gen_range(0..MODES.len())],
            distance: rng.gen_range(1..=cfg.max_distance),
            crime_rating: rng.gen_range(1..=cfg.max_crime),
        })
        .collect();
    Journey { legs }
}

/// How a preference program relates two journeys.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    First,
    Second,
    Equal,
}

fn verdict(a: &ScoreTable, b: &ScoreTable) -> Verdict {
    if table_dominates(a, b) {
        Verdict::First
    } else if table_dominates(b, a) {
        Verdict::Second
    } else {
        Verdict::Equal
    }
}

pub fn compare(p: &Preference, a: &Journey, b: &Journey) -> Result<Verdict> {
    Ok(verdict(&p.score_table(&a.atoms())?, &p.score_table(&b.atoms())?))
}

#[derive(Clone, Debug)]
pub struct JourneyTask {
    pub task: LearningTask,
    pub truth: Program,
    pub journeys: Vec<Journey>,
}

/// Samples a truth of 1..=`max_truth_rules` weak constraints and
/// `n_orderings` brave orderings, of which `equality_fraction` (rounded)
/// are equalities and the rest are ⟨preferred, non-preferred⟩ pairs.
pub fn gen_journey(n_orderings: usize, equality_fraction: f64, seed: u64, cfg: &JourneyConfig) -> Result<JourneyTask> {
    if n_orderings == 0 {
        return Err(Error::Generator("at least one ordering is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = hypothesis_space(cfg);
    let k = rng.gen_range(1..=cfg.max_truth_rules.min(space.len()).max(1));
    let truth: Program = space.choose_multiple(&mut rng, k).cloned().collect();
    let pref = Preference::new(&truth);

    let n_equal = (equality_fraction.clamp(0.0, 1.0) * n_orderings as f64).round() as usize;
    let n_strict = n_orderings - n_equal;
    let mut pairs: Vec<(Journey, Journey, Relation)> = Vec::new();
    let mut used = BTreeSet::new();
    let (mut strict, mut equal) = (0, 0);
    let attempts = 2000 * n_orderings;
    for _ in 0..attempts {
        if strict == n_strict && equal == n_equal {
            break;
        }
        let a = random_journey(&mut rng, cfg);
        let b = random_journey(&mut rng, cfg);
        if a == b || used.contains(&(a.clone(), b.clone())) || used.contains(&(b.clone(), a.clone())) {
            continue;
        }
        let v = compare(&pref, &a, &b)?;
        match v {
            Verdict::Equal if equal < n_equal => {
                equal += 1;
                used.insert((a.clone(), b.clone()));
                pairs.push((a, b, Relation::Equal));
            }
            Verdict::First if strict < n_strict => {
                strict += 1;
                used.insert((a.clone(), b.clone()));
                pairs.push((a, b, Relation::Strict));
            }
            Verdict::Second if strict < n_strict => {
                strict += 1;
                used.insert((b.clone(), a.clone()));
                pairs.push((b, a, Relation::Strict));
            }
            _ => {}
        }
    }
    if strict < n_strict || equal < n_equal {
        return Err(Error::Generator(format!(
            "realized {strict}/{n_strict} strict and {equal}/{n_equal} equality orderings under truth {}",
            truth.to_string().trim()
        )));
    }

    let mut task = LearningTask::new(Program::default(), space);
    let mut journeys = Vec::new();
    let mut id_of = |j: &Journey, task: &mut LearningTask| -> String {
        if let Some(i) = journeys.iter().position(|x| x == j) {
            return format!("j{}", i + 1);
        }
        journeys.push(j.clone());
        let id = format!("j{}", journeys.len());
        task.add_positive(Cdpi::new(&id, PartialInterpretation::default(), j.facts()));
        id
    };
    for (a, b, relation) in &pairs {
        let first = id_of(a, &mut task);
        let second = id_of(b, &mut task);
        task.add_ordering(&first, &second, *relation, Mode::Brave);
    }
    Ok(JourneyTask { task, truth, journeys })
}

/// Fresh journey pairs, sampled independently of any training task.
pub fn test_pairs(n: usize, seed: u64, cfg: &JourneyConfig) -> Vec<(Journey, Journey)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_7e57);
    (0..n)
        .map(|_| (random_journey(&mut rng, cfg), random_journey(&mut rng, cfg)))
        .collect()
}

/// Fraction of pairs on which `learned` and `truth` agree about which
/// journey is preferred, or that neither is.
pub fn evaluate_accuracy(learned: &Program, truth: &Program, pairs: &[(Journey, Journey)]) -> Result<f64> {
    if pairs.is_empty() {
        return Ok(1.0);
    }
    let (l, t) = (Preference::new(learned), Preference::new(truth));
    let mut agree = 0;
    for (a, b) in pairs {
        if compare(&l, a, b)? == compare(&t, a, b)? {
            agree += 1;
        }
    }
    Ok(agree as f64 / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leg(mode: &'static str, distance: i64, crime_rating: i64) -> Leg {
        Leg { mode, distance, crime_rating }
    }

    const WS: &str = "
        :~ mode(L, walk), crime_rating(L, R), R > 3. [1@3, L, R]
        :~ mode(L, bus). [1@2, L]
        :~ mode(L, walk), distance(L, D). [D@1, L, D]
    ";

    #[test]
    fn space_size() {
        let s = hypothesis_space(&JourneyConfig::default());
        assert_eq!(s.len(), 3 * (4 + 4 + 4 + 16 + 1));
        assert!(s.iter().all(|r| r.is_weak() && r.body.len() <= 3));
        let capped = hypothesis_space(&JourneyConfig {
            space_cap: Some(10),
            ..Default::default()
        });
        assert_eq!(capped.len(), 10);
    }

    #[test]
    fn bus_leg_is_worse() {
        let ws = Preference::new(&parse_program(WS).unwrap());
        let a = Journey { legs: vec![leg("walk", 100, 1)] };
        let b = Journey {
            legs: vec![leg("walk", 100, 1), leg("bus", 50, 1)],
        };
        assert_eq!(compare(&ws, &a, &b).unwrap(), Verdict::First);
    }

    #[test]
    fn accuracy_hand_built() {
        let truth = parse_program(":~ mode(L, bus). [1@1, L]").unwrap();
        let learned = parse_program(":~ mode(L, car). [1@1, L]").unwrap();
        let walk = Journey { legs: vec![leg("walk", 10, 1)] };
        let bus = Journey { legs: vec![leg("bus", 10, 1)] };
        let car = Journey { legs: vec![leg("car", 10, 1)] };
        // (walk, walk): equal under both.
        // (bus, car): truth prefers car, learned prefers bus.
        // (bus, bus): equal under both.
        let pairs = vec![(walk.clone(), walk), (bus.clone(), car), (bus.clone(), bus)];
        let acc = evaluate_accuracy(&learned, &truth, &pairs).unwrap();
        assert!((acc - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn learned_equals_truth() {
        let truth = parse_program(WS).unwrap();
        let pairs = test_pairs(50, 1, &JourneyConfig::default());
        assert_eq!(evaluate_accuracy(&truth, &truth, &pairs).unwrap(), 1.0);
    }

    #[test]
    fn empty_hypothesis_misses_strict_pairs() {
        let truth = parse_program(":~ mode(L, bus). [1@1, L]").unwrap();
        let pairs = vec![(
            Journey { legs: vec![leg("car", 5, 1)] },
            Journey { legs: vec![leg("bus", 5, 1)] },
        )];
        assert_eq!(evaluate_accuracy(&Program::default(), &truth, &pairs).unwrap(), 0.0);
    }

    #[test]
    fn generated_orderings_hold_under_truth() {
        for seed in 0..5 {
            let jt = gen_journey(12, 0.5, seed, &JourneyConfig::default()).unwrap();
            let pref = Preference::new(&jt.truth);
            let journey = |id: &str| &jt.journeys[id[1..].parse::<usize>().unwrap() - 1];
            for o in &jt.task.brave_orderings {
                let v = compare(&pref, journey(&o.first), journey(&o.second)).unwrap();
                let expected = match o.relation {
                    Relation::Strict => Verdict::First,
                    Relation::Equal => Verdict::Equal,
                };
                assert_eq!(v, expected);
            }
            jt.task.validate().unwrap();
        }
    }

    #[test]
    fn no_equalities_without_fraction() {
        let jt = gen_journey(6, 0.0, 4, &JourneyConfig::default()).unwrap();
        assert!(jt.task.brave_orderings.iter().all(|o| o.relation == Relation::Strict));
    }
}
