//! Random Hamiltonicity tasks over small directed graphs.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::solve::PartialInterpretation;
use crate::syntax::{parse_program, Atom, Program, Rule, Term};
use crate::task::{Cdpi, LearningTask};

pub const MAX_NODES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Graphs are encoded in the example atoms over a choice-rule background.
    A,
    /// Graphs are contexts; the background is empty.
    B,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "a" | "A" => Ok(Variant::A),
            "b" | "B" => Ok(Variant::B),
            _ => Err(format!("unknown Hamilton variant `{s}`")),
        }
    }
}

/// A directed graph on nodes `1..=nodes`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    pub nodes: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Graph {
            nodes,
            edges: edges.into_iter().collect(),
        }
    }

    pub fn node_atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        (1..=self.nodes).map(|n| Atom::new("node", vec![Term::int(n as i64)]))
    }

    pub fn edge_atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.edges.iter().map(|&(a, b)| edge(a, b))
    }

    pub fn facts(&self) -> Program {
        let atoms: Vec<Atom> = self.node_atoms().chain(self.edge_atoms()).collect();
        Program::facts(&atoms)
    }
}

fn edge(a: usize, b: usize) -> Atom {
    Atom::new("edge", vec![Term::int(a as i64), Term::int(b as i64)])
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Brute force: some ordering of the nodes starting at 1 forms a cycle.
pub fn is_hamiltonian(g: &Graph) -> bool {
    if g.nodes == 0 {
        return false;
    }
    let mut rest: Vec<usize> = (2..=g.nodes).collect();
    loop {
        let tour: Vec<usize> = std::iter::once(1).chain(rest.iter().copied()).collect();
        let closed = (0..tour.len()).all(|i| g.edges.contains(&(tour[i], tour[(i + 1) % tour.len()])));
        if closed {
            return true;
        }
        if !next_permutation(&mut rest) {
            return false;
        }
    }
}

/// A correct encoding followed by distractors.
pub const HYPOTHESIS_SPACE: &str = include_str!("../../configs/hamilton_space.lp");

pub fn hypothesis_space() -> Vec<Rule> {
    parse_program(HYPOTHESIS_SPACE).expect("built-in hypothesis space parses").rules
}

/// Indices of the correct encoding inside [`hypothesis_space`].
pub const CORRECT: [usize; 5] = [0, 1, 2, 3, 4];

pub fn background(max_nodes: usize) -> Program {
    let nodes: Vec<String> = (1..=max_nodes).map(|n| format!("node({n})")).collect();
    let text = format!(
        "1 {{ {} }} {max_nodes}.\n0 {{ edge(N1, N2) }} 1 :- node(N1), node(N2).",
        nodes.join("; ")
    );
    parse_program(&text).expect("generated background parses")
}

fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> Graph {
    let nodes = rng.gen_range(1..=max_nodes);
    let mut edges = BTreeSet::new();
    for a in 1..=nodes {
        for b in 1..=nodes {
            if rng.gen_bool(0.5) {
                edges.insert((a, b));
            }
        }
    }
    Graph { nodes, edges }
}

fn example(g: &Graph, id: &str, max_nodes: usize, variant: Variant) -> Cdpi {
    match variant {
        Variant::A => {
            let inc: Vec<Atom> = g.node_atoms().chain(g.edge_atoms()).collect();
            let missing_nodes = (g.nodes + 1..=max_nodes).map(|n| Atom::new("node", vec![Term::int(n as i64)]));
            let missing_edges = (1..=max_nodes)
                .flat_map(|a| (1..=max_nodes).map(move |b| (a, b)))
                .filter(|e| !g.edges.contains(e))
                .map(|(a, b)| edge(a, b));
            let exc: Vec<Atom> = missing_nodes.chain(missing_edges).collect();
            Cdpi::new(id, PartialInterpretation::new(inc, exc), Program::default())
        }
        Variant::B => Cdpi::new(id, PartialInterpretation::default(), g.facts()),
    }
}

/// Samples `n_pos` Hamiltonian and `n_neg` non-Hamiltonian distinct graphs
/// with at most `max_nodes` nodes.
pub fn gen_hamilton(max_nodes: usize, n_pos: usize, n_neg: usize, variant: Variant, seed: u64) -> Result<LearningTask> {
    if !(1..=MAX_NODES).contains(&max_nodes) {
        return Err(Error::Generator(format!("max_nodes must lie in 1..={MAX_NODES}, got {max_nodes}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    let attempts = 200 * (n_pos + n_neg) + 1000;
    for _ in 0..attempts {
        if pos.len() == n_pos && neg.len() == n_neg {
            break;
        }
        let g = random_graph(&mut rng, max_nodes);
        if !seen.insert(g.clone()) {
            continue;
        }
        if is_hamiltonian(&g) {
            if pos.len() < n_pos {
                pos.push(g);
            }
        } else if neg.len() < n_neg {
            neg.push(g);
        }
    }
    if pos.len() < n_pos || neg.len() < n_neg {
        return Err(Error::Generator(format!(
            "found only {} Hamiltonian and {} non-Hamiltonian graphs after {attempts} samples",
            pos.len(),
            neg.len()
        )));
    }
    let bg = match variant {
        Variant::A => background(max_nodes),
        Variant::B => Program::default(),
    };
    let mut t = LearningTask::new(bg, hypothesis_space());
    for (i, g) in pos.iter().enumerate() {
        t.add_positive(example(g, &format!("p{}", i + 1), max_nodes, variant));
    }
    for (i, g) in neg.iter().enumerate() {
        t.add_negative(example(g, &format!("n{}", i + 1), max_nodes, variant));
    }
    Ok(t)
}

/// Appends `times - 1` renamed copies of every positive and negative
/// example, each copy after all originals.
pub fn duplicate_examples(t: &LearningTask, times: usize) -> LearningTask {
    let mut out = t.clone();
    for copy in 2..=times {
        for ex in &t.positives {
            let mut e = ex.clone();
            e.id = format!("{}_{copy}", ex.id);
            out.positives.push(e);
        }
    }
    for copy in 2..=times {
        for ex in &t.negatives {
            let mut e = ex.clone();
            e.id = format!("{}_{copy}", ex.id);
            out.negatives.push(e);
        }
    }
    out
}
