//! Task files, benchmark generators and benchmark runs.

pub mod bench;
pub mod hamilton;
pub mod journey;
pub mod taskfile;

pub use bench::{run_bench, write_csv, AccuracyProbe, BenchRecord, BenchTask};
pub use hamilton::{gen_hamilton, is_hamiltonian, Graph, Variant};
pub use journey::{evaluate_accuracy, gen_journey, JourneyConfig, JourneyTask};
pub use taskfile::{load_task, parse_task, save_task, to_text};

use crate::error::Result;

/// Hamilton A and B with graphs of up to four nodes.
pub fn hamilton_suite(seed: u64, n_examples: usize) -> Result<Vec<BenchTask>> {
    [Variant::A, Variant::B]
        .into_iter()
        .map(|v| {
            Ok(BenchTask {
                name: format!("hamilton_{}", if v == Variant::A { "a" } else { "b" }),
                task: gen_hamilton(4, n_examples, n_examples, v, seed)?,
                probe: None,
            })
        })
        .collect()
}

/// Journey tasks with a growing number of orderings, each scored on
/// held-out pairs.
pub fn journey_suite(seed: u64, sizes: &[usize], equality_fraction: f64, cfg: &JourneyConfig) -> Result<Vec<BenchTask>> {
    sizes
        .iter()
        .map(|&n| {
            let jt = gen_journey(n, equality_fraction, seed, cfg)?;
            Ok(BenchTask {
                name: format!("journey_{n}"),
                task: jt.task,
                probe: Some(AccuracyProbe {
                    pairs: journey::test_pairs(200, seed, cfg),
                    truth: jt.truth,
                }),
            })
        })
        .collect()
}
