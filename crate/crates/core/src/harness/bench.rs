//! Benchmark runs and their CSV rows.

use std::io::Write;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::learn::{LearnMode, LearnOptions};
use crate::syntax::Program;
use crate::task::LearningTask;

use super::journey::{evaluate_accuracy, Journey};

/// Held-out pairs and the program that labels them.
#[derive(Clone, Debug)]
pub struct AccuracyProbe {
    pub truth: Program,
    pub pairs: Vec<(Journey, Journey)>,
}

#[derive(Clone, Debug)]
pub struct BenchTask {
    pub name: String,
    pub task: LearningTask,
    pub probe: Option<AccuracyProbe>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub task: String,
    pub variant: LearnMode,
    pub positives: usize,
    pub negatives: usize,
    pub brave: usize,
    pub cautious: usize,
    /// `None` when the run timed out.
    pub time: Option<Duration>,
    pub peak_ground_atoms: usize,
    pub relevant_size: usize,
    pub length: Option<usize>,
    pub accuracy: Option<f64>,
}

pub const CSV_HEADER: [&str; 11] = [
    "task",
    "variant",
    "pos",
    "neg",
    "brave",
    "cautious",
    "time_s",
    "peak_ground_atoms",
    "relevant_size",
    "length",
    "accuracy",
];

impl BenchRecord {
    pub fn timed_out(&self) -> bool {
        self.time.is_none()
    }

    fn fields(&self) -> Vec<String> {
        let to = || "TO".to_string();
        let blank = String::new;
        vec![
            self.task.clone(),
            self.variant.name().to_string(),
            self.positives.to_string(),
            self.negatives.to_string(),
            self.brave.to_string(),
            self.cautious.to_string(),
            self.time.map_or_else(to, |t| format!("{:.3}", t.as_secs_f64())),
            if self.timed_out() { to() } else { self.peak_ground_atoms.to_string() },
            if self.timed_out() { to() } else { self.relevant_size.to_string() },
            match (self.timed_out(), self.length) {
                (true, _) => to(),
                (false, Some(l)) => l.to_string(),
                (false, None) => "UNSAT".to_string(),
            },
            self.accuracy.map_or_else(blank, |a| format!("{a:.4}")),
        ]
    }
}

/// Runs every task under every mode, in task-major order.
pub fn run_bench(tasks: &[BenchTask], modes: &[LearnMode], opts: &LearnOptions) -> Result<Vec<BenchRecord>> {
    let mut records = Vec::new();
    for bt in tasks {
        for &mode in modes {
            let t = &bt.task;
            let mut record = BenchRecord {
                task: bt.name.clone(),
                variant: mode,
                positives: t.positives.len(),
                negatives: t.negatives.len(),
                brave: t.brave_orderings.len(),
                cautious: t.cautious_orderings.len(),
                time: None,
                peak_ground_atoms: 0,
                relevant_size: 0,
                length: None,
                accuracy: None,
            };
            match mode.run(t, opts) {
                Ok(result) => {
                    let s = &result.stats;
                    record.time = Some(s.wall_time);
                    record.peak_ground_atoms = s.peak_ground_atoms;
                    record.relevant_size = s.relevant_size;
                    if let Some(h) = result.hypothesis() {
                        record.length = Some(h.length);
                        if let Some(probe) = &bt.probe {
                            let learned = h.program(&t.hypothesis_space);
                            record.accuracy = Some(evaluate_accuracy(&learned, &probe.truth, &probe.pairs)?);
                        }
                    }
                }
                Err(Error::Timeout) => {}
                Err(e) => return Err(e),
            }
            records.push(record);
        }
    }
    Ok(records)
}

pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn tiny(name: &str) -> BenchTask {
        let mut t = LearningTask::new(Program::default(), parse_program("p. q.").unwrap().rules);
        t.add_positive(crate::task::Cdpi::new(
            "a",
            crate::solve::PartialInterpretation::new(["p".parse().unwrap()], []),
            Program::default(),
        ));
        BenchTask {
            name: name.into(),
            task: t,
            probe: None,
        }
    }

    #[test]
    fn one_row_per_task_and_variant() {
        let records = run_bench(&[tiny("x"), tiny("y")], &LearnMode::ALL, &LearnOptions::default()).unwrap();
        assert_eq!(records.len(), 6);
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("task,variant,"));
    }

    #[test]
    fn timeout_marker() {
        let opts = LearnOptions {
            timeout: Some(Duration::ZERO),
            ..Default::default()
        };
        let records = run_bench(&[tiny("x")], &[LearnMode::Batch], &opts).unwrap();
        assert!(records[0].timed_out());
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let row = String::from_utf8(buf).unwrap().lines().nth(1).unwrap().to_string();
        assert_eq!(row, "x,batch,1,0,0,0,TO,TO,TO,TO,");
    }
}
