use std::fs::File;
use std::io::{self, Write};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use asplearn_core::harness::{self, JourneyConfig};
use asplearn_core::learn::LearnMode;
use asplearn_core::meta::{find_relevant_direct, find_relevant_example};
use asplearn_core::solve::true_ids;
use asplearn_core::task::translate_loas;
use asplearn_core::{answer_sets, ground, parse_program, AnswerSet, Error, LearnOptions, Outcome, Program, Solver};

#[derive(Parser)]
#[command(name = "asplearn", version, about = "Learn answer set programs from context-dependent examples")]
struct Cli {
    /// Maximum number of ground atoms per grounding.
    #[arg(long, global = true, env = "ASPLEARN_ATOM_BUDGET", default_value_t = asplearn_core::DEFAULT_ATOM_BUDGET)]
    atom_budget: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the answer sets of a program.
    Solve {
        program: PathBuf,
        /// Stop after this many answer sets (0 means all).
        #[arg(long, default_value_t = 0)]
        max: usize,
    },
    /// Print the ground instantiation of a program.
    Ground { program: PathBuf },
    /// Print the context-free version of a task.
    Translate { task: PathBuf },
    /// Print the first example the hypothesis does not cover.
    FindRelevant {
        task: PathBuf,
        hypothesis: PathBuf,
        /// Check each example directly instead of through the meta program.
        #[arg(long)]
        direct: bool,
    },
    /// Learn an optimal hypothesis.
    Learn {
        task: PathBuf,
        #[arg(long, default_value = "iterative")]
        mode: LearnMode,
        /// Time limit in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        /// Print one line per iteration.
        #[arg(long)]
        trace: bool,
    },
    /// Run a generated benchmark and write CSV rows.
    Bench {
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Time limit per run in seconds.
        #[arg(long, default_value_t = 600.0)]
        timeout: f64,
        /// Positive and negative examples per Hamilton task.
        #[arg(long, default_value_t = 20)]
        examples: usize,
        /// Ordering counts for journey tasks.
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,40")]
        orderings: Vec<usize>,
        /// Fraction of journey orderings that are equalities.
        #[arg(long, default_value_t = 0.0)]
        equality_fraction: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Hamilton,
    Journey,
}

const EXIT_UNSAT: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

fn read_program(path: &Path) -> anyhow::Result<Program> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_program(&text)?)
}

fn load(path: &Path) -> anyhow::Result<asplearn_core::LearningTask> {
    harness::load_task(path).with_context(|| format!("loading {}", path.display()))
}

fn timeout(secs: Option<f64>) -> anyhow::Result<Option<Duration>> {
    secs.map(|s| Duration::try_from_secs_f64(s).context("invalid timeout")).transpose()
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let budget = cli.atom_budget;
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Solve { program, max } => {
            let g = ground(&read_program(&program)?, budget)?;
            let models: Vec<AnswerSet> = if max == 0 {
                answer_sets(&g, 0)?
            } else {
                let mut found = Vec::new();
                Solver::new(&g).solve(&[], |truth| {
                    found.push(true_ids(truth).into_iter().map(|a| g.atom(a).clone()).collect());
                    if found.len() == max {
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                });
                found
            };
            for (i, m) in models.iter().enumerate() {
                let atoms: Vec<String> = m.iter().map(ToString::to_string).collect();
                writeln!(stdout, "Answer {}: {}", i + 1, atoms.join(" "))?;
            }
            if models.is_empty() {
                writeln!(stdout, "UNSATISFIABLE")?;
                return Ok(EXIT_UNSAT);
            }
        }
        Command::Ground { program } => {
            write!(stdout, "{}", ground(&read_program(&program)?, budget)?)?;
        }
        Command::Translate { task } => {
            write!(stdout, "{}", harness::to_text(&translate_loas(&load(&task)?)?))?;
        }
        Command::FindRelevant { task, hypothesis, direct } => {
            let t = load(&task)?;
            let h = read_program(&hypothesis)?;
            t.hypothesis_of(&h)?;
            let found = if direct {
                find_relevant_direct(&t, &h, budget)?
            } else {
                find_relevant_example(&t, &h, budget)?
            };
            match found {
                Some(r) => writeln!(stdout, "{}", t.example_id(r))?,
                None => writeln!(stdout, "none")?,
            }
        }
        Command::Learn { task, mode, timeout: secs, trace } => {
            let t = load(&task)?;
            let opts = LearnOptions {
                atom_budget: budget,
                timeout: timeout(secs)?,
                ..Default::default()
            };
            let result = mode.run(&t, &opts)?;
            if trace {
                for r in &result.stats.trace {
                    eprintln!(
                        "iteration {} relevant {} hypothesis {:?} length {}",
                        r.iteration, r.example, r.hypothesis, r.length
                    );
                }
            }
            match result.outcome {
                Outcome::Hypothesis(h) => {
                    write!(stdout, "{}", h.program(&t.hypothesis_space))?;
                    eprintln!("length {}", h.length);
                }
                Outcome::Unsatisfiable => {
                    writeln!(stdout, "UNSATISFIABLE")?;
                    return Ok(EXIT_UNSAT);
                }
            }
        }
        Command::Bench {
            suite,
            seed,
            out,
            timeout: secs,
            examples,
            orderings,
            equality_fraction,
        } => {
            let tasks = match suite {
                Suite::Hamilton => harness::hamilton_suite(seed, examples)?,
                Suite::Journey => harness::journey_suite(seed, &orderings, equality_fraction, &JourneyConfig::default())?,
            };
            let opts = LearnOptions {
                atom_budget: budget,
                timeout: timeout(Some(secs))?,
                ..Default::default()
            };
            let records = harness::run_bench(&tasks, &LearnMode::ALL, &opts)?;
            match out {
                Some(path) => {
                    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    harness::write_csv(&records, file)?;
                }
                None => harness::write_csv(&records, &mut stdout)?,
            }
        }
    }
    Ok(0)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::AtomBudgetExceeded { .. } | Error::ModelBudgetExceeded { .. } | Error::Timeout) => EXIT_BUDGET,
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
