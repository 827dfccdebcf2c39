//! File formats, reports and the command-line front end for `pencilscope-core`.
pub mod output;
pub mod problem;
pub mod random;
pub mod report;
pub mod sweep;

pub use problem::{load_problem, parse_problem, LoadError, LoadedProblem, Problem, ProblemFile};
pub use report::{run, Command, Options, Outcome, RunError};
