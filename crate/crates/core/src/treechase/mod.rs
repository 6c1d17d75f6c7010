//! Space-bounded non-deterministic chase for BCQ entailment over arboreous,
//! path-guarded programs, with task-tree guided and exhaustive drivers.

mod guided;
mod runner;
mod search;
mod tasks;


pub use guided::{tree_chase_guided, GuidedError, GuidedOutcome};
pub use runner::{tree_chase_run, Choice, LogEntry, RunOutcome, SpaceProfile, TreeChase, TreeChaseError, RUNNER_NULL_BASE};
pub use search::{tree_chase_search, SearchOutcome, SearchVerdict};
pub use tasks::{atom_path, body_path, build_task_tree, schedule_sequence, TaskPlanner, TaskTree};
