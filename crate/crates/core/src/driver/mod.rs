//! Experiment orchestration: configuration, the adaptive loop, the
//! invariant suite and the enrichment experiments.

pub mod adaptive;
pub mod config;
pub mod conjecture;
pub mod stock;
pub mod verify;

pub use adaptive::{convergence_csv, run_adaptive, solve_step, IterationRecord, RunOutput, CONVERGENCE_HEADER};
pub use config::{ExperimentConfig, MarkingQuantity, Mode, SolverKind};
pub use conjecture::{run_conjecture, ConjectureRow, ConjectureTable};
pub use stock::{stock_problem, STOCK_NAMES};
pub use verify::{run_verify, Status, VerifyReport};
