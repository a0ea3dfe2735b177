//! Anytime local search for pseudo-Boolean optimization.
//!
//! The solver starts from an assignment built by improved generalized unit
//! propagation ([`decimation`]) and runs a weighted, score-guided local
//! search ([`engine`]) that, when stuck, repairs either a random falsified
//! constraint or the one that has been falsified most often.

pub mod bench;
pub mod cli;
pub mod decimation;
pub mod engine;
pub mod error;
pub mod gen;
pub mod model;
pub mod opb;
pub mod par;
pub mod verify;

pub use engine::{solve, SolveResult, SolveStats, SolverParams, SolverState};
pub use error::{ModelError, OracleError, ParseError};
pub use model::{Assignment, Literal, Objective, PbConstraint, PboInstance, Term};
pub use opb::{parse_opb, parse_opb_str, write_opb, SolveStatus};
pub use par::Execution;
