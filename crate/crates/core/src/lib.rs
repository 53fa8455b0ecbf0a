//! Non-dominated extreme points of multi-objective linear and
//! mixed-integer linear programs.
//!
//! The solver works in the dual weight space: it maintains an outer
//! approximation of the lower image by halfspaces and refines it with one
//! weighted-sum solve per vertex until every vertex is confirmed. See
//! [`dualbenson`] for the loop and [`pipeline::solve_problem`] for the
//! end-to-end entry point.

pub mod bench;
pub mod dualbenson;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod parser;
pub mod pipeline;
pub mod preprocess;
pub mod vertexenum;

pub use dualbenson::{EpsilonScale, ExtremePointSet, ReportedPoint, SolveEvent, SolveStats, SolverConfig};
pub use error::{Limit, SolveError};
pub use model::{
    dominates, Constraint, ConstraintSense, Diagnostic, ModelError, Objective, ObjectiveSense, OutcomePoint, Problem,
    QuadraticForm, SignRecord, Variable,
};
pub use oracle::{BallOracle, BuiltinOracle, OracleError, OracleStats, WeightVector, WeightedSumOracle};
pub use pipeline::{solve_problem, solve_problem_observed, Solution, Termination};
pub use preprocess::Scaling;
pub use vertexenum::{DualHalfspace, DualPolyhedron, DualVertex};
