use thiserror::Error;

use crate::dualbenson::ExtremePointSet;
use crate::oracle::OracleError;
use crate::vertexenum::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Iterations(usize),
    Nodes(usize),
}

#[derive(Debug, Error, Clone)]
pub enum SolveError {
    #[error("invalid problem: {}", .0.join("; "))]
    InvalidProblem(Vec<String>),
    #[error("problem is infeasible")]
    Infeasible,
    #[error("no ideal point: {}", match .objective { Some(o) => format!("objective `{o}` is unbounded below"), None => "weighted sum is unbounded below".to_string() })]
    NoIdealPoint { objective: Option<String> },
    #[error("limit reached: {limit:?}")]
    LimitReached {
        limit: Limit,
        partial: Option<Box<ExtremePointSet>>,
    },
    #[error(transparent)]
    Oracle(OracleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<OracleError> for SolveError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::NodeLimitExceeded(n) => SolveError::LimitReached {
                limit: Limit::Nodes(n),
                partial: None,
            },
            other => SolveError::Oracle(other),
        }
    }
}
