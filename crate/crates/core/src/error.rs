use thiserror::Error;

use crate::decompose::DecomposeError;
use crate::logic::LogicError;
use crate::oracle::OracleError;
use crate::polytope::PolytopeError;
use crate::solve::SolveError;
use crate::structures::StructureError;
use crate::types::TypeError;

/// Position-reporting parse failure shared by every text format.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: expected {expected}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
}

/// Umbrella error for the end-to-end pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Types(#[from] TypeError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("{0}")]
    Budget(String),
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("{0}")]
    Input(String),
}

impl Error {
    /// Stable machine-readable error class.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Syntax(_) => "SyntaxError",
            Error::Logic(e) => e.class(),
            Error::Structure(StructureError::TooLarge { .. }) => "TooLarge",
            Error::Structure(StructureError::IncompatibleStructures) => "IncompatibleStructures",
            Error::Structure(_) => "InvalidStructure",
            Error::Types(e) => e.class(),
            Error::Polytope(PolytopeError::EmptyPolytope) => "EmptyPolytope",
            Error::Polytope(PolytopeError::InvalidDecomposition(_) | PolytopeError::NotNice(_)) => {
                "InvalidDecomposition"
            }
            Error::Polytope(_) => "InvalidPolytope",
            Error::Oracle(_) | Error::Budget(_) => "BudgetExceeded",
            Error::Solve(_) => "InputError",
            Error::Decompose(e) => e.class(),
            Error::InvalidDecomposition(_) => "InvalidDecomposition",
            Error::Input(_) => "InputError",
        }
    }
}
