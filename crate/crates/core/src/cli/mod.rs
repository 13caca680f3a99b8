//! Problem files, engine dispatch and output.

pub mod expr;
pub mod problem;
pub mod run;

pub use expr::{format_expression, parse_expression, ExprError, ExprErrorKind};
pub use problem::{parse_problem, Engine, Problem, ProblemFile};
pub use run::{emit, run, Format, OracleReport, ResultDocument, RunOptions};

use crate::correlator::CorrelatorError;
use crate::fock::FockError;
use crate::genfun::GenfunError;
use crate::perturb::PerturbError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("problem file line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("correlator expression, {0}")]
    Expression(#[from] ExprError),
    #[error("invalid problem: {0}")]
    Semantic(String),
    #[error(transparent)]
    Correlator(#[from] CorrelatorError),
    #[error("generating functional: {0}")]
    Genfun(#[from] GenfunError),
    #[error("vertex: {0}")]
    Perturb(#[from] PerturbError),
    #[error("oracle: {0}")]
    Fock(#[from] FockError),
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CROSS_CHECK: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Fock(FockError::DimensionLimit { .. }) => EXIT_RESOURCE,
            _ => EXIT_USAGE,
        }
    }
}
