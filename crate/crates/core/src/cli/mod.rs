//! Command-line front end: JSON problem files in, result documents out.

mod document;
pub mod expr;
mod run;
mod spec;

use thiserror::Error;

use crate::error::Error;

pub use document::{Certificate, Format, ResultDocument, Table};
pub use run::{run, RunOptions};
pub use spec::{
    parse_spec, render_spec, ControlSpec, DissipativeSpec, El2dSpec, ExtremalSpec, GreenSpec,
    NoetherSpec, OperatorSpec, ProblemSpec, SideSpec, TerminalSpec,
};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for malformed or inconsistent problem files.
pub const EXIT_SPEC: i32 = 2;
/// Exit status for numerical failures and failed certificates.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit status for violated hypotheses.
pub const EXIT_HYPOTHESIS: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("unknown identifier `{name}` in `{expression}`")]
    UnknownIdentifier { name: String, expression: String },
    #[error("cannot parse `{expression}` at column {column}: {message}")]
    Expression {
        expression: String,
        column: usize,
        message: String,
    },
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("{kind}: {source}")]
    Module {
        kind: &'static str,
        #[source]
        source: Error,
    },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Module { source, .. } => module_exit_code(source),
            _ => EXIT_SPEC,
        }
    }
}

fn module_exit_code(e: &Error) -> i32 {
    if e.is_numerical_failure() {
        return EXIT_NUMERICAL;
    }
    match e {
        Error::HypothesisViolated(_)
        | Error::BoundaryConditionViolated(_)
        | Error::ForceEquationViolated(_)
        | Error::NotAnExtremal(_)
        | Error::NotCertified(_)
        | Error::SingularLagrangian(_)
        | Error::StationarityUnsolvable(_) => EXIT_HYPOTHESIS,
        _ => EXIT_SPEC,
    }
}

/// The subcommands, one per problem kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Deriv,
    Integrate,
    Extremal,
    Dubois,
    NoetherCheck,
    Control,
    DissipativeDemo,
    GreenCheck,
    El2dCheck,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::Deriv,
        Kind::Integrate,
        Kind::Extremal,
        Kind::Dubois,
        Kind::NoetherCheck,
        Kind::Control,
        Kind::DissipativeDemo,
        Kind::GreenCheck,
        Kind::El2dCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Deriv => "deriv",
            Kind::Integrate => "integrate",
            Kind::Extremal => "extremal",
            Kind::Dubois => "dubois",
            Kind::NoetherCheck => "noether-check",
            Kind::Control => "control",
            Kind::DissipativeDemo => "dissipative-demo",
            Kind::GreenCheck => "green-check",
            Kind::El2dCheck => "el2d-check",
        }
    }
}
