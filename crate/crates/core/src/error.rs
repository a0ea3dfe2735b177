use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("constraint {constraint} can never be satisfied")]
    TriviallyUnsat { constraint: usize },
    #[error("coefficient sum exceeds 2^62")]
    Overflow,
    #[error("variable x{var} out of range (instance has {num_vars} variables)")]
    VariableOutOfRange { var: u32, num_vars: usize },
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: nonlinear term not supported")]
    UnsupportedNonlinear { line: usize },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Model {
        line: usize,
        #[source]
        source: ModelError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::UnsupportedNonlinear { line }
            | ParseError::Syntax { line, .. }
            | ParseError::Model { line, .. } => Some(*line),
            ParseError::Io(_) => None,
        }
    }

    /// Constraint proven unsatisfiable while normalizing.
    pub fn is_trivially_unsat(&self) -> bool {
        matches!(
            self,
            ParseError::Model {
                source: ModelError::TriviallyUnsat { .. },
                ..
            }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {num_vars} variables, oracle limit is {limit}")]
    TooLarge { num_vars: usize, limit: usize },
}
