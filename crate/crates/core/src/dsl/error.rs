use thiserror::Error;

/// Diagnostics produced while reading or validating a model file.
///
/// Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("line {line}, column {column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: invalid species `{name}`: {message}")]
    InvalidSpecies {
        line: usize,
        name: String,
        message: String,
    },

    #[error("line {line}: species `{name}` declared twice")]
    DuplicateSpecies { line: usize, name: String },

    #[error("line {line}: reaction id `{id}` declared twice")]
    DuplicateReaction { line: usize, id: String },

    #[error("line {line}: reaction `{reaction}` references undeclared species `{species}`")]
    UndeclaredSpecies {
        line: usize,
        reaction: String,
        species: String,
    },

    #[error(
        "line {line}: reaction `{reaction}` is element-unbalanced: {element} {left} on the left, {right} on the right"
    )]
    ElementUnbalanced {
        line: usize,
        reaction: String,
        element: String,
        left: u64,
        right: u64,
    },

    #[error(
        "line {line}: reaction `{reaction}` is charge-unbalanced: {left:+} on the left, {right:+} on the right"
    )]
    ChargeUnbalanced {
        line: usize,
        reaction: String,
        left: i64,
        right: i64,
    },

    #[error("line {line}: reaction `{reaction}` has an invalid rate constant: {message}")]
    InvalidRate {
        line: usize,
        reaction: String,
        message: String,
    },

    #[error("line {line}: reaction `{reaction}`: {message}")]
    ArrowMismatch {
        line: usize,
        reaction: String,
        message: String,
    },
}

impl ModelError {
    pub fn line(&self) -> usize {
        match *self {
            ModelError::Syntax { line, .. }
            | ModelError::InvalidSpecies { line, .. }
            | ModelError::DuplicateSpecies { line, .. }
            | ModelError::DuplicateReaction { line, .. }
            | ModelError::UndeclaredSpecies { line, .. }
            | ModelError::ElementUnbalanced { line, .. }
            | ModelError::ChargeUnbalanced { line, .. }
            | ModelError::InvalidRate { line, .. }
            | ModelError::ArrowMismatch { line, .. } => line,
        }
    }
}
