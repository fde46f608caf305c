use std::fmt;

/// Pipeline stage an error comes from. Every error printed by the CLI
/// carries one of these tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Parse,
    Validate,
    Flatten,
    Fr,
    Unroll,
    Props,
    Emit,
    Solve,
    Witness,
}

impl Stage {
    pub fn tag(self) -> &'static str {
        match self {
            Stage::Parse => "parse",
            Stage::Validate => "validate",
            Stage::Flatten => "flatten",
            Stage::Fr => "fr",
            Stage::Unroll => "unroll",
            Stage::Props => "props",
            Stage::Emit => "emit",
            Stage::Solve => "solve",
            Stage::Witness => "witness",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {message}")]
pub struct CliError {
    pub stage: Stage,
    pub message: String,
}

impl CliError {
    pub fn new(stage: Stage, message: impl fmt::Display) -> Self {
        CliError { stage, message: message.to_string() }
    }

    /// Maps any displayable error to a tagged one.
    pub fn at<E: fmt::Display>(stage: Stage) -> impl FnOnce(E) -> Self {
        move |e| CliError::new(stage, e)
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
