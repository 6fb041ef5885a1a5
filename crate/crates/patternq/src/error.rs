use std::fmt;

/// Pipeline stage an error is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Partition,
    Quotient,
    Certify,
    Solve,
    Lift,
    Stability,
    Simulate,
    Render,
    Report,
    Write,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Load => "load",
            Stage::Partition => "partition",
            Stage::Quotient => "quotient",
            Stage::Certify => "certify",
            Stage::Solve => "solve",
            Stage::Lift => "lift",
            Stage::Stability => "stability",
            Stage::Simulate => "simulate",
            Stage::Render => "render",
            Stage::Report => "report",
            Stage::Write => "write",
        }
    }
}

/// An error tagged with the stage that raised it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub stage: Stage,
    pub message: String,
}

impl CliError {
    pub fn new(stage: Stage, message: impl fmt::Display) -> Self {
        Self {
            stage,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage.as_str(), self.message)
    }
}

impl std::error::Error for CliError {}

/// Attaches a stage to any displayable error.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, CliError>;
}

impl<T, E: fmt::Display> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, CliError> {
        self.map_err(|e| CliError::new(stage, e))
    }
}
