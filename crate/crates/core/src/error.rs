use alloc::string::String;

/// Violations of the problem-model contract.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("contract violation: {0}")]
    Contract(&'static str),
    #[error("unknown mode {0}")]
    UnknownMode(u16),
    #[error("control {value} out of bounds on axis {axis}")]
    ControlOutOfBounds { axis: usize, value: f64 },
    #[error("unknown switch: {0}")]
    UnknownSwitch(String),
}

/// Errors raised while building or querying local cost-to-go tables.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LocalError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("progress assumption violated at sampled state {index}: {state:?}")]
    NoProgress { index: usize, state: alloc::vec::Vec<f64> },
    #[error("oracle instance too large: {0}")]
    TooLarge(&'static str),
}

/// Errors raised by the global planner.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("no cost-to-go table for mode {0}")]
    MissingTable(u16),
    #[error("invalid horizon distribution: {0}")]
    BadHorizon(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("invalid executive configuration: {0}")]
    Config(&'static str),
}
