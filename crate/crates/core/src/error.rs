use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("component count mismatch: expected {expected}, got {actual}")]
    ComponentMismatch { expected: usize, actual: usize },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("charge C_{index} = {value} is not strictly positive")]
    NonPositiveCharge { index: usize, value: f64 },

    #[error("component {index} collapsed: |u|^2 = {norm_sq:e} below floor {floor:e}")]
    ComponentCollapse {
        index: usize,
        norm_sq: f64,
        floor: f64,
    },

    #[error("profile support r + 1 = {extent} does not fit inside r_max = {r_max}")]
    SupportExceedsGrid { extent: f64, r_max: f64 },

    #[error("negative or non-finite value {value} at node {index}; rearrangement needs |u|")]
    NegativeProfile { index: usize, value: f64 },

    #[error("sample budget exceeded: {requested} lattice points (limit {limit})")]
    SampleBudget { requested: u128, limit: u128 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
