use std::fmt;

use thiserror::Error;

/// Face of the space-time box a cylinder can escape through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    Lower(usize),
    Upper(usize),
    Initial,
    Final,
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const AXES: [&str; 2] = ["x", "y"];
        match self {
            Face::Lower(axis) => write!(f, "lower {} face", AXES[*axis]),
            Face::Upper(axis) => write!(f, "upper {} face", AXES[*axis]),
            Face::Initial => write!(f, "initial time face"),
            Face::Final => write!(f, "final time face"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("node {node} is on the spatial boundary; the stencil needs an interior node")]
    BoundaryNode { node: usize },

    #[error("index out of range: node {node}, level {level}")]
    OutOfRange { node: usize, level: usize },

    #[error("cylinder of radius {radius} escapes the grid through the {face}")]
    CylinderEscapes { face: Face, radius: f64 },

    #[error("non-finite value at node {node}, level {level}")]
    NonFinite { node: usize, level: usize },

    #[error("negative value {value} at node {node}, level {level}")]
    Negative { value: f64, node: usize, level: usize },

    #[error("matrix is not symmetric (off-diagonal entries {0} and {1})")]
    NotSymmetric(f64, f64),

    #[error("point ({x}, {y}) lies outside the coefficient field domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("unknown {kind} preset `{name}`")]
    UnknownPreset { kind: &'static str, name: String },

    #[error("step budget exceeded: run needs {needed} steps, cap is {cap}")]
    StepBudget { needed: u64, cap: u64 },

    #[error("fit needs at least 3 positive values, got {usable} ({dropped} non-positive dropped)")]
    TooFewPoints { usable: usize, dropped: usize },

    #[error("no node qualifies for the measurement: {0}")]
    NoQualifyingNodes(String),

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
