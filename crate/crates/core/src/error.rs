use thiserror::Error;

/// Errors raised by the message algebra, the engine and the model builders.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VmpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric positive definite ({context}); condition estimate {condition:.3e}")]
    NotSpd { context: String, condition: f64 },

    #[error("invalid {field}: {reason}")]
    Domain { field: &'static str, reason: String },

    #[error("improper {family} parameter: {reason}")]
    Improper { family: String, reason: String },

    #[error("numeric failure in {context}: {reason}")]
    Numeric { context: String, reason: String },

    #[error("linear predictor {value:.1} exceeds overflow cap {cap}; consider damping")]
    Overflow { value: f64, cap: f64 },

    #[error("graph error: {0}")]
    Graph(String),

    #[error("factor '{factor}': {source}")]
    InFactor {
        factor: String,
        #[source]
        source: Box<VmpError>,
    },

    #[error("node '{node}': {source}")]
    InNode {
        node: String,
        #[source]
        source: Box<VmpError>,
    },
}

impl VmpError {
    pub fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        VmpError::Domain { field, reason: reason.into() }
    }

    pub fn improper(family: impl Into<String>, reason: impl Into<String>) -> Self {
        VmpError::Improper { family: family.into(), reason: reason.into() }
    }

    pub fn numeric(context: impl Into<String>, reason: impl Into<String>) -> Self {
        VmpError::Numeric { context: context.into(), reason: reason.into() }
    }

    pub fn in_factor(self, factor: &str) -> Self {
        VmpError::InFactor { factor: factor.to_string(), source: Box::new(self) }
    }

    pub fn in_node(self, node: &str) -> Self {
        VmpError::InNode { node: node.to_string(), source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, VmpError>;
