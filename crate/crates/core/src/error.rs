use thiserror::Error;

use crate::dsl::{EvalError, ParseError};
use crate::jet::{JetError, Orders};

#[derive(Debug, Error)]
pub enum FinslerError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("degenerate metric: {0}")]
    Degenerate(String),
    #[error("insufficient orders: {what} needs jet orders {required}, have {available}")]
    InsufficientOrders {
        what: String,
        required: Orders,
        available: Orders,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = FinslerError> = std::result::Result<T, E>;

impl FinslerError {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            FinslerError::Parse(_) | FinslerError::InvalidArgument(_) | FinslerError::Io(_) => 2,
            FinslerError::Domain(_) => 3,
            FinslerError::Degenerate(_) => 4,
            FinslerError::InsufficientOrders { .. } => 5,
        }
    }
}

impl From<EvalError> for FinslerError {
    fn from(e: EvalError) -> Self {
        FinslerError::Domain(e.0)
    }
}

impl From<JetError> for FinslerError {
    fn from(e: JetError) -> Self {
        match e {
            JetError::Domain { .. } => FinslerError::Domain(e.to_string()),
            JetError::DegenerateOrder { orders, .. } => FinslerError::InsufficientOrders {
                what: e.to_string(),
                required: Orders::new(orders.dx.max(1), orders.dy.max(1)),
                available: orders,
            },
            JetError::InsufficientOrders {
                x_degree,
                y_degree,
                orders,
            } => FinslerError::InsufficientOrders {
                what: "derivative extraction".into(),
                required: Orders::new(x_degree, y_degree),
                available: orders,
            },
            JetError::VariableOutOfRange { .. } => FinslerError::InvalidArgument(e.to_string()),
        }
    }
}
