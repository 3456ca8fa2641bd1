//! Text front end for metric definitions.

mod expr;
mod metric;
mod parser;

pub use expr::{BinOp, EvalError, Expr, Func, Scalar};
pub use metric::{
    Constraint, Definition, HomogeneityCheck, HomogeneityReport, MetricSpec, PointState, SampleBox,
};
pub use parser::{parse_expr, parse_expr_at, parse_relation_at, CmpOp, ParseError, ParseErrorKind};

/// Parses a metric file.
pub fn parse_metric(text: &str) -> Result<MetricSpec, ParseError> {
    MetricSpec::parse(text)
}
