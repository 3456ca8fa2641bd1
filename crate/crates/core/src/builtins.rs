//! Metrics shipped with the binary.

use std::path::Path;

use crate::dsl::{parse_metric, MetricSpec};
use crate::error::{FinslerError, Result};

const FILES: [(&str, &str); 4] = [
    (
        "riem-hyperbolic",
        include_str!("../metrics/riem-hyperbolic.metric"),
    ),
    ("ex1", include_str!("../metrics/ex1.metric")),
    ("ex2", include_str!("../metrics/ex2.metric")),
    ("ex3", include_str!("../metrics/ex3.metric")),
];

/// Largest dimension accepted for `euclid<n>`.
pub const MAX_EUCLID_DIM: usize = 16;

fn euclid_source(n: usize) -> String {
    let sum: Vec<String> = (1..=n).map(|i| format!("y{i}^2")).collect();
    format!(
        "name: euclid{n}\ndescription: Euclidean space of dimension {n}\ndim = {n}\nE = {}\n",
        sum.join(" + ")
    )
}

/// Source text of a built-in metric.
pub fn source(name: &str) -> Option<String> {
    if let Some(rest) = name.strip_prefix("euclid") {
        let n: usize = rest.parse().ok()?;
        return (1..=MAX_EUCLID_DIM).contains(&n).then(|| euclid_source(n));
    }
    FILES
        .iter()
        .find(|(k, _)| *k == name)
        .map(|(_, s)| s.to_string())
}

pub fn builtin(name: &str) -> Option<MetricSpec> {
    source(name).map(|s| parse_metric(&s).expect("built-in metric parses"))
}

/// Names usable with `builtin`, with `euclid<n>` shown as `euclid3`.
pub fn names() -> Vec<&'static str> {
    let mut v = vec!["euclid3"];
    v.extend(FILES.iter().map(|(k, _)| *k));
    v
}

/// Resolves a built-in name, falling back to reading a metric file.
pub fn load(source_or_path: &str) -> Result<MetricSpec> {
    if let Some(m) = builtin(source_or_path) {
        return Ok(m);
    }
    let path = Path::new(source_or_path);
    if !path.exists() {
        return Err(FinslerError::InvalidArgument(format!(
            "`{source_or_path}` is neither a built-in metric ({}, euclid<n>) nor a readable file",
            names().join(", ")
        )));
    }
    let text = std::fs::read_to_string(path)?;
    Ok(parse_metric(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::PointState;

    #[test]
    fn all_builtins_parse() {
        for name in names() {
            let m = builtin(name).unwrap();
            assert_eq!(m.name.as_deref(), Some(name));
        }
        assert_eq!(builtin("euclid5").unwrap().dim, 5);
        assert!(builtin("euclid0").is_none());
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn euclid_energy() {
        let m = builtin("euclid2").unwrap();
        assert_eq!(
            m.eval_scalar(&PointState::new(vec![0.0; 2], vec![3.0, 4.0]))
                .unwrap(),
            25.0
        );
    }

    #[test]
    fn unknown_source_is_invalid_argument() {
        assert!(matches!(
            load("/nonexistent/file.metric"),
            Err(FinslerError::InvalidArgument(_))
        ));
    }
}
