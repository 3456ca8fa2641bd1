//! Machine-readable reports: JSON with fixed-precision floats, and CSV.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::dsl::{Definition, MetricSpec, PointState};
use crate::error::{FinslerError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricInfo {
    pub name: Option<String>,
    pub dim: usize,
    /// `F` or `E`: what `expression` defines.
    pub defines: &'static str,
    pub expression: String,
    pub energy: String,
    pub constraints: Vec<String>,
}

impl MetricInfo {
    pub fn new(spec: &MetricSpec) -> MetricInfo {
        MetricInfo {
            name: spec.name.clone(),
            dim: spec.dim,
            defines: match spec.definition {
                Definition::Finsler => "F",
                Definition::Energy => "E",
            },
            expression: spec.expr.to_string(),
            energy: spec.energy.to_string(),
            constraints: spec.constraints.iter().map(|c| c.to_string()).collect(),
        }
    }
}

/// Top-level report object shared by every subcommand. Sections a command
/// does not produce stay empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub metric: Option<MetricInfo>,
    pub points: Vec<PointState>,
    pub tensors: Value,
    pub subspaces: Value,
    pub residuals: Value,
    pub verdicts: Value,
    pub summary: Value,
}

impl Report {
    pub fn new(command: &'static str, spec: Option<&MetricSpec>) -> Report {
        Report {
            command,
            metric: spec.map(MetricInfo::new),
            points: Vec::new(),
            tensors: Value::Object(Map::new()),
            subspaces: Value::Array(Vec::new()),
            residuals: Value::Array(Vec::new()),
            verdicts: Value::Array(Vec::new()),
            summary: Value::Object(Map::new()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut v = to_value(self)?;
        fix_floats(&mut v);
        let mut s = serde_json::to_string_pretty(&v).map_err(json_err)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn json_err(e: serde_json::Error) -> FinslerError {
    FinslerError::Io(std::io::Error::other(e))
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(json_err)
}

/// Float with 17 significant digits and a signed exponent, e.g.
/// `2.7777777777777779e-1` or `5.0000000000000000e+0`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        let s = format!("{v:.16e}");
        match s.split_once('e') {
            Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
            _ => s,
        }
    } else {
        v.to_string()
    }
}

fn fix_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(f) = n.as_f64() {
                *n = format_float(f)
                    .parse::<Number>()
                    .expect("formatted float is a JSON number");
            }
        }
        Value::Array(a) => a.iter_mut().for_each(fix_floats),
        Value::Object(o) => o.values_mut().for_each(fix_floats),
        _ => {}
    }
}

/// Writes a CSV table with a header row.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| FinslerError::Io(std::io::Error::other(e));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| FinslerError::Io(e.into_error()))?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

/// Space-separated floats with 17 significant digits each.
pub fn join_floats(v: &[f64]) -> String {
    v.iter()
        .map(|x| format_float(*x))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::builtin;

    #[test]
    fn floats_have_seventeen_digits() {
        let mut r = Report::new("test", None);
        r.summary = serde_json::json!({"a": 5.0 / 18.0, "n": 3, "z": 0.0});
        let s = r.to_json().unwrap();
        assert!(s.contains("\"a\": 2.7777777777777779e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("\"z\": 0.0000000000000000e+0"), "{s}");
    }

    #[test]
    fn metric_info() {
        let m = builtin("riem-hyperbolic").unwrap();
        let info = MetricInfo::new(&m);
        assert_eq!((info.dim, info.defines), (2, "E"));
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &["a", "b"], &[vec!["1".into(), "x,y".into()]]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a,b\n1,\"x,y\"\n");
    }
}
