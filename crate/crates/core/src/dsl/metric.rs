use std::fmt;

use serde::Serialize;

use super::expr::{BinOp, EvalError, Expr};
use super::parser::{parse_expr_at, parse_relation_at, CmpOp, ParseError, ParseErrorKind};
use crate::error::{FinslerError, Result};
use crate::jet::{Jet, JetSpace, Orders, Var};
use crate::sampling;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Definition {
    /// The expression is the Finsler norm F; E = F².
    Finsler,
    /// The expression is the energy E itself.
    Energy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

impl Constraint {
    /// `lhs - rhs` at the point.
    pub fn margin(&self, x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
        Ok(self.lhs.eval(x, y)? - self.rhs.eval(x, y)?)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op, self.rhs)
    }
}

/// Box and extra conditions used to draw random points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub x: Vec<(f64, f64)>,
    pub y: Vec<(f64, f64)>,
    pub extra: Vec<Constraint>,
}

impl SampleBox {
    pub fn default_for(dim: usize) -> SampleBox {
        SampleBox {
            x: vec![(-1.0, 1.0); dim],
            y: vec![(0.5, 2.0); dim],
            extra: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub dim: usize,
    pub definition: Definition,
    /// The expression as written (F or E according to `definition`).
    pub expr: Expr,
    /// The energy used by every computation.
    pub energy: Expr,
    pub constraints: Vec<Constraint>,
    pub name: Option<String>,
    pub description: Option<String>,
    pub sampling: SampleBox,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PointState {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        PointState { x, y }
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    /// Same base point, fiber coordinates multiplied by `lambda`.
    pub fn scale_y(&self, lambda: f64) -> PointState {
        PointState {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * lambda).collect(),
        }
    }

    /// Parses `"x=a,b,…;y=c,d,…"`.
    pub fn parse(s: &str, dim: usize) -> Result<PointState> {
        let bad = |m: String| FinslerError::InvalidArgument(format!("point `{s}`: {m}"));
        let mut x = None;
        let mut y = None;
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, vals) = part
                .split_once('=')
                .ok_or_else(|| bad("expected `x=…;y=…`".into()))?;
            let vals = vals
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("malformed number `{}`", v.trim())))
                })
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != dim {
                return Err(bad(format!(
                    "`{}` has {} entries, dimension is {dim}",
                    key.trim(),
                    vals.len()
                )));
            }
            match key.trim() {
                "x" => x = Some(vals),
                "y" => y = Some(vals),
                k => return Err(bad(format!("unknown coordinate group `{k}`"))),
            }
        }
        match (x, y) {
            (Some(x), Some(y)) => Ok(PointState { x, y }),
            _ => Err(bad("both x and y are required".into())),
        }
    }
}

impl fmt::Display for PointState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| {
            v.iter()
                .map(|c| format!("{c}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "x={};y={}", join(&self.x), join(&self.y))
    }
}

struct Line<'a> {
    number: usize,
    key: &'a str,
    value: &'a str,
    col: usize,
}

fn split_line(raw: &str, number: usize) -> Result<Option<Line<'_>>, ParseError> {
    let content = raw.split('#').next().unwrap_or("");
    if content.trim().is_empty() {
        return Ok(None);
    }
    let sep = content.find([':', '=']).ok_or_else(|| {
        let col = content.chars().take_while(|c| c.is_whitespace()).count() + 1;
        ParseError::new(
            number,
            col,
            ParseErrorKind::Syntax("expected `key = value` or `key: value`".into()),
        )
    })?;
    let key = content[..sep].trim();
    let rest = &content[sep + 1..];
    let lead = rest.len() - rest.trim_start().len();
    let value = rest.trim();
    let col = content[..sep + 1 + lead].chars().count() + 1;
    Ok(Some(Line {
        number,
        key,
        value,
        col,
    }))
}

fn parse_range(text: &str) -> Option<(f64, f64)> {
    let (lo, hi) = text.split_once(':')?;
    let (lo, hi) = (
        lo.trim().parse::<f64>().ok()?,
        hi.trim().parse::<f64>().ok()?,
    );
    (lo.is_finite() && hi.is_finite() && lo <= hi).then_some((lo, hi))
}

impl MetricSpec {
    /// Parses the line-oriented metric format:
    ///
    /// ```text
    /// dim = 2
    /// F = sqrt(y1^2 + exp(2*x1)*y2^2)   # or E = …
    /// domain: y1 != 0
    /// name: hyperbolic
    /// sample: x1 = -1:1                  # random-point box per coordinate
    /// sample-if: y1 > 0.1                # extra condition for random points
    /// ```
    pub fn parse(text: &str) -> Result<MetricSpec, ParseError> {
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            if let Some(l) = split_line(raw, i + 1)? {
                lines.push(l);
            }
        }

        let mut dim = None;
        for l in lines.iter().filter(|l| l.key == "dim") {
            if dim.is_some() {
                return Err(ParseError::new(
                    l.number,
                    1,
                    ParseErrorKind::Invalid("duplicate `dim` declaration".into()),
                ));
            }
            match l.value.parse::<usize>() {
                Ok(d) if d > 0 => dim = Some(d),
                _ => {
                    return Err(ParseError::new(
                        l.number,
                        l.col,
                        ParseErrorKind::Syntax(format!(
                            "`dim` must be a positive integer, got `{}`",
                            l.value
                        )),
                    ))
                }
            }
        }
        let dim = dim.ok_or_else(|| ParseError::new(1, 1, ParseErrorKind::Missing("dim")))?;

        let mut definition = None;
        let mut constraints = Vec::new();
        let mut sampling = SampleBox::default_for(dim);
        let (mut name, mut description) = (None, None);
        for l in &lines {
            match l.key {
                "dim" => {}
                "F" | "E" => {
                    if definition.is_some() {
                        return Err(ParseError::new(
                            l.number,
                            1,
                            ParseErrorKind::Invalid(
                                "more than one `F =` / `E =` definition".into(),
                            ),
                        ));
                    }
                    let kind = if l.key == "F" {
                        Definition::Finsler
                    } else {
                        Definition::Energy
                    };
                    definition = Some((kind, parse_expr_at(l.value, dim, l.number, l.col)?));
                }
                "domain" | "sample-if" => {
                    let (lhs, op, rhs) = parse_relation_at(l.value, dim, l.number, l.col)?;
                    let c = Constraint { lhs, op, rhs };
                    if l.key == "domain" {
                        constraints.push(c);
                    } else {
                        sampling.extra.push(c);
                    }
                }
                "sample" => {
                    let bad = || {
                        ParseError::new(
                            l.number,
                            l.col,
                            ParseErrorKind::Syntax(
                                "expected `sample: <variable> = <lo>:<hi>`".into(),
                            ),
                        )
                    };
                    let (var, range) = l.value.split_once('=').ok_or_else(bad)?;
                    let var = match parse_expr_at(var.trim(), dim, l.number, l.col)? {
                        Expr::Var(v) => v,
                        _ => return Err(bad()),
                    };
                    let range = parse_range(range).ok_or_else(bad)?;
                    match var {
                        Var::X(i) => sampling.x[i] = range,
                        Var::Y(i) => sampling.y[i] = range,
                    }
                }
                "name" => name = Some(l.value.to_string()),
                "description" => description = Some(l.value.to_string()),
                other => {
                    return Err(ParseError::new(
                        l.number,
                        1,
                        ParseErrorKind::Syntax(format!("unrecognized declaration `{other}`")),
                    ))
                }
            }
        }
        let (definition, expr) = definition
            .ok_or_else(|| ParseError::new(1, 1, ParseErrorKind::Missing("F = / E =")))?;
        let energy = match definition {
            Definition::Energy => expr.clone(),
            Definition::Finsler => square(&expr),
        };
        Ok(MetricSpec {
            dim,
            definition,
            expr,
            energy,
            constraints,
            name,
            description,
            sampling,
        })
    }

    /// Checks dimensions, finiteness, `y ≠ 0` and every domain constraint.
    pub fn check_point(&self, p: &PointState) -> Result<()> {
        if p.x.len() != self.dim || p.y.len() != self.dim {
            return Err(FinslerError::InvalidArgument(format!(
                "point has dimensions ({}, {}), metric dimension is {}",
                p.x.len(),
                p.y.len(),
                self.dim
            )));
        }
        if p.x.iter().chain(&p.y).any(|v| !v.is_finite()) {
            return Err(FinslerError::InvalidArgument(format!(
                "point {p} has non-finite coordinates"
            )));
        }
        if p.y.iter().all(|&v| v == 0.0) {
            return Err(FinslerError::Domain(format!(
                "point {p} lies on the zero section"
            )));
        }
        for c in &self.constraints {
            let m = c.margin(&p.x, &p.y)?;
            if !c.op.holds(m) {
                return Err(FinslerError::Domain(format!(
                    "constraint `{c}` violated at {p}"
                )));
            }
        }
        Ok(())
    }

    /// Smallest |lhs − rhs| over the domain constraints (infinite if none).
    pub fn boundary_distance(&self, p: &PointState) -> Result<f64> {
        let mut d = f64::INFINITY;
        for c in &self.constraints {
            d = d.min(c.margin(&p.x, &p.y)?.abs());
        }
        Ok(d)
    }

    /// E at an in-domain point.
    pub fn eval_scalar(&self, p: &PointState) -> Result<f64> {
        self.check_point(p)?;
        Ok(self.energy.eval(&p.x, &p.y)?)
    }

    /// E without domain checks (evaluation failures still surface).
    pub fn energy_at(&self, x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
        self.energy.eval(x, y)
    }

    /// Truncated Taylor expansion of E around the point.
    pub fn eval_jet(&self, p: &PointState, orders: Orders) -> Result<Jet> {
        self.check_point(p)?;
        let space = JetSpace::get(self.dim, orders);
        let seed = |v: Var, value: f64, cap: usize| -> Result<Jet> {
            if cap == 0 {
                Ok(Jet::constant(&space, value))
            } else {
                Ok(Jet::variable(&space, v, value)?)
            }
        };
        let x = (0..self.dim)
            .map(|i| seed(Var::X(i), p.x[i], orders.dx))
            .collect::<Result<Vec<_>>>()?;
        let y = (0..self.dim)
            .map(|i| seed(Var::Y(i), p.y[i], orders.dy))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.energy.eval(&x, &y)?)
    }

    /// Numerical 2-homogeneity and positivity of E at random in-domain points.
    pub fn check_homogeneity(
        &self,
        sample_count: usize,
        seed: u64,
        tol: f64,
    ) -> Result<HomogeneityReport> {
        if sample_count == 0 {
            return Err(FinslerError::InvalidArgument(
                "sample count must be at least 1".into(),
            ));
        }
        let points = sampling::sample_points(self, sample_count, seed)?;
        let mut checks = Vec::new();
        for p in &points {
            let e = self.energy_at(&p.x, &p.y)?;
            for lambda in [0.5, 2.0, 3.0] {
                let expected = lambda * lambda * e;
                let scaled = p.scale_y(lambda);
                let (actual, residual) = match self.energy_at(&scaled.x, &scaled.y) {
                    Ok(v) => (
                        Some(v),
                        (v - expected).abs() / expected.abs().max(f64::MIN_POSITIVE),
                    ),
                    Err(_) => (None, f64::INFINITY),
                };
                checks.push(HomogeneityCheck {
                    point: p.clone(),
                    lambda,
                    energy: e,
                    scaled_energy: actual,
                    residual,
                    passed: residual <= tol && e > 0.0,
                });
            }
        }
        let max_residual = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
        let passed = checks.iter().all(|c| c.passed);
        Ok(HomogeneityReport {
            tolerance: tol,
            max_residual,
            passed,
            checks,
        })
    }
}

/// `F²`, folding `(b^r)^2` into `b^(2r)` when `r` is a non-integer constant.
fn square(f: &Expr) -> Expr {
    if let Expr::Binary(BinOp::Pow, base, e) = f {
        if e.is_constant() {
            if let Ok(r) = e.eval::<f64>(&[], &[0.0]) {
                if (2.0 * r).fract() != 0.0 {
                    return Expr::binary(BinOp::Pow, (**base).clone(), Expr::Const(2.0 * r));
                }
            }
        }
    }
    Expr::binary(BinOp::Pow, f.clone(), Expr::Const(2.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct HomogeneityCheck {
    pub point: PointState,
    pub lambda: f64,
    pub energy: f64,
    pub scaled_energy: Option<f64>,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomogeneityReport {
    pub tolerance: f64,
    pub max_residual: f64,
    pub passed: bool,
    pub checks: Vec<HomogeneityCheck>,
}

impl HomogeneityReport {
    pub fn violations(&self) -> impl Iterator<Item = &HomogeneityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}
