use std::fmt;

use thiserror::Error;

use crate::jet::{Jet, JetError, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Atan,
    Sin,
    Cos,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Atan,
        Func::Sin,
        Func::Cos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct EvalError(pub String);

impl From<JetError> for EvalError {
    fn from(e: JetError) -> Self {
        EvalError(e.to_string())
    }
}

/// Arithmetic the expression evaluator can run over.
pub trait Scalar: Clone {
    /// A constant living in the same arithmetic context as `self`.
    fn lift(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self, EvalError>;
    fn neg(&self) -> Self;
    fn powi(&self, k: i32) -> Result<Self, EvalError>;
    fn powf(&self, r: f64) -> Result<Self, EvalError>;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self, EvalError>;
    fn sqrt(&self) -> Result<Self, EvalError>;
    fn atan(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self, EvalError> {
        if *o == 0.0 {
            return Err(EvalError("division by zero".into()));
        }
        Ok(self / o)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn powi(&self, k: i32) -> Result<Self, EvalError> {
        if k < 0 && *self == 0.0 {
            return Err(EvalError("negative power of zero".into()));
        }
        Ok(f64::powi(*self, k))
    }
    fn powf(&self, r: f64) -> Result<Self, EvalError> {
        if *self <= 0.0 {
            return Err(EvalError(format!(
                "non-integer power {r} of nonpositive base {self}"
            )));
        }
        Ok(f64::powf(*self, r))
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Result<Self, EvalError> {
        if *self <= 0.0 {
            return Err(EvalError(format!("log of nonpositive value {self}")));
        }
        Ok(f64::ln(*self))
    }
    fn sqrt(&self) -> Result<Self, EvalError> {
        if *self < 0.0 {
            return Err(EvalError(format!("sqrt of negative value {self}")));
        }
        Ok(f64::sqrt(*self))
    }
    fn atan(&self) -> Self {
        f64::atan(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
}

impl Scalar for Jet {
    fn lift(&self, c: f64) -> Self {
        Jet::constant(self.space(), c)
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn add(&self, o: &Self) -> Self {
        Jet::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Jet::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Jet::mul(self, o)
    }
    fn div(&self, o: &Self) -> Result<Self, EvalError> {
        Ok(Jet::div(self, o)?)
    }
    fn neg(&self) -> Self {
        Jet::neg(self)
    }
    fn powi(&self, k: i32) -> Result<Self, EvalError> {
        Ok(Jet::powi(self, k)?)
    }
    fn powf(&self, r: f64) -> Result<Self, EvalError> {
        Ok(Jet::powf(self, r)?)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn ln(&self) -> Result<Self, EvalError> {
        Ok(Jet::ln(self)?)
    }
    fn sqrt(&self) -> Result<Self, EvalError> {
        Ok(Jet::sqrt(self)?)
    }
    fn atan(&self) -> Self {
        Jet::atan(self)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
}

/// Largest exponent magnitude evaluated by repeated multiplication.
const MAX_INTEGER_POWER: f64 = 1024.0;

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    /// True if the expression contains no variables.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Largest variable index (1-based) of each group, for range checks.
    pub fn max_index(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(Var::X(i)) | Expr::Var(Var::Y(i)) => i + 1,
            Expr::Neg(a) | Expr::Call(_, a) => a.max_index(),
            Expr::Binary(_, a, b) => a.max_index().max(b.max_index()),
        }
    }

    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(Var::Y(_)) => false,
            Expr::Var(Var::X(_)) => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on_x(),
            Expr::Binary(_, a, b) => a.depends_on_x() || b.depends_on_x(),
        }
    }

    /// Evaluates with the given coordinate values. `y` must be nonempty
    /// (it supplies the arithmetic context for constants).
    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, EvalError> {
        let r = self.eval_inner(x, y)?;
        if !r.value().is_finite() {
            return Err(EvalError(format!("non-finite value in {self}")));
        }
        Ok(r)
    }

    fn eval_inner<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, EvalError> {
        Ok(match self {
            Expr::Const(c) => y[0].lift(*c),
            Expr::Var(Var::X(i)) => x[*i].clone(),
            Expr::Var(Var::Y(i)) => y[*i].clone(),
            Expr::Neg(a) => a.eval_inner(x, y)?.neg(),
            Expr::Call(f, a) => {
                let v = a.eval_inner(x, y)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => v.ln()?,
                    Func::Sqrt => v.sqrt()?,
                    Func::Atan => v.atan(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
            Expr::Binary(op, a, b) => {
                if *op == BinOp::Pow {
                    return self.eval_pow(a, b, x, y);
                }
                let (va, vb) = (a.eval_inner(x, y)?, b.eval_inner(x, y)?);
                match op {
                    BinOp::Add => va.add(&vb),
                    BinOp::Sub => va.sub(&vb),
                    BinOp::Mul => va.mul(&vb),
                    BinOp::Div => va.div(&vb)?,
                    BinOp::Pow => unreachable!(),
                }
            }
        })
    }

    fn eval_pow<S: Scalar>(
        &self,
        base: &Expr,
        exp: &Expr,
        x: &[S],
        y: &[S],
    ) -> Result<S, EvalError> {
        let b = base.eval_inner(x, y)?;
        if exp.is_constant() {
            let e = exp.eval_inner::<f64>(&[], &[0.0])?;
            if e.fract() == 0.0 && e.abs() <= MAX_INTEGER_POWER {
                return b.powi(e as i32);
            }
            return b.powf(e);
        }
        let e = exp.eval_inner(x, y)?;
        Ok(e.mul(&b.ln()?).exp())
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints with the minimal parentheses needed to reparse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, a.precedence() < 3)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op, a, b) => {
                let p = self.precedence();
                let sym = match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                if *op == BinOp::Pow {
                    wrap(f, a, a.precedence() <= p)?;
                    f.write_str(sym)?;
                    wrap(f, b, b.precedence() < 3)
                } else {
                    wrap(f, a, a.precedence() < p)?;
                    f.write_str(sym)?;
                    wrap(f, b, b.precedence() <= p)
                }
            }
        }
    }
}
