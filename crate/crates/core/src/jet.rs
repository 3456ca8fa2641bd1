//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A jet lives on `2n` variables split into a base group `x` and a fiber
//! group `y`, each with its own total-degree cap (`Orders { dx, dy }`). The
//! coefficient of the monomial `dx^a dy^b` is the Taylor coefficient
//! `∂^(a,b) f / (a! b!)` at the anchor point, so every partial derivative up to
//! the caps can be read off exactly (up to round-off).
//!
//! Monomials of each group are enumerated in graded order. A space with a
//! smaller cap therefore indexes a prefix of a larger one, which makes
//! truncation and differentiation cheap re-indexing operations.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Separate truncation degrees for the base and fiber variable groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Orders {
    pub dx: usize,
    pub dy: usize,
}

impl Orders {
    pub const fn new(dx: usize, dy: usize) -> Self {
        Orders { dx, dy }
    }

    /// True if both caps are at least those of `other`.
    pub fn covers(&self, other: Orders) -> bool {
        self.dx >= other.dx && self.dy >= other.dy
    }

    pub fn min(self, other: Orders) -> Orders {
        Orders::new(self.dx.min(other.dx), self.dy.min(other.dy))
    }
}

impl Default for Orders {
    fn default() -> Self {
        Orders::new(2, 6)
    }
}

impl fmt::Display for Orders {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.dx, self.dy)
    }
}

/// A coordinate of the tangent bundle: base `x_i` or fiber `y_i` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    X(usize),
    Y(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Y(i) => write!(f, "y{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("variable {var} needs a nonzero truncation order in its group, got orders {orders}")]
    DegenerateOrder { var: Var, orders: Orders },
    #[error("variable {var} is out of range for dimension {dim}")]
    VariableOutOfRange { var: Var, dim: usize },
    #[error("derivative multi-index ({x_degree},{y_degree}) exceeds truncation orders {orders}")]
    InsufficientOrders {
        x_degree: usize,
        y_degree: usize,
        orders: Orders,
    },
    #[error("{op} requires {requirement}, constant term is {value}")]
    Domain {
        op: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

/// Graded enumeration of exponent vectors in `n` variables up to `degree`.
struct Monomials {
    n: usize,
    exps: Vec<u8>,
    degree: Vec<usize>,
    /// `succ[idx * n + m]` = index of `exps[idx] + e_m`, or `NONE`.
    succ: Vec<u32>,
    /// `pairs` with `deg(a) + deg(b) <= degree`, stored as `[a, b, a+b]`.
    pairs: Vec<[u32; 3]>,
}

const NONE: u32 = u32::MAX;

#[cfg(test)]
fn count_monomials(n: usize, d: usize) -> usize {
    // C(n + d, d)
    let mut c: usize = 1;
    for k in 1..=d {
        c = c * (n + k) / k;
    }
    c
}

impl Monomials {
    fn build(n: usize, degree: usize) -> Monomials {
        let mut exps = Vec::new();
        let mut degrees = Vec::new();
        let mut cur = vec![0u8; n];
        for d in 0..=degree {
            push_degree(&mut exps, &mut degrees, &mut cur, 0, d, d);
        }
        let count = degrees.len();
        let mut lookup: HashMap<&[u8], u32> = HashMap::with_capacity(count);
        for idx in 0..count {
            lookup.insert(&exps[idx * n..(idx + 1) * n], idx as u32);
        }
        let mut succ = vec![NONE; count * n];
        let mut tmp = vec![0u8; n];
        for idx in 0..count {
            if degrees[idx] == degree {
                continue;
            }
            for m in 0..n {
                tmp.copy_from_slice(&exps[idx * n..(idx + 1) * n]);
                tmp[m] += 1;
                succ[idx * n + m] = lookup[tmp.as_slice()];
            }
        }
        let mut pairs = Vec::new();
        for a in 0..count {
            for b in 0..count {
                if degrees[a] + degrees[b] > degree {
                    continue;
                }
                for m in 0..n {
                    tmp[m] = exps[a * n + m] + exps[b * n + m];
                }
                pairs.push([a as u32, b as u32, lookup[tmp.as_slice()]]);
            }
        }
        Monomials {
            n,
            exps,
            degree: degrees,
            succ,
            pairs,
        }
    }

    fn len(&self) -> usize {
        self.degree.len()
    }

    fn exponent(&self, idx: usize) -> &[u8] {
        &self.exps[idx * self.n..(idx + 1) * self.n]
    }

    fn index_of(&self, exp: &[u8]) -> Option<usize> {
        let d: usize = exp.iter().map(|&e| e as usize).sum();
        if d > *self.degree.last().unwrap_or(&0) {
            return None;
        }
        // Walk successors from the constant monomial.
        let mut idx = 0usize;
        for (m, &e) in exp.iter().enumerate() {
            for _ in 0..e {
                idx = self.succ[idx * self.n + m] as usize;
            }
        }
        Some(idx)
    }
}

fn push_degree(
    exps: &mut Vec<u8>,
    degrees: &mut Vec<usize>,
    cur: &mut [u8],
    pos: usize,
    left: usize,
    total: usize,
) {
    let n = cur.len();
    if n == 0 {
        if left == 0 {
            degrees.push(total);
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = left as u8;
        exps.extend_from_slice(cur);
        degrees.push(total);
        return;
    }
    for e in (0..=left).rev() {
        cur[pos] = e as u8;
        push_degree(exps, degrees, cur, pos + 1, left - e, total);
    }
    cur[pos] = 0;
}

type Cache<K, V> = OnceLock<Mutex<HashMap<K, Arc<V>>>>;

fn monomials(n: usize, degree: usize) -> Arc<Monomials> {
    static CACHE: Cache<(usize, usize), Monomials> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("monomial cache poisoned");
    guard
        .entry((n, degree))
        .or_insert_with(|| Arc::new(Monomials::build(n, degree)))
        .clone()
}

/// Shape of a jet: dimension `n` of each variable group plus truncation orders.
pub struct JetSpace {
    n: usize,
    orders: Orders,
    x: Arc<Monomials>,
    y: Arc<Monomials>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("n", &self.n)
            .field("orders", &self.orders)
            .field("len", &self.len())
            .finish()
    }
}

impl JetSpace {
    /// Returns the shared space for `n` variables per group at `orders`.
    pub fn get(n: usize, orders: Orders) -> Arc<JetSpace> {
        static CACHE: Cache<(usize, Orders), JetSpace> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(s) = cache
            .lock()
            .expect("jet space cache poisoned")
            .get(&(n, orders))
        {
            return s.clone();
        }
        let space = Arc::new(JetSpace {
            n,
            orders,
            x: monomials(n, orders.dx),
            y: monomials(n, orders.dy),
        });
        cache
            .lock()
            .expect("jet space cache poisoned")
            .entry((n, orders))
            .or_insert(space)
            .clone()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn orders(&self) -> Orders {
        self.orders
    }

    fn nx(&self) -> usize {
        self.x.len()
    }

    fn ny(&self) -> usize {
        self.y.len()
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Exponents of a mixed partial derivative, one entry per variable of each group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub x: Vec<u8>,
    pub y: Vec<u8>,
}

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex {
            x: vec![0; n],
            y: vec![0; n],
        }
    }

    /// Multi-index of `∂^k / ∂v_1 … ∂v_k` for the listed variables.
    pub fn from_vars(n: usize, vars: &[Var]) -> Self {
        let mut mi = MultiIndex::zero(n);
        for v in vars {
            match *v {
                Var::X(i) => mi.x[i] += 1,
                Var::Y(i) => mi.y[i] += 1,
            }
        }
        mi
    }

    pub fn x_degree(&self) -> usize {
        self.x.iter().map(|&e| e as usize).sum()
    }

    pub fn y_degree(&self) -> usize {
        self.y.iter().map(|&e| e as usize).sum()
    }

    fn factorial(&self) -> f64 {
        self.x
            .iter()
            .chain(self.y.iter())
            .map(|&e| (1..=e as u64).product::<u64>() as f64)
            .product()
    }
}

#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("n", &self.space.n)
            .field("orders", &self.space.orders)
            .field("value", &self.value())
            .finish()
    }
}

impl Jet {
    pub fn zero(space: &Arc<JetSpace>) -> Jet {
        Jet {
            space: space.clone(),
            coeffs: vec![0.0; space.len()],
        }
    }

    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Jet {
        let mut j = Jet::zero(space);
        j.coeffs[0] = value;
        j
    }

    /// The coordinate function `var` anchored at `value`.
    pub fn variable(space: &Arc<JetSpace>, var: Var, value: f64) -> Result<Jet, JetError> {
        let n = space.n;
        let (i, cap) = match var {
            Var::X(i) => (i, space.orders.dx),
            Var::Y(i) => (i, space.orders.dy),
        };
        if i >= n {
            return Err(JetError::VariableOutOfRange { var, dim: n });
        }
        if cap == 0 {
            return Err(JetError::DegenerateOrder {
                var,
                orders: space.orders,
            });
        }
        let mut j = Jet::constant(space, value);
        let ny = space.ny();
        match var {
            Var::X(i) => j.coeffs[space.x.succ[i] as usize * ny] = 1.0,
            Var::Y(i) => j.coeffs[space.y.succ[i] as usize] = 1.0,
        }
        Ok(j)
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn orders(&self) -> Orders {
        self.space.orders
    }

    /// Constant term: the value of the underlying function at the anchor.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficient of the monomial with the given exponents (zero
    /// outside the truncation box).
    pub fn coefficient(&self, index: &MultiIndex) -> f64 {
        match (
            self.space.x.index_of(&index.x),
            self.space.y.index_of(&index.y),
        ) {
            (Some(xi), Some(yi)) => self.coeffs[xi * self.space.ny() + yi],
            _ => 0.0,
        }
    }

    /// `∂^α f` at the anchor, i.e. `α!` times the stored coefficient.
    pub fn partial(&self, index: &MultiIndex) -> Result<f64, JetError> {
        let (xd, yd) = (index.x_degree(), index.y_degree());
        let orders = self.orders();
        if xd > orders.dx
            || yd > orders.dy
            || index.x.len() != self.space.n
            || index.y.len() != self.space.n
        {
            return Err(JetError::InsufficientOrders {
                x_degree: xd,
                y_degree: yd,
                orders,
            });
        }
        Ok(self.coefficient(index) * index.factorial())
    }

    /// `∂f/∂v` at the anchor.
    pub fn first_partial(&self, var: Var) -> Result<f64, JetError> {
        self.partial(&MultiIndex::from_vars(self.space.n, &[var]))
    }

    /// Raw coefficient table, row-major over (x-monomial, y-monomial).
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Drops all monomials beyond `orders` (which must not exceed the current ones).
    pub fn truncate(&self, orders: Orders) -> Jet {
        let orders = orders.min(self.orders());
        if orders == self.orders() {
            return self.clone();
        }
        let target = JetSpace::get(self.space.n, orders);
        let (tnx, tny, sny) = (target.nx(), target.ny(), self.space.ny());
        let mut coeffs = Vec::with_capacity(tnx * tny);
        for xi in 0..tnx {
            coeffs.extend_from_slice(&self.coeffs[xi * sny..xi * sny + tny]);
        }
        Jet {
            space: target,
            coeffs,
        }
    }

    /// The derivative jet `∂f/∂var`, one order lower in the variable's group.
    pub fn derivative(&self, var: Var) -> Result<Jet, JetError> {
        let n = self.space.n;
        let orders = self.orders();
        let (i, target_orders) = match var {
            Var::X(i) if orders.dx > 0 => (i, Orders::new(orders.dx - 1, orders.dy)),
            Var::Y(i) if orders.dy > 0 => (i, Orders::new(orders.dx, orders.dy - 1)),
            Var::X(_) => {
                return Err(JetError::InsufficientOrders {
                    x_degree: orders.dx + 1,
                    y_degree: 0,
                    orders,
                })
            }
            Var::Y(_) => {
                return Err(JetError::InsufficientOrders {
                    x_degree: 0,
                    y_degree: orders.dy + 1,
                    orders,
                })
            }
        };
        if i >= n {
            return Err(JetError::VariableOutOfRange { var, dim: n });
        }
        let target = JetSpace::get(n, target_orders);
        let (tnx, tny, sny) = (target.nx(), target.ny(), self.space.ny());
        let mut coeffs = vec![0.0; tnx * tny];
        match var {
            Var::X(_) => {
                for xi in 0..tnx {
                    let src = self.space.x.succ[xi * n + i] as usize;
                    let factor = (self.space.x.exponent(src)[i]) as f64;
                    for yi in 0..tny {
                        coeffs[xi * tny + yi] = factor * self.coeffs[src * sny + yi];
                    }
                }
            }
            Var::Y(_) => {
                for yi in 0..tny {
                    let src = self.space.y.succ[yi * n + i] as usize;
                    let factor = (self.space.y.exponent(src)[i]) as f64;
                    for xi in 0..tnx {
                        coeffs[xi * tny + yi] = factor * self.coeffs[xi * sny + src];
                    }
                }
            }
        }
        Ok(Jet {
            space: target,
            coeffs,
        })
    }

    fn aligned<'a>(
        a: &'a Jet,
        b: &'a Jet,
    ) -> (std::borrow::Cow<'a, Jet>, std::borrow::Cow<'a, Jet>) {
        use std::borrow::Cow;
        assert_eq!(a.space.n, b.space.n, "jets of different dimension");
        if Arc::ptr_eq(&a.space, &b.space) || a.orders() == b.orders() {
            return (Cow::Borrowed(a), Cow::Borrowed(b));
        }
        let o = a.orders().min(b.orders());
        let ca = if a.orders() == o {
            Cow::Borrowed(a)
        } else {
            Cow::Owned(a.truncate(o))
        };
        let cb = if b.orders() == o {
            Cow::Borrowed(b)
        } else {
            Cow::Owned(b.truncate(o))
        };
        (ca, cb)
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let (a, b) = Jet::aligned(self, other);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(p, q)| p + q).collect();
        Jet {
            space: a.space.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let (a, b) = Jet::aligned(self, other);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(p, q)| p - q).collect();
        Jet {
            space: a.space.clone(),
            coeffs,
        }
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.coeffs[0] += s;
        j
    }

    /// `self += s * other` without allocating when spaces agree.
    pub fn axpy(&mut self, s: f64, other: &Jet) {
        if self.orders() == other.orders() {
            for (p, q) in self.coeffs.iter_mut().zip(&other.coeffs) {
                *p += s * q;
            }
        } else {
            *self = self.add(&other.scale(s));
        }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let (a, b) = Jet::aligned(self, other);
        let space = a.space.clone();
        let mut out = vec![0.0; space.len()];
        mul_into(&a.coeffs, &b.coeffs, &space, &mut out);
        Jet { space, coeffs: out }
    }

    /// Applies a univariate function given its Taylor coefficients
    /// `taylor[k] = g^(k)(c) / k!` at the constant term `c`.
    pub fn compose(&self, taylor: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut acc = Jet::constant(&self.space, *taylor.last().unwrap_or(&0.0));
        for &a in taylor.iter().rev().skip(1) {
            acc = acc.mul(&h).add_scalar(a);
        }
        acc
    }

    fn nilpotency(&self) -> usize {
        let o = self.orders();
        o.dx + o.dy
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let c = self.value();
        if c == 0.0 || !c.is_finite() {
            return Err(JetError::Domain {
                op: "division",
                requirement: "a nonzero divisor",
                value: c,
            });
        }
        let k = self.nilpotency();
        let mut t = Vec::with_capacity(k + 1);
        let mut p = 1.0 / c;
        for _ in 0..=k {
            t.push(p);
            p *= -1.0 / c;
        }
        Ok(self.compose(&t))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn exp(&self) -> Jet {
        let c = self.value().exp();
        let mut t = Vec::new();
        let mut f = 1.0;
        for k in 0..=self.nilpotency() {
            if k > 0 {
                f *= k as f64;
            }
            t.push(c / f);
        }
        self.compose(&t)
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let c = self.value();
        if c <= 0.0 || !c.is_finite() {
            return Err(JetError::Domain {
                op: "log",
                requirement: "a positive argument",
                value: c,
            });
        }
        let mut t = vec![c.ln()];
        let mut p = 1.0;
        for k in 1..=self.nilpotency() {
            p /= c;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            t.push(sign * p / k as f64);
        }
        Ok(self.compose(&t))
    }

    /// `self^r` for real `r`; requires a positive constant term.
    pub fn powf(&self, r: f64) -> Result<Jet, JetError> {
        let c = self.value();
        if c <= 0.0 || !c.is_finite() {
            return Err(JetError::Domain {
                op: "real power",
                requirement: "a positive base",
                value: c,
            });
        }
        let mut t = Vec::new();
        let mut binom = 1.0;
        let base = c.powf(r);
        let mut cp = 1.0;
        for k in 0..=self.nilpotency() {
            if k > 0 {
                binom *= (r - (k as f64 - 1.0)) / k as f64;
                cp *= c;
            }
            t.push(base * binom / cp);
        }
        Ok(self.compose(&t))
    }

    /// Integer power by repeated squaring; negative exponents need a nonzero constant term.
    pub fn powi(&self, k: i32) -> Result<Jet, JetError> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Jet::constant(&self.space, 1.0);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        if self.value() <= 0.0 {
            return Err(JetError::Domain {
                op: "sqrt",
                requirement: "a positive argument",
                value: self.value(),
            });
        }
        self.powf(0.5)
    }

    pub fn atan(&self) -> Jet {
        let c = self.value();
        let k = self.nilpotency();
        // 1/(1+(c+t)^2) = 1/(q0 + q1 t + t^2)
        let (q0, q1) = (1.0 + c * c, 2.0 * c);
        let mut r = vec![0.0; k.max(1)];
        r[0] = 1.0 / q0;
        for i in 1..r.len() {
            let prev2 = if i >= 2 { r[i - 2] } else { 0.0 };
            r[i] = -(q1 * r[i - 1] + prev2) / q0;
        }
        let mut t = vec![c.atan()];
        for i in 1..=k {
            t.push(r[i - 1] / i as f64);
        }
        self.compose(&t)
    }

    pub fn sin(&self) -> Jet {
        self.trig(false)
    }

    pub fn cos(&self) -> Jet {
        self.trig(true)
    }

    fn trig(&self, cosine: bool) -> Jet {
        let c = self.value();
        let (s, co) = c.sin_cos();
        // derivative cycle starting at sin: sin, cos, -sin, -cos
        let cycle = [s, co, -s, -co];
        let shift = if cosine { 1 } else { 0 };
        let mut t = Vec::new();
        let mut f = 1.0;
        for k in 0..=self.nilpotency() {
            if k > 0 {
                f *= k as f64;
            }
            t.push(cycle[(k + shift) % 4] / f);
        }
        self.compose(&t)
    }
}

fn mul_into(a: &[f64], b: &[f64], space: &JetSpace, out: &mut [f64]) {
    let ny = space.ny();
    let nx = space.nx();
    let nonzero = |c: &[f64]| -> Vec<bool> {
        (0..nx)
            .map(|xi| c[xi * ny..(xi + 1) * ny].iter().any(|&v| v != 0.0))
            .collect()
    };
    let (na, nb) = (nonzero(a), nonzero(b));
    let xmax = space.orders.dx;
    let ymax = space.orders.dy;
    let ydeg = &space.y.degree;
    for &[xa, xb, xc] in space.x.pairs.iter() {
        let (xa, xb, xc) = (xa as usize, xb as usize, xc as usize);
        if !na[xa] || !nb[xb] || space.x.degree[xa] + space.x.degree[xb] > xmax {
            continue;
        }
        let ab = &a[xa * ny..(xa + 1) * ny];
        let bb = &b[xb * ny..(xb + 1) * ny];
        let oc = &mut out[xc * ny..(xc + 1) * ny];
        for &[ya, yb, yc] in space.y.pairs.iter() {
            let (ya, yb) = (ya as usize, yb as usize);
            if ydeg[ya] + ydeg[yb] > ymax {
                continue;
            }
            oc[yc as usize] += ab[ya] * bb[yb];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn space1(dy: usize) -> Arc<JetSpace> {
        JetSpace::get(1, Orders::new(0, dy))
    }

    #[test]
    fn monomial_counts_match_binomials() {
        for n in 1..5 {
            for d in 0..7 {
                assert_eq!(monomials(n, d).len(), count_monomials(n, d));
            }
        }
    }

    #[test]
    fn graded_order_is_prefix_compatible() {
        let small = monomials(3, 2);
        let big = monomials(3, 5);
        for i in 0..small.len() {
            assert_eq!(small.exponent(i), big.exponent(i));
        }
    }

    #[test]
    fn variable_seeds_linear_term() {
        let sp = space1(2);
        let y = Jet::variable(&sp, Var::Y(0), 3.0).unwrap();
        assert_eq!(y.value(), 3.0);
        assert_eq!(
            y.coefficient(&MultiIndex {
                x: vec![0],
                y: vec![1]
            }),
            1.0
        );
        assert_eq!(
            y.coefficient(&MultiIndex {
                x: vec![0],
                y: vec![2]
            }),
            0.0
        );

        let sp2 = JetSpace::get(2, Orders::new(2, 0));
        let x2 = Jet::variable(&sp2, Var::X(1), -1.0).unwrap();
        assert_eq!(x2.value(), -1.0);
        assert_eq!(x2.first_partial(Var::X(1)).unwrap(), 1.0);
        assert_eq!(x2.first_partial(Var::X(0)).unwrap(), 0.0);
    }

    #[test]
    fn zero_order_variable_is_an_error() {
        let sp = JetSpace::get(1, Orders::new(0, 0));
        assert!(matches!(
            Jet::variable(&sp, Var::Y(0), 1.0),
            Err(JetError::DegenerateOrder { .. })
        ));
    }

    #[test]
    fn one_plus_t_times_one_minus_t() {
        let sp = space1(2);
        let t = Jet::variable(&sp, Var::Y(0), 0.0).unwrap();
        let p = t.add_scalar(1.0).mul(&t.neg().add_scalar(1.0));
        assert_eq!(p.coefficients(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn exp_of_zero_jet_is_one() {
        let sp = JetSpace::get(2, Orders::new(2, 3));
        let z = Jet::zero(&sp).exp();
        assert_eq!(z.value(), 1.0);
        assert!(z.coefficients()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn atan_slope_at_one() {
        let sp = space1(1);
        let t = Jet::variable(&sp, Var::Y(0), 1.0).unwrap();
        assert_relative_eq!(
            t.atan().first_partial(Var::Y(0)).unwrap(),
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn atan_higher_derivatives() {
        // d2/dt2 atan = -2t/(1+t^2)^2, d3/dt3 = (6t^2-2)/(1+t^2)^3
        let sp = space1(3);
        let c = 0.7;
        let t = Jet::variable(&sp, Var::Y(0), c).unwrap().atan();
        let d = |k: u8| {
            t.partial(&MultiIndex {
                x: vec![0],
                y: vec![k],
            })
            .unwrap()
        };
        let q: f64 = 1.0 + c * c;
        assert_relative_eq!(d(2), -2.0 * c / (q * q), max_relative = 1e-13);
        assert_relative_eq!(
            d(3),
            (6.0 * c * c - 2.0) / (q * q * q),
            max_relative = 1e-13
        );
    }

    #[test]
    fn cube_third_derivative() {
        let sp = space1(3);
        let y = Jet::variable(&sp, Var::Y(0), 1.3).unwrap();
        let c = y.powi(3).unwrap();
        assert_relative_eq!(
            c.partial(&MultiIndex {
                x: vec![0],
                y: vec![3]
            })
            .unwrap(),
            6.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn partial_beyond_orders_errors() {
        let sp = space1(2);
        let y = Jet::variable(&sp, Var::Y(0), 1.0).unwrap();
        assert!(matches!(
            y.partial(&MultiIndex {
                x: vec![0],
                y: vec![3]
            }),
            Err(JetError::InsufficientOrders { .. })
        ));
    }

    #[test]
    fn domain_errors() {
        let sp = space1(2);
        let z = Jet::constant(&sp, 0.0);
        assert!(z.recip().is_err());
        assert!(z.ln().is_err());
        assert!(Jet::constant(&sp, -1.0).sqrt().is_err());
        assert!(Jet::constant(&sp, -1.0).powf(0.5).is_err());
        assert!(Jet::constant(&sp, -2.0).powi(3).is_ok());
    }

    #[test]
    fn derivative_lowers_orders() {
        let sp = JetSpace::get(2, Orders::new(1, 3));
        let x = Jet::variable(&sp, Var::X(0), 0.5).unwrap();
        let y = Jet::variable(&sp, Var::Y(1), 2.0).unwrap();
        // f = x * y^3
        let f = x.mul(&y.powi(3).unwrap());
        let d = f.derivative(Var::Y(1)).unwrap();
        assert_eq!(d.orders(), Orders::new(1, 2));
        assert_relative_eq!(d.value(), 0.5 * 3.0 * 4.0, epsilon = 1e-14);
        let dxd = d.derivative(Var::X(0)).unwrap();
        assert_relative_eq!(dxd.value(), 12.0, epsilon = 1e-14);
        assert!(dxd.derivative(Var::X(0)).is_err());
    }

    #[test]
    fn mixed_orders_truncate_to_common_box() {
        let a = Jet::variable(&JetSpace::get(1, Orders::new(2, 0)), Var::X(0), 1.0).unwrap();
        let b = Jet::variable(&JetSpace::get(1, Orders::new(1, 3)), Var::X(0), 1.0).unwrap();
        assert_eq!(a.mul(&b).orders(), Orders::new(1, 0));
    }

    #[test]
    fn pure_x_times_pure_y_respects_box() {
        let sp = JetSpace::get(2, Orders::new(1, 2));
        let x = Jet::variable(&sp, Var::X(0), 0.3).unwrap().exp();
        let y = Jet::variable(&sp, Var::Y(1), 0.4).unwrap().exp();
        let p = x.mul(&y);
        assert_eq!(p.coefficients().len(), sp.len());
        // e^{x+y}: coefficient of dx^1 dy^2 = e^{0.7} / 2
        let c = p.coefficient(&MultiIndex {
            x: vec![1, 0],
            y: vec![0, 2],
        });
        assert_relative_eq!(c, 0.7f64.exp() / 2.0, max_relative = 1e-14);
    }
}
