//! Pointwise evaluation of the Finsler tensors in induced coordinates.
//!
//! Everything is derived from the energy jet. Index layouts (row-major):
//!
//! | field               | layout            | meaning                                        |
//! |---------------------|-------------------|------------------------------------------------|
//! | `g`, `g_inv`        | `[i][j]`          | `½ ∂²E/∂y^i∂y^j` and its inverse               |
//! | `spray`             | `[i]`             | `G^i`                                          |
//! | `connection`        | `[i][j]`          | `N^i_j = ∂G^i/∂y^j`                            |
//! | `berwald_connection`| `[i][j][k]`       | `∂N^i_j/∂y^k`                                  |
//! | `berwald`           | `[h][i][j][k]`    | `∂³G^h/∂y^i∂y^j∂y^k`                           |
//! | `cartan`            | `[i][j][k]`       | `¼ ∂³E/∂y^i∂y^j∂y^k`                           |
//! | `landsberg`         | `[i][j][k]`       | `½ y_h Gb^h_ijk`                               |
//! | `chern`             | `[i][j][k]`       | `Γ^i_jk`                                       |
//! | `mixed_landsberg`   | `[i][j][k]`       | `Gc^i_jk − Γ^i_jk`                             |
//! | `chern_h`           | `[h][i][j][k]`    | h-curvature, `i` acted on, `(j,k)` the 2-form  |
//! | `chern_hv`          | `[a][h][j][k]`    | `∂Γ^a_hj/∂y^k`                                 |
//! | `barthel`           | `[m][j][k]`       | `δ_k N^m_j − δ_j N^m_k`                        |
//! | `cartan_h`          | `[h][i][j][k]`    | `Rs^h_ijk + g^hm C_mis Rb^s_jk`                |
//! | `chern_lowered`     | `[w][i][j][k]`    | `g_wh Rs^h_ijk`                                |
//!
//! with `δ_j = ∂/∂x^j − N^m_j ∂/∂y^m` and
//! `Rs^h_ijk = δ_k Γ^h_ij − δ_j Γ^h_ik + Γ^h_mk Γ^m_ij − Γ^h_mj Γ^m_ik`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dsl::{MetricSpec, PointState};
use crate::error::{FinslerError, Result};
use crate::jet::{Jet, MultiIndex, Orders, Var};
use crate::tensor::Tensor;

/// Fundamental tensors with a larger condition number are refused.
pub const MAX_CONDITION: f64 = 1e12;

pub const ORDERS_ENV: &str = "FINSLER_DEFAULT_ORDERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TensorKind {
    Metric,
    Spray,
    Connection,
    BerwaldConnection,
    Berwald,
    Cartan,
    Landsberg,
    Chern,
    ChernH,
    ChernHv,
    Barthel,
    CartanH,
    ChernLowered,
}

impl TensorKind {
    pub const ALL: [TensorKind; 13] = [
        TensorKind::Metric,
        TensorKind::Spray,
        TensorKind::Connection,
        TensorKind::BerwaldConnection,
        TensorKind::Berwald,
        TensorKind::Cartan,
        TensorKind::Landsberg,
        TensorKind::Chern,
        TensorKind::ChernH,
        TensorKind::ChernHv,
        TensorKind::Barthel,
        TensorKind::CartanH,
        TensorKind::ChernLowered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TensorKind::Metric => "metric",
            TensorKind::Spray => "spray",
            TensorKind::Connection => "connection",
            TensorKind::BerwaldConnection => "berwald-connection",
            TensorKind::Berwald => "berwald",
            TensorKind::Cartan => "cartan",
            TensorKind::Landsberg => "landsberg",
            TensorKind::Chern => "chern",
            TensorKind::ChernH => "chern-h",
            TensorKind::ChernHv => "chern-hv",
            TensorKind::Barthel => "barthel",
            TensorKind::CartanH => "cartan-h",
            TensorKind::ChernLowered => "chern-lowered",
        }
    }

    /// Jet orders a request for this tensor must supply.
    pub fn required_orders(self) -> Orders {
        match self {
            TensorKind::Metric => Orders::new(0, 2),
            TensorKind::Spray | TensorKind::Connection => Orders::new(1, 3),
            TensorKind::Chern | TensorKind::BerwaldConnection => Orders::new(1, 4),
            TensorKind::Berwald | TensorKind::Landsberg => Orders::new(1, 6),
            TensorKind::Cartan => Orders::new(0, 3),
            TensorKind::ChernH | TensorKind::CartanH | TensorKind::ChernLowered => {
                Orders::new(2, 6)
            }
            TensorKind::ChernHv => Orders::new(1, 5),
            TensorKind::Barthel => Orders::new(2, 4),
        }
    }

    /// Orders of the energy jet that actually determine this tensor exactly.
    fn working_orders(self) -> Orders {
        match self {
            TensorKind::Metric => Orders::new(0, 2),
            TensorKind::Cartan => Orders::new(0, 3),
            TensorKind::Spray | TensorKind::Connection => Orders::new(1, 3),
            TensorKind::Chern => Orders::new(1, 3),
            TensorKind::BerwaldConnection | TensorKind::ChernHv => Orders::new(1, 4),
            TensorKind::Berwald | TensorKind::Landsberg => Orders::new(1, 5),
            TensorKind::ChernH
            | TensorKind::CartanH
            | TensorKind::ChernLowered
            | TensorKind::Barthel => Orders::new(2, 4),
        }
    }

    fn dependencies(self) -> &'static [TensorKind] {
        use TensorKind::*;
        match self {
            Metric | Cartan => &[],
            Spray => &[Metric],
            Connection => &[Spray],
            BerwaldConnection => &[Connection],
            Berwald => &[BerwaldConnection],
            Landsberg => &[Berwald],
            Chern => &[BerwaldConnection],
            ChernH | ChernHv => &[Chern],
            Barthel => &[BerwaldConnection],
            CartanH => &[ChernH, Barthel, Cartan],
            ChernLowered => &[ChernH],
        }
    }
}

impl fmt::Display for TensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TensorKind {
    type Err = FinslerError;
    fn from_str(s: &str) -> Result<Self> {
        TensorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| FinslerError::InvalidArgument(format!("unknown tensor `{s}`")))
    }
}

/// Parses `"Dx,Dy"`.
pub fn parse_orders(s: &str) -> Result<Orders> {
    let bad = || FinslerError::InvalidArgument(format!("orders `{s}`: expected `Dx,Dy`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok(Orders::new(
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

/// `(2,6)` unless overridden by `FINSLER_DEFAULT_ORDERS`.
pub fn default_orders() -> Result<Orders> {
    match std::env::var(ORDERS_ENV) {
        Ok(s) => parse_orders(&s),
        Err(_) => Ok(Orders::default()),
    }
}

/// Sign choices. The default is the calibrated one; other values exist to
/// show that the golden checks catch a flipped convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convention {
    pub rs_sign: f64,
}

impl Default for Convention {
    fn default() -> Self {
        Convention { rs_sign: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryBundle {
    pub point: PointState,
    pub orders: Orders,
    pub energy: f64,
    pub finsler: f64,
    pub g: Tensor,
    pub g_inv: Tensor,
    pub condition: f64,
    /// `y_i = g_is y^s`.
    pub y_lower: Vec<f64>,
    pub spray: Option<Tensor>,
    pub connection: Option<Tensor>,
    pub berwald_connection: Option<Tensor>,
    pub berwald: Option<Tensor>,
    pub cartan: Option<Tensor>,
    pub landsberg: Option<Tensor>,
    pub chern: Option<Tensor>,
    pub mixed_landsberg: Option<Tensor>,
    pub chern_h: Option<Tensor>,
    pub chern_hv: Option<Tensor>,
    pub barthel: Option<Tensor>,
    pub cartan_h: Option<Tensor>,
    pub chern_lowered: Option<Tensor>,
}

impl GeometryBundle {
    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    /// The stored tensor for `kind`, or an error naming what is missing.
    pub fn tensor(&self, kind: TensorKind) -> Result<&Tensor> {
        let t = match kind {
            TensorKind::Metric => Some(&self.g),
            TensorKind::Spray => self.spray.as_ref(),
            TensorKind::Connection => self.connection.as_ref(),
            TensorKind::BerwaldConnection => self.berwald_connection.as_ref(),
            TensorKind::Berwald => self.berwald.as_ref(),
            TensorKind::Cartan => self.cartan.as_ref(),
            TensorKind::Landsberg => self.landsberg.as_ref(),
            TensorKind::Chern => self.chern.as_ref(),
            TensorKind::ChernH => self.chern_h.as_ref(),
            TensorKind::ChernHv => self.chern_hv.as_ref(),
            TensorKind::Barthel => self.barthel.as_ref(),
            TensorKind::CartanH => self.cartan_h.as_ref(),
            TensorKind::ChernLowered => self.chern_lowered.as_ref(),
        };
        t.ok_or_else(|| {
            FinslerError::InvalidArgument(format!(
                "tensor `{kind}` was not computed for this bundle"
            ))
        })
    }

    /// Named tensors present in the bundle, in a fixed order.
    pub fn tensors(&self) -> Vec<(&'static str, &Tensor)> {
        let mut out = vec![("g", &self.g), ("g_inv", &self.g_inv)];
        let optional = [
            ("spray", &self.spray),
            ("connection", &self.connection),
            ("berwald_connection", &self.berwald_connection),
            ("berwald", &self.berwald),
            ("cartan", &self.cartan),
            ("landsberg", &self.landsberg),
            ("chern", &self.chern),
            ("mixed_landsberg", &self.mixed_landsberg),
            ("chern_h", &self.chern_h),
            ("chern_hv", &self.chern_hv),
            ("barthel", &self.barthel),
            ("cartan_h", &self.cartan_h),
            ("chern_lowered", &self.chern_lowered),
        ];
        out.extend(
            optional
                .into_iter()
                .filter_map(|(k, t)| t.as_ref().map(|t| (k, t))),
        );
        out
    }
}

fn closure(kinds: &[TensorKind]) -> BTreeSet<TensorKind> {
    let mut set = BTreeSet::new();
    let mut stack: Vec<TensorKind> = kinds.to_vec();
    stack.push(TensorKind::Metric);
    while let Some(k) = stack.pop() {
        if set.insert(k) {
            stack.extend_from_slice(k.dependencies());
        }
    }
    set
}

/// Fails unless `orders` satisfies the requirement table for every kind.
pub fn validate_orders(kinds: &[TensorKind], orders: Orders) -> Result<()> {
    for k in kinds {
        let req = k.required_orders();
        if !orders.covers(req) {
            return Err(FinslerError::InsufficientOrders {
                what: k.name().into(),
                required: req,
                available: orders,
            });
        }
    }
    Ok(())
}

fn invert_jets(m: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
    let n = m.len();
    let mut a: Vec<Vec<Jet>> = m.to_vec();
    let space = a[0][0].space().clone();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet::constant(&space, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].value().abs().total_cmp(&a[s][col].value().abs()))
            .expect("nonempty pivot range");
        if a[pivot][col].value() == 0.0 {
            return Err(FinslerError::Degenerate(
                "fundamental tensor is singular".into(),
            ));
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].recip()?;
        a[col] = a[col].iter().map(|v| v.mul(&p)).collect();
        inv[col] = inv[col].iter().map(|v| v.mul(&p)).collect();
        for r in 0..n {
            if r == col || a[r][col].coefficients().iter().all(|&c| c == 0.0) {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let t = f.mul(&a[col][c]);
                a[r][c] = a[r][c].sub(&t);
                let t = f.mul(&inv[col][c]);
                inv[r][c] = inv[r][c].sub(&t);
            }
        }
    }
    Ok(inv)
}

fn condition_number(g: &Tensor) -> f64 {
    let n = g.dim();
    let m = DMatrix::from_row_slice(n, n, g.data());
    let sv = m.singular_values();
    let (max, min) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn jet_tensor2(n: usize, f: impl Fn(usize, usize) -> f64) -> Tensor {
    Tensor::from_fn(2, n, |i| f(i[0], i[1]))
}

/// Computes the requested tensors (and whatever they depend on) at `p`.
pub fn compute(
    spec: &MetricSpec,
    p: &PointState,
    orders: Orders,
    kinds: &[TensorKind],
    convention: Convention,
) -> Result<GeometryBundle> {
    validate_orders(kinds, orders)?;
    let need = closure(kinds);
    let work = need
        .iter()
        .map(|k| k.working_orders())
        .fold(Orders::new(0, 0), |a, b| {
            Orders::new(a.dx.max(b.dx), a.dy.max(b.dy))
        })
        .min(orders);
    let n = spec.dim;
    let has = |k: TensorKind| need.contains(&k);

    let e = spec.eval_jet(p, work)?;
    let energy = e.value();
    if energy <= 0.0 {
        return Err(FinslerError::Degenerate(format!(
            "energy {energy} is not positive at {p}"
        )));
    }
    let ey: Vec<Jet> = (0..n)
        .map(|i| e.derivative(Var::Y(i)))
        .collect::<std::result::Result<_, _>>()?;
    let mut gj: Vec<Vec<Jet>> = vec![Vec::with_capacity(n); n];
    for i in 0..n {
        for j in 0..n {
            let v = if j < i {
                gj[j][i].clone()
            } else {
                ey[i].derivative(Var::Y(j))?.scale(0.5)
            };
            gj[i].push(v);
        }
    }
    let g = jet_tensor2(n, |i, j| gj[i][j].value());
    let condition = condition_number(&g);
    // also rejects NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(condition <= MAX_CONDITION) {
        return Err(FinslerError::Degenerate(format!(
            "fundamental tensor has condition number {condition:.3e} at {p}"
        )));
    }
    let ginv_j = invert_jets(&gj)?;
    let g_inv = jet_tensor2(n, |i, j| ginv_j[i][j].value());
    let y_lower: Vec<f64> = ey.iter().map(|d| 0.5 * d.value()).collect();

    let y3 = |j: &Jet, a: usize, b: usize, c: usize| {
        j.partial(&MultiIndex::from_vars(
            n,
            &[Var::Y(a), Var::Y(b), Var::Y(c)],
        ))
    };

    let mut bundle = GeometryBundle {
        point: p.clone(),
        orders,
        energy,
        finsler: energy.sqrt(),
        g,
        g_inv,
        condition,
        y_lower,
        spray: None,
        connection: None,
        berwald_connection: None,
        berwald: None,
        cartan: None,
        landsberg: None,
        chern: None,
        mixed_landsberg: None,
        chern_h: None,
        chern_hv: None,
        barthel: None,
        cartan_h: None,
        chern_lowered: None,
    };

    if has(TensorKind::Cartan) {
        let mut c = Tensor::zeros(3, n);
        for idx in c.clone().indices() {
            c.set(&idx, 0.25 * y3(&e, idx[0], idx[1], idx[2])?);
        }
        bundle.cartan = Some(c);
    }

    if !has(TensorKind::Spray) {
        return Ok(bundle);
    }

    // G^i = ¼ g^il (y^k ∂²E/∂y^l∂x^k − ∂E/∂x^l)
    let ex: Vec<Jet> = (0..n)
        .map(|l| e.derivative(Var::X(l)))
        .collect::<std::result::Result<_, _>>()?;
    let yv: Vec<Jet> = (0..n)
        .map(|k| Jet::variable(e.space(), Var::Y(k), p.y[k]))
        .collect::<std::result::Result<_, _>>()?;
    let mut w = Vec::with_capacity(n);
    for l in 0..n {
        let mut acc = ex[l].neg();
        for k in 0..n {
            acc = acc.add(&yv[k].mul(&ex[k].derivative(Var::Y(l))?));
        }
        w.push(acc);
    }
    let spray_j: Vec<Jet> = (0..n)
        .map(|i| {
            let mut acc = ginv_j[i][0].mul(&w[0]);
            for l in 1..n {
                acc = acc.add(&ginv_j[i][l].mul(&w[l]));
            }
            acc.scale(0.25)
        })
        .collect();
    bundle.spray = Some(Tensor::from_fn(1, n, |i| spray_j[i[0]].value()));

    let nj: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| spray_j[i].derivative(Var::Y(j)))
                .collect::<std::result::Result<_, _>>()
        })
        .collect::<std::result::Result<_, _>>()?;
    let conn = jet_tensor2(n, |i, j| nj[i][j].value());
    bundle.connection = Some(conn.clone());

    if !has(TensorKind::BerwaldConnection) {
        return Ok(bundle);
    }
    let mut gc = Tensor::zeros(3, n);
    for idx in gc.clone().indices() {
        gc.set(&idx, nj[idx[0]][idx[1]].first_partial(Var::Y(idx[2]))?);
    }
    bundle.berwald_connection = Some(gc.clone());

    if has(TensorKind::Berwald) {
        let mut gb = Tensor::zeros(4, n);
        for idx in gb.clone().indices() {
            gb.set(&idx, y3(&spray_j[idx[0]], idx[1], idx[2], idx[3])?);
        }
        if has(TensorKind::Landsberg) {
            let yl = &bundle.y_lower;
            let l = Tensor::from_fn(3, n, |i| {
                0.5 * (0..n)
                    .map(|h| yl[h] * gb.get(&[h, i[0], i[1], i[2]]))
                    .sum::<f64>()
            });
            bundle.landsberg = Some(l);
        }
        bundle.berwald = Some(gb);
    }

    if has(TensorKind::Barthel) {
        // δ_k N^m_j = ∂N^m_j/∂x^k − N^s_k Gc^m_js
        let mut dn = Tensor::zeros(3, n);
        for idx in dn.clone().indices() {
            let (m, j, k) = (idx[0], idx[1], idx[2]);
            let v = nj[m][j].first_partial(Var::X(k))?
                - (0..n)
                    .map(|s| conn.get(&[s, k]) * gc.get(&[m, j, s]))
                    .sum::<f64>();
            dn.set(&idx, v);
        }
        bundle.barthel = Some(Tensor::from_fn(3, n, |i| {
            dn.get(&[i[0], i[1], i[2]]) - dn.get(&[i[0], i[2], i[1]])
        }));
    }

    if !has(TensorKind::Chern) {
        return Ok(bundle);
    }
    // δ_j g_sk as jets
    let mut delta: Vec<Vec<Vec<Jet>>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut dj: Vec<Vec<Jet>> = Vec::with_capacity(n);
        for s in 0..n {
            let mut row = Vec::with_capacity(n);
            for k in 0..n {
                if k < s {
                    let v: Jet = dj[k][s].clone();
                    row.push(v);
                    continue;
                }
                let mut acc = gj[s][k].derivative(Var::X(j))?;
                let gy: Vec<Jet> = (0..n)
                    .map(|m| gj[s][k].derivative(Var::Y(m)))
                    .collect::<std::result::Result<_, _>>()?;
                for m in 0..n {
                    acc = acc.sub(&nj[m][j].mul(&gy[m]));
                }
                row.push(acc);
            }
            dj.push(row);
        }
        delta.push(dj);
    }
    let mut gamma_j: Vec<Vec<Vec<Jet>>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut gi: Vec<Vec<Jet>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut row = Vec::with_capacity(n);
            for k in 0..n {
                if k < j {
                    row.push(gi[k][j].clone());
                    continue;
                }
                let mut acc: Option<Jet> = None;
                for s in 0..n {
                    let t = delta[j][s][k].add(&delta[k][j][s]).sub(&delta[s][j][k]);
                    let t = ginv_j[i][s].mul(&t);
                    acc = Some(match acc {
                        None => t,
                        Some(a) => a.add(&t),
                    });
                }
                row.push(acc.expect("n >= 1").scale(0.5));
            }
            gi.push(row);
        }
        gamma_j.push(gi);
    }
    let gamma = Tensor::from_fn(3, n, |i| gamma_j[i[0]][i[1]][i[2]].value());
    bundle.mixed_landsberg = Some(Tensor::from_fn(3, n, |i| gc.get(i) - gamma.get(i)));
    bundle.chern = Some(gamma.clone());

    if has(TensorKind::ChernHv) {
        let mut ps = Tensor::zeros(4, n);
        for idx in ps.clone().indices() {
            ps.set(
                &idx,
                gamma_j[idx[0]][idx[1]][idx[2]].first_partial(Var::Y(idx[3]))?,
            );
        }
        bundle.chern_hv = Some(ps);
    }

    if has(TensorKind::ChernH) {
        // dgam[h][i][j][k] = δ_k Γ^h_ij
        let mut dgam = Tensor::zeros(4, n);
        for idx in dgam.clone().indices() {
            let (h, i, j, k) = (idx[0], idx[1], idx[2], idx[3]);
            let gj_ = &gamma_j[h][i][j];
            let mut v = gj_.first_partial(Var::X(k))?;
            for m in 0..n {
                v -= conn.get(&[m, k]) * gj_.first_partial(Var::Y(m))?;
            }
            dgam.set(&idx, v);
        }
        let rs = Tensor::from_fn(4, n, |ix| {
            let (h, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
            let mut v = dgam.get(&[h, i, j, k]) - dgam.get(&[h, i, k, j]);
            for m in 0..n {
                v += gamma.get(&[h, m, k]) * gamma.get(&[m, i, j])
                    - gamma.get(&[h, m, j]) * gamma.get(&[m, i, k]);
            }
            convention.rs_sign * v
        });
        if has(TensorKind::ChernLowered) {
            let g = &bundle.g;
            bundle.chern_lowered = Some(Tensor::from_fn(4, n, |ix| {
                (0..n)
                    .map(|h| g.get(&[ix[0], h]) * rs.get(&[h, ix[1], ix[2], ix[3]]))
                    .sum()
            }));
        }
        if has(TensorKind::CartanH) {
            let (ginv, c, rb) = (
                &bundle.g_inv,
                bundle.cartan.as_ref().expect("cartan computed"),
                bundle.barthel.as_ref().expect("barthel computed"),
            );
            bundle.cartan_h = Some(Tensor::from_fn(4, n, |ix| {
                let (h, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
                let mut v = rs.get(ix);
                for m in 0..n {
                    for s in 0..n {
                        v += ginv.get(&[h, m]) * c.get(&[m, i, s]) * rb.get(&[s, j, k]);
                    }
                }
                v
            }));
        }
        bundle.chern_h = Some(rs);
    }
    Ok(bundle)
}

/// Every tensor at the given orders.
pub fn bundle(spec: &MetricSpec, p: &PointState, orders: Orders) -> Result<GeometryBundle> {
    compute(spec, p, orders, &TensorKind::ALL, Convention::default())
}

/// `(g_ij, g^ij, condition number)`.
pub fn fundamental_tensor(
    spec: &MetricSpec,
    p: &PointState,
    orders: Orders,
) -> Result<(Tensor, Tensor, f64)> {
    let b = compute(
        spec,
        p,
        orders,
        &[TensorKind::Metric],
        Convention::default(),
    )?;
    Ok((b.g, b.g_inv, b.condition))
}

/// `(G^i, N^i_j)`.
pub fn spray_and_connection(
    spec: &MetricSpec,
    p: &PointState,
    orders: Orders,
) -> Result<(Tensor, Tensor)> {
    let b = compute(
        spec,
        p,
        orders,
        &[TensorKind::Spray, TensorKind::Connection],
        Convention::default(),
    )?;
    Ok((b.spray.expect("computed"), b.connection.expect("computed")))
}

/// `(Gc^i_jk, Gb^h_ijk)`.
pub fn berwald_tensors(
    spec: &MetricSpec,
    p: &PointState,
    orders: Orders,
) -> Result<(Tensor, Tensor)> {
    let b = compute(
        spec,
        p,
        orders,
        &[TensorKind::BerwaldConnection, TensorKind::Berwald],
        Convention::default(),
    )?;
    Ok((
        b.berwald_connection.expect("computed"),
        b.berwald.expect("computed"),
    ))
}

/// `(C_ijk, L_ijk)`.
pub fn cartan_landsberg(
    spec: &MetricSpec,
    p: &PointState,
    orders: Orders,
) -> Result<(Tensor, Tensor)> {
    let b = compute(
        spec,
        p,
        orders,
        &[TensorKind::Cartan, TensorKind::Landsberg],
        Convention::default(),
    )?;
    Ok((b.cartan.expect("computed"), b.landsberg.expect("computed")))
}

/// `(Γ^i_jk, Λ^i_jk)`.
pub fn chern_connection(
    spec: &MetricSpec,
    p: &PointState,
    orders: Orders,
) -> Result<(Tensor, Tensor)> {
    let b = compute(spec, p, orders, &[TensorKind::Chern], Convention::default())?;
    Ok((
        b.chern.expect("computed"),
        b.mixed_landsberg.expect("computed"),
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct Curvatures {
    pub chern_h: Tensor,
    pub chern_hv: Tensor,
    pub barthel: Tensor,
    pub cartan_h: Tensor,
    pub chern_lowered: Tensor,
}

pub fn curvatures(spec: &MetricSpec, p: &PointState, orders: Orders) -> Result<Curvatures> {
    let kinds = [
        TensorKind::ChernH,
        TensorKind::ChernHv,
        TensorKind::Barthel,
        TensorKind::CartanH,
        TensorKind::ChernLowered,
    ];
    let b = compute(spec, p, orders, &kinds, Convention::default())?;
    Ok(Curvatures {
        chern_h: b.chern_h.expect("computed"),
        chern_hv: b.chern_hv.expect("computed"),
        barthel: b.barthel.expect("computed"),
        cartan_h: b.cartan_h.expect("computed"),
        chern_lowered: b.chern_lowered.expect("computed"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_metric;
    use approx::assert_relative_eq;

    fn point(x: &[f64], y: &[f64]) -> PointState {
        PointState::new(x.to_vec(), y.to_vec())
    }

    #[test]
    fn euclidean_is_flat() {
        let m = parse_metric("dim = 3\nE = y1^2 + y2^2 + y3^2").unwrap();
        let b = bundle(&m, &point(&[0.0; 3], &[1.0, 2.0, 3.0]), Orders::default()).unwrap();
        assert_eq!(
            b.g,
            Tensor::from_fn(2, 3, |i| if i[0] == i[1] { 1.0 } else { 0.0 })
        );
        for (_, t) in b.tensors().into_iter().skip(2) {
            assert!(t.max_abs() <= 1e-12);
        }
    }

    #[test]
    fn hyperbolic_christoffel_symbols() {
        let m = parse_metric("dim = 2\nE = y1^2 + exp(2*x1)*y2^2").unwrap();
        let x1: f64 = 0.3;
        let (gam, lam) =
            chern_connection(&m, &point(&[x1, -0.2], &[0.7, 1.1]), Orders::default()).unwrap();
        assert_relative_eq!(gam.get(&[0, 1, 1]), -(2.0 * x1).exp(), max_relative = 1e-12);
        assert_relative_eq!(gam.get(&[1, 0, 1]), 1.0, max_relative = 1e-12);
        assert_relative_eq!(gam.get(&[1, 1, 0]), 1.0, max_relative = 1e-12);
        assert!(gam.get(&[0, 0, 0]).abs() < 1e-12);
        assert!(lam.max_abs() < 1e-12);
    }

    #[test]
    fn requirement_table_is_enforced() {
        let m = parse_metric("dim = 2\nE = y1^2 + y2^2").unwrap();
        let p = point(&[0.0; 2], &[1.0; 2]);
        let err = compute(
            &m,
            &p,
            Orders::new(2, 4),
            &[TensorKind::Berwald],
            Convention::default(),
        )
        .unwrap_err();
        assert!(matches!(err, FinslerError::InsufficientOrders { .. }));
        assert!(compute(
            &m,
            &p,
            Orders::new(0, 2),
            &[TensorKind::Metric],
            Convention::default()
        )
        .is_ok());
    }

    #[test]
    fn working_orders_are_exact() {
        // Values at the minimal internal orders agree with a much larger box.
        let m = parse_metric("dim = 2\nE = sqrt(exp(-x1*x2)*y1^4 + y2^4 + x1*y1^2*y2^2)").unwrap();
        let p = point(&[0.3, 0.4], &[1.1, 0.8]);
        let small = bundle(&m, &p, Orders::new(2, 6)).unwrap();
        let mut big = compute(
            &m,
            &p,
            Orders::new(3, 8),
            &TensorKind::ALL,
            Convention::default(),
        )
        .unwrap();
        big.orders = small.orders;
        for ((name, a), (_, b)) in small.tensors().into_iter().zip(big.tensors()) {
            for (u, v) in a.data().iter().zip(b.data()) {
                assert!(
                    (u - v).abs() <= 1e-12 * (1.0 + v.abs()),
                    "{name}: {u} vs {v}"
                );
            }
        }
    }

    #[test]
    fn degenerate_metric_refused() {
        let m = parse_metric("dim = 2\nE = y1^2").unwrap();
        let err =
            fundamental_tensor(&m, &point(&[0.0; 2], &[1.0; 2]), Orders::default()).unwrap_err();
        assert!(matches!(err, FinslerError::Degenerate(_)));
    }

    #[test]
    fn orders_parsing() {
        assert_eq!(parse_orders("2, 6").unwrap(), Orders::new(2, 6));
        assert!(parse_orders("2").is_err());
        assert!(parse_orders("a,b").is_err());
    }
}
