//! Golden suite for the built-in example metrics.
//!
//! Reference values are closed forms evaluated directly in `f64`, independent
//! of the jet pipeline.

use serde::Serialize;

use crate::builtins::builtin;
use crate::classify::{classify, Consensus, Verdict, DEFAULT_CLASS_TOL};
use crate::dsl::{MetricSpec, PointState};
use crate::error::{FinslerError, Result};
use crate::geometry::{compute, Convention, TensorKind};
use crate::jet::Orders;
use crate::nullity::{
    bracket_vertical, kernel_space, nullity_space, subspace_leq, CurvatureKind, Subspace,
    DEFAULT_RANK_TOL,
};
use crate::sampling::sample_points;
use crate::scan::{grid_scan, scan_points, Grid, ScanOptions, SUBSPACE_TOL};
use crate::verify::{verify, DEFAULT_IDENTITY_TOL};

/// Relative tolerance for closed-form comparisons.
pub const GOLDEN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproduceOptions {
    pub orders: Orders,
    pub convention: Convention,
    pub points: usize,
    pub seed: u64,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions {
            orders: Orders::default(),
            convention: Convention::default(),
            points: 20,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproduceItem {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproduceReport {
    pub items: Vec<ReproduceItem>,
    pub passed: bool,
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        (got - want).abs() / want.abs()
    }
}

fn metric(name: &str) -> Result<MetricSpec> {
    builtin(name)
        .ok_or_else(|| FinslerError::InvalidArgument(format!("built-in metric `{name}` missing")))
}

/// `(index, value)` pairs of the four nonzero independent h-curvature
/// components of the quartic example, layout `[h][i][j][k]`.
pub fn quartic_h_curvature(x2: f64, y1: f64, y2: f64) -> [([usize; 4], f64); 4] {
    let a = 4.0 * y2.powi(4) + x2 * x2 * y1.powi(4);
    [
        ([0, 0, 0, 1], a / (18.0 * x2 * x2 * y1 * y2.powi(3))),
        ([0, 1, 0, 1], -a / (9.0 * x2 * x2 * y2.powi(4))),
        (
            [1, 0, 0, 1],
            (4.0 * y1 * y1 * y2.powi(4) + x2 * x2 * y1.powi(6)) / (9.0 * y2.powi(6)),
        ),
        (
            [1, 1, 0, 1],
            -(4.0 * y1.powi(3) * y2.powi(4) + x2 * x2 * y1.powi(7)) / (18.0 * y2.powi(7)),
        ),
    ]
}

/// Nonzero nonlinear-connection components `N^i_j` of the three-dimensional example.
pub fn slice_connection(x: &[f64], y: &[f64]) -> [([usize; 2], f64); 5] {
    let (x1, x2) = (x[0], x[1]);
    let (y1, y2, y3) = (y[0], y[1], y[2]);
    let q = (4.0 * y2 - y3).powi(2);
    [
        ([0, 0], -0.5 * x2 * y1),
        ([1, 1], -4.0 * x1 * y2.powi(3) * (3.0 * y2 - y3) / (q * y3)),
        (
            [1, 2],
            2.0 * x1 * y2.powi(4) * (2.0 * y2 - y3) / (q * y3 * y3),
        ),
        ([2, 1], -x1 * y3 * (2.0 * y2 - y3) * y2 / q),
        ([2, 2], -2.0 * x1 * y2.powi(3) / q),
    ]
}

/// The twelve independent nonzero hv-curvature components of the
/// three-dimensional example, layout `[a][h][j][k]`.
pub fn slice_hv_curvature(x1: f64, y2: f64, y3: f64) -> [([usize; 4], f64); 12] {
    let d = (4.0 * y2 - y3).powi(4);
    let p1 = -y3.powi(3) + 8.0 * y3 * y3 * y2 - 24.0 * y2 * y2 * y3 + 24.0 * y2.powi(3);
    let p2 = y3 * y3 - 4.0 * y2 * y3 + 8.0 * y2 * y2;
    let p3 = -28.0 * y2 * y2 * y3 + 32.0 * y2.powi(3) + 8.0 * y3 * y3 * y2 - y3.powi(3);
    let p4 = -8.0 * y2 * y3 + 8.0 * y2 * y2 + y3 * y3;
    [
        ([1, 1, 1, 1], -12.0 * x1 * y2 * p1 / (y3 * d)),
        ([1, 1, 1, 2], 12.0 * x1 * y2 * y2 * p1 / (y3 * y3 * d)),
        ([2, 1, 1, 1], 6.0 * x1 * y3 * p2 / d),
        ([2, 1, 1, 2], -6.0 * x1 * y2 * p2 / d),
        ([1, 1, 2, 1], 6.0 * x1 * y2 * y2 * p3 / (y3 * y3 * d)),
        ([1, 1, 2, 2], -6.0 * x1 * y2.powi(3) * p3 / (y3.powi(3) * d)),
        ([2, 1, 2, 1], -12.0 * x1 * y2 * y2 * y3 / d),
        ([2, 1, 2, 2], 12.0 * x1 * y2.powi(3) / d),
        (
            [1, 2, 2, 1],
            -48.0 * x1 * y2.powi(5) * (2.0 * y2 - y3) / (y3.powi(3) * d),
        ),
        (
            [1, 2, 2, 2],
            48.0 * x1 * y2.powi(6) * (2.0 * y2 - y3) / (y3.powi(4) * d),
        ),
        ([2, 2, 2, 1], -6.0 * x1 * y2 * y2 * p4 / (y3 * d)),
        ([2, 2, 2, 2], 6.0 * x1 * y2.powi(3) * p4 / (y3 * y3 * d)),
    ]
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.iter().map(|c| c / n).collect()
}

/// `|v − c·t| / |v|` for the best scalar `c`.
pub fn proportionality_residual(v: &[f64], t: &[f64]) -> f64 {
    let tt: f64 = t.iter().map(|c| c * c).sum();
    let c = v.iter().zip(t).map(|(a, b)| a * b).sum::<f64>() / tt;
    let off: f64 = v
        .iter()
        .zip(t)
        .map(|(a, b)| (a - c * b).powi(2))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        f64::INFINITY
    } else {
        off / norm
    }
}

fn spans(s: &Subspace, vectors: &[Vec<f64>]) -> bool {
    s.rank == vectors.len() && vectors.iter().all(|v| s.distance(&unit(v)) <= SUBSPACE_TOL)
}

type Outcome = Result<(bool, String)>;

fn item_quartic_curvature(o: &ReproduceOptions) -> Outcome {
    let m = metric("ex1")?;
    let mut worst = 0.0f64;
    for p in sample_points(&m, o.points, o.seed)? {
        let b = compute(&m, &p, o.orders, &[TensorKind::ChernH], o.convention)?;
        let rs = b.tensor(TensorKind::ChernH)?;
        for (idx, want) in quartic_h_curvature(p.x[1], p.y[0], p.y[1]) {
            worst = worst.max(rel_err(rs.get(&idx), want));
        }
    }
    Ok((
        worst <= GOLDEN_TOL,
        format!("{} points, max relative error {worst:.3e}", o.points),
    ))
}

fn item_quartic_nullity(o: &ReproduceOptions) -> Outcome {
    let m = metric("ex1")?;
    let e = |i: usize| {
        (0..4)
            .map(|j| if i == j { 1.0 } else { 0.0 })
            .collect::<Vec<f64>>()
    };
    let mut points = sample_points(&m, o.points, o.seed)?;
    points.insert(0, PointState::new(vec![0.0, 1.0, 0.0, 0.0], vec![1.0; 4]));
    let mut notes = Vec::new();
    let mut ok = true;
    for p in &points {
        let b = compute(&m, p, o.orders, &[TensorKind::ChernH], o.convention)?;
        let nr = nullity_space(&b, CurvatureKind::ChernH, DEFAULT_RANK_TOL)?;
        let ker = kernel_space(&b, CurvatureKind::ChernH, DEFAULT_RANK_TOL)?;
        let dir = [2.0 * p.y[0] / p.y[1], 1.0, 0.0, 0.0];
        let checks = [
            (
                "nullity index 2 spanning e3, e4",
                spans(&nr, &[e(2), e(3)]) && nr.residual_ok,
            ),
            ("kernel dimension 3", ker.rank == 3),
            (
                "kernel contains (2y1/y2, 1, 0, 0)",
                ker.distance(&unit(&dir)) <= SUBSPACE_TOL,
            ),
            (
                "nullity strictly inside kernel",
                subspace_leq(&nr, &ker, SUBSPACE_TOL) && ker.rank > nr.rank,
            ),
        ];
        for (what, pass) in checks {
            if !pass {
                ok = false;
                if notes.len() < 4 && !notes.iter().any(|n: &String| n.starts_with(what)) {
                    notes.push(format!(
                        "{what}: failed at {p} (nullity {}, kernel {})",
                        nr.rank, ker.rank
                    ));
                }
            }
        }
    }
    let detail = if ok {
        format!("{} points", points.len())
    } else {
        notes.join("; ")
    };
    Ok((ok, detail))
}

fn item_slice_connection(o: &ReproduceOptions) -> Outcome {
    let m = metric("ex2")?;
    let mut worst = 0.0f64;
    for p in sample_points(&m, o.points, o.seed)? {
        let b = compute(&m, &p, o.orders, &[TensorKind::Connection], o.convention)?;
        let n = b.tensor(TensorKind::Connection)?;
        for (idx, want) in slice_connection(&p.x, &p.y) {
            worst = worst.max(rel_err(n.get(&idx), want));
        }
    }
    Ok((
        worst <= GOLDEN_TOL,
        format!("{} points, max relative error {worst:.3e}", o.points),
    ))
}

fn item_slice_hv_curvature(o: &ReproduceOptions) -> Outcome {
    let m = metric("ex2")?;
    let mut worst = 0.0f64;
    for p in sample_points(&m, o.points, o.seed)? {
        let b = compute(&m, &p, o.orders, &[TensorKind::ChernHv], o.convention)?;
        let ps = b.tensor(TensorKind::ChernHv)?;
        for (idx, want) in slice_hv_curvature(p.x[0], p.y[1], p.y[2]) {
            worst = worst.max(rel_err(ps.get(&idx), want));
        }
    }
    Ok((
        worst <= GOLDEN_TOL,
        format!(
            "{} points, 12 components, max relative error {worst:.3e}",
            o.points
        ),
    ))
}

fn item_slice_structure(o: &ReproduceOptions) -> Outcome {
    let m = metric("ex2")?;
    let base = PointState::new(vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 2.0]);
    let grid = Grid::parse("y3=1.5:2.5:11", 3)?;
    let opts = ScanOptions {
        orders: o.orders,
        ..ScanOptions::default()
    };
    let scan = grid_scan(&m, &grid, Some(&base), &[CurvatureKind::ChernHv], opts)?;
    let mut slice_ok = false;
    let mut off_ok = true;
    for r in &scan.records {
        let on_slice = (r.point.y[2] - 2.0 * r.point.y[1]).abs() < 1e-12;
        let s = &r.nullity[0].subspace;
        if on_slice {
            slice_ok = spans(s, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 2.0]]);
        } else if s.rank == 2 {
            off_ok = false;
        }
    }
    let b = compute(&m, &base, o.orders, &[TensorKind::Barthel], o.convention)?;
    let v = bracket_vertical(&b, &[1.0, 0.0, 0.0], &[0.0, 1.0, 2.0])?;
    let (y1, y2) = (base.y[0], base.y[1]);
    let target = [-y1 / 2.0, y2 / 2.0, y2 / 2.0];
    let prop = proportionality_residual(&v, &target);
    let nonzero = v.iter().any(|c| c.abs() > 1e-10);
    let ok = slice_ok && off_ok && nonzero && prop <= GOLDEN_TOL;
    Ok((
        ok,
        format!(
            "nullity 2 on slice: {slice_ok}; other index off slice: {off_ok}; bracket {v:?} vs direction {target:?}, \
             proportionality residual {prop:.3e}"
        ),
    ))
}

fn item_landsberg_not_berwald(o: &ReproduceOptions) -> Outcome {
    let m = metric("ex3")?;
    let points = sample_points(&m, o.points, o.seed)?;
    let (mut spray_err, mut l_ratio) = (0.0f64, 0.0f64);
    for p in &points {
        let b = compute(&m, p, o.orders, &[TensorKind::Landsberg], o.convention)?;
        let want = 0.5 * (p.y[0] * p.y[0] - p.y[1] * p.y[2]);
        let got = b.tensor(TensorKind::Spray)?.get(&[0]);
        spray_err = spray_err.max((got - want).abs() / want.abs().max(1.0));
        let yl = b.y_lower.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let scale = 0.5 * yl * b.tensor(TensorKind::Berwald)?.max_abs();
        l_ratio = l_ratio.max(b.tensor(TensorKind::Landsberg)?.max_abs() / scale);
    }
    let p = PointState::new(vec![0.0; 3], vec![0.0, 1.0, 1.0]);
    let b = compute(&m, &p, o.orders, &[TensorKind::Berwald], o.convention)?;
    let gb = b.tensor(TensorKind::Berwald)?.get(&[1, 1, 1, 1]);
    let gb_err = rel_err(gb, -3.0 / 16.0);
    let class = classify(&m, &points, o.orders, DEFAULT_CLASS_TOL)?;
    let verdict_ok = class.consensus == Consensus::Unanimous(Verdict::LandsbergNotBerwald);
    let ok = spray_err <= GOLDEN_TOL && l_ratio <= 1e-9 && gb_err <= GOLDEN_TOL && verdict_ok;
    Ok((
        ok,
        format!(
            "spray error {spray_err:.3e}; max|L|/scale {l_ratio:.3e}; Berwald component {gb:.12} \
             (error {gb_err:.3e}); verdict {}",
            class.consensus
        ),
    ))
}

const SUITE_METRICS: [&str; 5] = ["euclid3", "riem-hyperbolic", "ex1", "ex2", "ex3"];

fn item_identities(o: &ReproduceOptions) -> Outcome {
    let mut failures = Vec::new();
    for name in SUITE_METRICS {
        let r = verify(
            &metric(name)?,
            o.points,
            o.seed,
            o.orders,
            DEFAULT_IDENTITY_TOL,
        )?;
        failures.extend(
            r.failures()
                .map(|f| format!("{name}:{} ({:.3e})", f.name, f.max_residual)),
        );
    }
    let detail = if failures.is_empty() {
        format!("{} metrics", SUITE_METRICS.len())
    } else {
        failures.join(", ")
    };
    Ok((failures.is_empty(), detail))
}

fn item_structure(o: &ReproduceOptions) -> Outcome {
    let opts = ScanOptions {
        orders: o.orders,
        ..ScanOptions::default()
    };
    let mut failures = Vec::new();
    let mut count = 0;
    for name in SUITE_METRICS {
        let m = metric(name)?;
        let r = scan_points(&m, &sample_points(&m, o.points, o.seed)?, &[], opts)?;
        count += r.records.len();
        for rec in r.failed_records() {
            failures.push(format!(
                "{name} at {}: {}",
                rec.point,
                rec.checks.failures().join("+")
            ));
        }
    }
    let slice = grid_scan(
        &metric("ex2")?,
        &Grid::parse("y3=1.5:2.5:11", 3)?,
        Some(&PointState::new(vec![1.0; 3], vec![1.0, 1.0, 2.0])),
        &[],
        opts,
    )?;
    count += slice.records.len();
    for rec in slice.failed_records() {
        failures.push(format!(
            "ex2 at {}: {}",
            rec.point,
            rec.checks.failures().join("+")
        ));
    }
    let detail = if failures.is_empty() {
        format!("{count} scanned points")
    } else {
        failures.join("; ")
    };
    Ok((failures.is_empty(), detail))
}

type ItemFn = fn(&ReproduceOptions) -> Outcome;

const ITEMS: [(&str, ItemFn); 8] = [
    ("quartic h-curvature closed forms", item_quartic_curvature),
    ("quartic nullity and kernel", item_quartic_nullity),
    ("slice metric nonlinear connection", item_slice_connection),
    (
        "slice metric hv-curvature closed forms",
        item_slice_hv_curvature,
    ),
    ("slice metric hv-nullity and bracket", item_slice_structure),
    (
        "Landsberg metric that is not Berwald",
        item_landsberg_not_berwald,
    ),
    ("identity suite on built-in metrics", item_identities),
    ("structural nullity properties", item_structure),
];

/// Runs every golden item; failures and errors become report entries.
pub fn reproduce(o: &ReproduceOptions) -> ReproduceReport {
    let items: Vec<ReproduceItem> = ITEMS
        .iter()
        .enumerate()
        .map(|(i, (name, f))| {
            let (passed, detail) = match f(o) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            ReproduceItem {
                id: i + 1,
                name,
                passed,
                detail,
            }
        })
        .collect();
    let passed = items.iter().all(|i| i.passed);
    ReproduceReport { items, passed }
}
