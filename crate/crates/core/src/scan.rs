//! Grid scans of nullity indices with per-point structural checks.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{ratios, DEFAULT_CLASS_TOL};
use crate::dsl::{MetricSpec, PointState};
use crate::error::{FinslerError, Result};
use crate::geometry::{compute, Convention, GeometryBundle, TensorKind};
use crate::jet::{Orders, Var};
use crate::nullity::{
    kernel_space, nullity_space, relative_residual, subspace_eq, subspace_leq, system, vanishes,
    CurvatureKind, Mode, Subspace,
};
use crate::sampling::BOUNDARY_MARGIN;

/// Tolerance on basis-vector distances when comparing subspaces.
pub const SUBSPACE_TOL: f64 = 1e-8;

/// Scale used for the ray-invariance check.
pub const RAY_SCALE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub var: String,
    #[serde(skip)]
    slot: Var,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64
        }
    }
}

/// Axes of a scan; unlisted coordinates stay at the base point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

fn parse_var(name: &str, dim: usize) -> Result<Var> {
    let bad = || {
        FinslerError::InvalidArgument(format!(
            "grid axis `{name}` is not one of x1..x{dim}, y1..y{dim}"
        ))
    };
    let (kind, num) = name.split_at(name.char_indices().nth(1).map_or(name.len(), |(i, _)| i));
    let i: usize = num.parse().map_err(|_| bad())?;
    if i == 0 || i > dim {
        return Err(bad());
    }
    match kind {
        "x" => Ok(Var::X(i - 1)),
        "y" => Ok(Var::Y(i - 1)),
        _ => Err(bad()),
    }
}

fn parse_number(s: &str, item: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| {
            FinslerError::InvalidArgument(format!(
                "grid entry `{item}`: `{}` is not a finite number",
                s.trim()
            ))
        })
}

impl Grid {
    /// Parses `axis=lo:hi:count` and `axis=value` items separated by commas.
    pub fn parse(s: &str, dim: usize) -> Result<Grid> {
        let mut axes: Vec<Axis> = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (name, range) = item.split_once('=').ok_or_else(|| {
                FinslerError::InvalidArgument(format!(
                    "grid entry `{item}` is not `axis=lo:hi:count`"
                ))
            })?;
            let name = name.trim();
            let slot = parse_var(name, dim)?;
            if axes.iter().any(|a| a.slot == slot) {
                return Err(FinslerError::InvalidArgument(format!(
                    "grid axis `{name}` given twice"
                )));
            }
            let parts: Vec<&str> = range.split(':').collect();
            let (lo, hi, count) = match parts.as_slice() {
                [v] => {
                    let v = parse_number(v, item)?;
                    (v, v, 1)
                }
                [lo, hi, count] => {
                    let count: usize = count.trim().parse().map_err(|_| {
                        FinslerError::InvalidArgument(format!(
                            "grid entry `{item}`: count must be a positive integer"
                        ))
                    })?;
                    if count == 0 {
                        return Err(FinslerError::InvalidArgument(format!(
                            "grid entry `{item}`: count must be positive"
                        )));
                    }
                    (parse_number(lo, item)?, parse_number(hi, item)?, count)
                }
                _ => {
                    return Err(FinslerError::InvalidArgument(format!(
                        "grid entry `{item}` is not `axis=lo:hi:count`"
                    )))
                }
            };
            axes.push(Axis {
                var: name.to_string(),
                slot,
                lo,
                hi,
                count,
            });
        }
        if axes.is_empty() {
            return Err(FinslerError::InvalidArgument("grid has no axes".into()));
        }
        Ok(Grid { axes })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-indices in lexicographic order, last axis fastest.
    pub fn indices(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.len());
        let mut idx = vec![0usize; self.axes.len()];
        for _ in 0..self.len() {
            out.push(idx.clone());
            for (slot, axis) in idx.iter_mut().zip(&self.axes).rev() {
                *slot += 1;
                if *slot < axis.count {
                    break;
                }
                *slot = 0;
            }
        }
        out
    }

    pub fn point(&self, base: &PointState, idx: &[usize]) -> PointState {
        let mut p = base.clone();
        for (axis, &i) in self.axes.iter().zip(idx) {
            match axis.slot {
                Var::X(k) => p.x[k] = axis.value(i),
                Var::Y(k) => p.y[k] = axis.value(i),
            }
        }
        p
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .axes
            .iter()
            .map(|a| {
                if a.count == 1 {
                    format!("{}={}", a.var, a.lo)
                } else {
                    format!("{}={}:{}:{}", a.var, a.lo, a.hi, a.count)
                }
            })
            .collect();
        f.write_str(&items.join(","))
    }
}

/// Midpoint of the metric's sampling box.
pub fn box_center(spec: &MetricSpec) -> PointState {
    let mid = |r: &[(f64, f64)]| r.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    PointState::new(mid(&spec.sampling.x), mid(&spec.sampling.y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub orders: Orders,
    pub rank_tol: f64,
    pub class_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            orders: Orders::default(),
            rank_tol: crate::nullity::DEFAULT_RANK_TOL,
            class_tol: DEFAULT_CLASS_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorNullity {
    pub tensor: CurvatureKind,
    pub mu: usize,
    pub subspace: Subspace,
}

/// Structural properties every nullity configuration must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralChecks {
    /// h-curvature nullity inside the Barthel-curvature nullity.
    pub nullity_in_barthel: bool,
    /// h-curvature nullity inside the h-curvature kernel.
    pub nullity_in_kernel: bool,
    /// h-curvature nullity equal to the Cartan h-curvature nullity.
    pub nullity_matches_cartan: bool,
    /// h-curvature nullity index differs from n − 1.
    pub index_not_n_minus_1: bool,
    /// All nullity spaces unchanged under `y → 2y`.
    pub ray_invariant: bool,
    /// `(Gc − Γ)^a_hk W^h = 0` for every hv-nullity vector `W`.
    pub hv_nullity_annihilates_mixed: bool,
    /// Residual of `y` in the hv-nullity system, relative to its top singular value.
    pub y_hv_residual: f64,
    pub landsberg_ratio: f64,
    /// `y ∈ N(hv) ⟺ L ≈ 0`.
    pub landsberg_characterization: bool,
}

impl StructuralChecks {
    pub fn all_pass(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let flags = [
            ("nullity_in_barthel", self.nullity_in_barthel),
            ("nullity_in_kernel", self.nullity_in_kernel),
            ("nullity_matches_cartan", self.nullity_matches_cartan),
            ("index_not_n_minus_1", self.index_not_n_minus_1),
            ("ray_invariant", self.ray_invariant),
            (
                "hv_nullity_annihilates_mixed",
                self.hv_nullity_annihilates_mixed,
            ),
            (
                "landsberg_characterization",
                self.landsberg_characterization,
            ),
        ];
        flags
            .into_iter()
            .filter(|(_, ok)| !ok)
            .map(|(n, _)| n)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRecord {
    /// Position in grid order (or in the supplied point list).
    pub index: usize,
    /// Per-axis index; empty for point-list scans.
    pub grid_index: Vec<usize>,
    pub point: PointState,
    pub nullity: Vec<TensorNullity>,
    pub checks: StructuralChecks,
}

impl ScanRecord {
    pub fn mu(&self, kind: CurvatureKind) -> Option<usize> {
        self.nullity.iter().find(|t| t.tensor == kind).map(|t| t.mu)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub axis: String,
    pub from_index: usize,
    pub to_index: usize,
    pub from_mu: usize,
    pub to_mu: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSummary {
    pub tensor: CurvatureKind,
    /// Nullity index → number of points.
    pub counts: BTreeMap<usize, usize>,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub grid: Option<Grid>,
    pub base: Option<PointState>,
    pub tensors: Vec<CurvatureKind>,
    pub rank_tol: f64,
    pub total: usize,
    pub skipped_domain: usize,
    pub skipped_boundary: usize,
    pub records: Vec<ScanRecord>,
    pub summary: Vec<IndexSummary>,
    pub checks_passed: bool,
}

impl ScanReport {
    pub fn failed_records(&self) -> impl Iterator<Item = &ScanRecord> {
        self.records.iter().filter(|r| !r.checks.all_pass())
    }
}

fn mixed_annihilated(b: &GeometryBundle, w: &Subspace) -> bool {
    let lambda = b.mixed_landsberg.as_ref().expect("computed with chern");
    let n = b.dim();
    let scale = lambda.max_abs();
    w.basis.iter().all(|v| {
        let mut worst = 0.0f64;
        for a in 0..n {
            for k in 0..n {
                let s: f64 = (0..n).map(|h| lambda.get(&[a, h, k]) * v[h]).sum();
                worst = worst.max(s.abs());
            }
        }
        worst <= SUBSPACE_TOL * scale + 1e-12
    })
}

const ALL_KINDS: [TensorKind; 5] = [
    TensorKind::ChernH,
    TensorKind::ChernHv,
    TensorKind::Barthel,
    TensorKind::CartanH,
    TensorKind::Landsberg,
];

fn nullities(b: &GeometryBundle, rank_tol: f64) -> Result<HashMap<CurvatureKind, Subspace>> {
    CurvatureKind::ALL
        .into_iter()
        .map(|k| Ok((k, nullity_space(b, k, rank_tol)?)))
        .collect()
}

/// Nullity indices and structural checks at one point.
pub fn scan_point(
    spec: &MetricSpec,
    p: &PointState,
    kinds: &[CurvatureKind],
    opts: ScanOptions,
) -> Result<ScanRecord> {
    let b = compute(spec, p, opts.orders, &ALL_KINDS, Convention::default())?;
    let scaled = compute(
        spec,
        &p.scale_y(RAY_SCALE),
        opts.orders,
        &ALL_KINDS,
        Convention::default(),
    )?;
    let spaces = nullities(&b, opts.rank_tol)?;
    let spaces2 = nullities(&scaled, opts.rank_tol)?;
    let nr = &spaces[&CurvatureKind::ChernH];
    let kernel = kernel_space(&b, CurvatureKind::ChernH, opts.rank_tol)?;
    let np = &spaces[&CurvatureKind::ChernHv];

    let (hv_system, _) = system(&b, CurvatureKind::ChernHv, Mode::Nullity)?;
    let y_hv_residual = if vanishes(&b, CurvatureKind::ChernHv)? {
        0.0
    } else {
        relative_residual(&hv_system, &p.y)
    };
    let (_, landsberg_ratio) = ratios(&b)?;
    let y_in_np = y_hv_residual <= 10.0 * opts.rank_tol;

    let checks = StructuralChecks {
        nullity_in_barthel: subspace_leq(nr, &spaces[&CurvatureKind::Barthel], SUBSPACE_TOL),
        nullity_in_kernel: subspace_leq(nr, &kernel, SUBSPACE_TOL),
        nullity_matches_cartan: subspace_eq(nr, &spaces[&CurvatureKind::CartanH], SUBSPACE_TOL),
        index_not_n_minus_1: spec.dim < 2 || nr.rank != spec.dim - 1,
        ray_invariant: CurvatureKind::ALL
            .iter()
            .all(|k| subspace_eq(&spaces[k], &spaces2[k], SUBSPACE_TOL)),
        hv_nullity_annihilates_mixed: mixed_annihilated(&b, np),
        y_hv_residual,
        landsberg_ratio,
        landsberg_characterization: y_in_np == (landsberg_ratio <= opts.class_tol),
    };
    let nullity = kinds
        .iter()
        .map(|k| TensorNullity {
            tensor: *k,
            mu: spaces[k].rank,
            subspace: spaces[k].clone(),
        })
        .collect();
    Ok(ScanRecord {
        index: 0,
        grid_index: Vec::new(),
        point: p.clone(),
        nullity,
        checks,
    })
}

fn summarize(
    kinds: &[CurvatureKind],
    records: &[ScanRecord],
    grid: Option<&Grid>,
) -> Vec<IndexSummary> {
    let by_index: HashMap<&[usize], &ScanRecord> = records
        .iter()
        .filter(|r| !r.grid_index.is_empty())
        .map(|r| (r.grid_index.as_slice(), r))
        .collect();
    kinds
        .iter()
        .map(|&k| {
            let mut counts = BTreeMap::new();
            for r in records {
                *counts.entry(r.mu(k).expect("scanned kind")).or_insert(0) += 1;
            }
            let mut transitions = Vec::new();
            if let Some(grid) = grid {
                for r in records {
                    for (a, axis) in grid.axes.iter().enumerate() {
                        let mut next = r.grid_index.clone();
                        next[a] += 1;
                        if let Some(s) = by_index.get(next.as_slice()) {
                            let (from, to) = (r.mu(k).expect("scanned"), s.mu(k).expect("scanned"));
                            if from != to {
                                transitions.push(Transition {
                                    axis: axis.var.clone(),
                                    from_index: r.index,
                                    to_index: s.index,
                                    from_mu: from,
                                    to_mu: to,
                                });
                            }
                        }
                    }
                }
            }
            IndexSummary {
                tensor: k,
                counts,
                transitions,
            }
        })
        .collect()
}

fn dedup(kinds: &[CurvatureKind]) -> Vec<CurvatureKind> {
    let set: BTreeSet<CurvatureKind> = kinds.iter().copied().collect();
    if set.is_empty() {
        CurvatureKind::ALL.to_vec()
    } else {
        set.into_iter().collect()
    }
}

fn run(
    spec: &MetricSpec,
    points: Vec<(Vec<usize>, PointState)>,
    kinds: &[CurvatureKind],
    opts: ScanOptions,
) -> Result<(Vec<ScanRecord>, usize, usize)> {
    let total = points.len();
    let mut skipped_domain = 0;
    let mut skipped_boundary = 0;
    let mut admissible = Vec::new();
    for (i, (gi, p)) in points.into_iter().enumerate() {
        if spec.check_point(&p).is_err() {
            skipped_domain += 1;
        } else if !matches!(spec.boundary_distance(&p), Ok(d) if d > BOUNDARY_MARGIN) {
            skipped_boundary += 1;
        } else {
            admissible.push((i, gi, p));
        }
    }
    if admissible.is_empty() {
        return Err(FinslerError::Domain(format!(
            "no admissible scan points: {total} points, {skipped_domain} outside the domain, \
             {skipped_boundary} within {BOUNDARY_MARGIN:e} of a domain boundary"
        )));
    }
    let records = admissible
        .into_par_iter()
        .map(|(i, gi, p)| {
            let mut r = scan_point(spec, &p, kinds, opts)?;
            r.index = i;
            r.grid_index = gi;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((records, skipped_domain, skipped_boundary))
}

/// Scans a grid around `base` (the sampling-box center if `None`).
pub fn grid_scan(
    spec: &MetricSpec,
    grid: &Grid,
    base: Option<&PointState>,
    kinds: &[CurvatureKind],
    opts: ScanOptions,
) -> Result<ScanReport> {
    let base = base.cloned().unwrap_or_else(|| box_center(spec));
    if base.dim() != spec.dim {
        return Err(FinslerError::InvalidArgument(format!(
            "base point has dimension {}, metric has {}",
            base.dim(),
            spec.dim
        )));
    }
    let kinds = dedup(kinds);
    let points = grid.indices().into_iter().map(|gi| {
        let p = grid.point(&base, &gi);
        (gi, p)
    });
    let (records, skipped_domain, skipped_boundary) = run(spec, points.collect(), &kinds, opts)?;
    let summary = summarize(&kinds, &records, Some(grid));
    let checks_passed = records.iter().all(|r| r.checks.all_pass());
    Ok(ScanReport {
        grid: Some(grid.clone()),
        base: Some(base),
        tensors: kinds,
        rank_tol: opts.rank_tol,
        total: grid.len(),
        skipped_domain,
        skipped_boundary,
        records,
        summary,
        checks_passed,
    })
}

/// Scans an explicit list of points.
pub fn scan_points(
    spec: &MetricSpec,
    points: &[PointState],
    kinds: &[CurvatureKind],
    opts: ScanOptions,
) -> Result<ScanReport> {
    let kinds = dedup(kinds);
    let list = points.iter().map(|p| (Vec::new(), p.clone())).collect();
    let (records, skipped_domain, skipped_boundary) = run(spec, list, &kinds, opts)?;
    let summary = summarize(&kinds, &records, None);
    let checks_passed = records.iter().all(|r| r.checks.all_pass());
    Ok(ScanReport {
        grid: None,
        base: None,
        tensors: kinds,
        rank_tol: opts.rank_tol,
        total: points.len(),
        skipped_domain,
        skipped_boundary,
        records,
        summary,
        checks_passed,
    })
}
