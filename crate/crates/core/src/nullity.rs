//! Nullity and kernel subspaces of curvature tensors.
//!
//! Subspaces are expressed in the horizontal frame `h_i = ∂/∂x^i − N^m_i ∂/∂y^m`:
//! a basis vector `a` stands for `Σ a^i h_i`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dsl::PointState;
use crate::error::{FinslerError, Result};
use crate::geometry::{GeometryBundle, TensorKind};
use crate::tensor::Tensor;

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// A curvature tensor below this fraction of its natural scale is treated as
/// identically zero (its entries are then jet round-off).
pub const VANISHING_TOL: f64 = 1e-12;

/// Curvature tensors with a nullity notion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureKind {
    ChernH,
    ChernHv,
    Barthel,
    CartanH,
}

impl CurvatureKind {
    pub const ALL: [CurvatureKind; 4] = [
        CurvatureKind::ChernH,
        CurvatureKind::ChernHv,
        CurvatureKind::Barthel,
        CurvatureKind::CartanH,
    ];

    pub fn name(self) -> &'static str {
        self.tensor().name()
    }

    pub fn tensor(self) -> TensorKind {
        match self {
            CurvatureKind::ChernH => TensorKind::ChernH,
            CurvatureKind::ChernHv => TensorKind::ChernHv,
            CurvatureKind::Barthel => TensorKind::Barthel,
            CurvatureKind::CartanH => TensorKind::CartanH,
        }
    }

    /// Slot holding the X argument (contracted for nullity).
    pub fn nullity_slot(self) -> usize {
        match self {
            CurvatureKind::Barthel => 1,
            _ => 2,
        }
    }

    /// Slot holding the acted-on argument (contracted for the kernel).
    pub fn kernel_slot(self) -> Option<usize> {
        match self {
            CurvatureKind::ChernH | CurvatureKind::CartanH | CurvatureKind::ChernHv => Some(1),
            CurvatureKind::Barthel => None,
        }
    }
}

impl fmt::Display for CurvatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CurvatureKind {
    type Err = FinslerError;
    fn from_str(s: &str) -> Result<Self> {
        CurvatureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                FinslerError::InvalidArgument(format!(
                    "unknown curvature tensor `{s}` (chern-h, chern-hv, barthel, cartan-h)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Nullity,
    Kernel,
}

impl FromStr for Mode {
    type Err = FinslerError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nullity" => Ok(Mode::Nullity),
            "kernel" => Ok(Mode::Kernel),
            _ => Err(FinslerError::InvalidArgument(format!(
                "unknown mode `{s}` (nullity, kernel)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tensor: String,
    pub slot: usize,
    pub point: Option<PointState>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subspace {
    pub ambient: usize,
    /// Orthonormal basis vectors (columns of the basis matrix).
    pub basis: Vec<Vec<f64>>,
    pub rank: usize,
    pub tol: f64,
    /// Largest singular value of the defining system.
    pub sigma_max: f64,
    /// Smallest singular value kept as nonzero, relative to `sigma_max`.
    pub lowest_retained: Option<f64>,
    /// Largest singular value treated as zero, relative to `sigma_max`.
    pub highest_discarded: Option<f64>,
    /// `max_col ‖A·b‖` over basis columns.
    pub residual: f64,
    /// `residual ≤ 10·tol·sigma_max`.
    pub residual_ok: bool,
    pub provenance: Option<Provenance>,
}

impl Subspace {
    pub fn full(n: usize, tol: f64) -> Subspace {
        let basis = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Subspace {
            ambient: n,
            basis,
            rank: n,
            tol,
            sigma_max: 0.0,
            lowest_retained: None,
            highest_discarded: None,
            residual: 0.0,
            residual_ok: true,
            provenance: None,
        }
    }

    /// Basis as an `n × r` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.ambient, self.rank, |i, j| self.basis[j][i])
    }

    /// Distance from `v` to the subspace.
    pub fn distance(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        let b = self.matrix();
        let proj = &b * (b.transpose() * &v);
        (v - proj).norm()
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.distance(v) <= tol * norm.max(1.0)
    }

    fn with_provenance(mut self, p: Provenance) -> Subspace {
        self.provenance = Some(p);
        self
    }
}

/// Null space of `A` (rows of length `n`) by singular-value thresholding.
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> Result<Subspace> {
    let n = a.ncols();
    if n == 0 {
        return Err(FinslerError::InvalidArgument(
            "null space of a matrix with no columns".into(),
        ));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(FinslerError::Domain(
            "non-finite entries in null-space system".into(),
        ));
    }
    // Pad to at least n rows so the SVD yields a full right basis.
    let padded = if a.nrows() >= n {
        a.clone()
    } else {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().fold(0.0f64, |m, &s| m.max(s));
    if sigma_max == 0.0 {
        return Ok(Subspace::full(n, rel_tol));
    }
    let threshold = rel_tol * sigma_max;
    let mut basis = Vec::new();
    let (mut lowest, mut highest) = (None::<f64>, None::<f64>);
    for (i, &s) in sigma.iter().enumerate() {
        if s <= threshold {
            basis.push(v_t.row(i).iter().copied().collect::<Vec<f64>>());
            highest = Some(highest.map_or(s, |h| h.max(s)));
        } else {
            lowest = Some(lowest.map_or(s, |l| l.min(s)));
        }
    }
    let mut residual = 0.0f64;
    for b in &basis {
        let r = a * DVector::from_column_slice(b);
        residual = residual.max(r.norm());
    }
    Ok(Subspace {
        ambient: n,
        rank: basis.len(),
        basis,
        tol: rel_tol,
        sigma_max,
        lowest_retained: lowest.map(|s| s / sigma_max),
        highest_discarded: highest.map(|s| s / sigma_max),
        residual,
        residual_ok: residual <= 10.0 * rel_tol * sigma_max,
        provenance: None,
    })
}

/// Stacks `W ↦ T(…, W in `slot`, …)` over all other index tuples.
pub fn contraction_system(t: &Tensor, slot: usize) -> DMatrix<f64> {
    let n = t.dim();
    let rows = t.data().len() / n;
    let mut m = DMatrix::zeros(rows, n);
    // Row index: position of the remaining indices in row-major order.
    for (off, idx) in t.indices().enumerate() {
        let mut r = 0;
        for (s, &i) in idx.iter().enumerate() {
            if s != slot {
                r = r * n + i;
            }
        }
        m[(r, idx[slot])] = t.data()[off];
    }
    m
}

fn curvature(bundle: &GeometryBundle, kind: CurvatureKind) -> Result<&Tensor> {
    bundle.tensor(kind.tensor())
}

/// The defining system of the nullity or kernel space.
pub fn system(
    bundle: &GeometryBundle,
    kind: CurvatureKind,
    mode: Mode,
) -> Result<(DMatrix<f64>, usize)> {
    let t = curvature(bundle, kind)?;
    let slot = match mode {
        Mode::Nullity => kind.nullity_slot(),
        Mode::Kernel => kind.kernel_slot().ok_or_else(|| {
            FinslerError::InvalidArgument(format!(
                "`{kind}` has no acted-on slot, kernel mode is undefined"
            ))
        })?,
    };
    Ok((contraction_system(t, slot), slot))
}

pub fn subspace(
    bundle: &GeometryBundle,
    kind: CurvatureKind,
    mode: Mode,
    rel_tol: f64,
) -> Result<Subspace> {
    let (a, slot) = system(bundle, kind, mode)?;
    let provenance = Provenance {
        tensor: kind.name().into(),
        slot,
        point: Some(bundle.point.clone()),
    };
    if vanishes(bundle, kind)? {
        return Ok(Subspace::full(a.ncols(), rel_tol).with_provenance(provenance));
    }
    Ok(null_space(&a, rel_tol)?.with_provenance(provenance))
}

/// Scale a curvature of this kind would have if it were built from the
/// connection alone: `|Gc|²` for h-curvatures, `|Gc|/|y|` for the
/// hv-curvature and `|Gc|²·|y|` for the Barthel curvature.
fn natural_scale(bundle: &GeometryBundle, kind: CurvatureKind) -> f64 {
    let Ok(gc) = bundle.tensor(TensorKind::BerwaldConnection) else {
        return 0.0;
    };
    let gc = gc.max_abs();
    let y = bundle.point.y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match kind {
        CurvatureKind::ChernH | CurvatureKind::CartanH => gc * gc,
        CurvatureKind::ChernHv => gc / y,
        CurvatureKind::Barthel => gc * gc * y,
    }
}

/// True when the tensor is zero up to round-off relative to its natural scale.
pub fn vanishes(bundle: &GeometryBundle, kind: CurvatureKind) -> Result<bool> {
    let m = bundle.tensor(kind.tensor())?.max_abs();
    let scale = natural_scale(bundle, kind);
    Ok(m == 0.0 || (scale.is_finite() && m <= VANISHING_TOL * scale))
}

pub fn nullity_space(
    bundle: &GeometryBundle,
    kind: CurvatureKind,
    rel_tol: f64,
) -> Result<Subspace> {
    subspace(bundle, kind, Mode::Nullity, rel_tol)
}

pub fn kernel_space(
    bundle: &GeometryBundle,
    kind: CurvatureKind,
    rel_tol: f64,
) -> Result<Subspace> {
    subspace(bundle, kind, Mode::Kernel, rel_tol)
}

/// `‖A v̂‖ / σ_max` for the defining system (0 when the system vanishes).
pub fn relative_residual(a: &DMatrix<f64>, v: &[f64]) -> f64 {
    let v = DVector::from_column_slice(v);
    let norm = v.norm();
    let sigma_max = a
        .clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |m, &s| m.max(s));
    if sigma_max == 0.0 || norm == 0.0 {
        return 0.0;
    }
    (a * v).norm() / (sigma_max * norm)
}

/// True iff every basis vector of `a` lies in `b` up to `tol`.
pub fn subspace_leq(a: &Subspace, b: &Subspace, tol: f64) -> bool {
    assert_eq!(
        a.ambient, b.ambient,
        "subspaces of different ambient dimension"
    );
    a.basis.iter().all(|v| b.distance(v) <= tol)
}

pub fn subspace_eq(a: &Subspace, b: &Subspace, tol: f64) -> bool {
    a.rank == b.rank && subspace_leq(a, b, tol) && subspace_leq(b, a, tol)
}

/// `g`-orthogonal complement of `s` among horizontal vectors.
pub fn conullity(bundle: &GeometryBundle, s: &Subspace) -> Result<Subspace> {
    let n = bundle.dim();
    if s.rank == 0 {
        return Ok(Subspace::full(n, s.tol));
    }
    let g = DMatrix::from_row_slice(n, n, bundle.g.data());
    let m = s.matrix().transpose() * g;
    null_space(&m, s.tol)
}

/// Vertical part of `[a^j h_j, b^k h_k]` for constant frame coefficients:
/// `v^m = a^j b^k Rb^m_jk`.
pub fn bracket_vertical(bundle: &GeometryBundle, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let rb = bundle.tensor(TensorKind::Barthel)?;
    let n = bundle.dim();
    if a.len() != n || b.len() != n {
        return Err(FinslerError::InvalidArgument(format!(
            "bracket arguments must have length {n}"
        )));
    }
    Ok((0..n)
        .map(|m| {
            let mut v = 0.0;
            for j in 0..n {
                for k in 0..n {
                    v += a[j] * b[k] * rb.get(&[m, j, k]);
                }
            }
            v
        })
        .collect())
}

/// Coordinates `(v^i, −N^m_i v^i)` of `Σ v^i h_i` in the basis `∂/∂x, ∂/∂y`.
pub fn to_ttm(bundle: &GeometryBundle, v: &[f64]) -> Result<Vec<f64>> {
    let conn = bundle.tensor(TensorKind::Connection)?;
    let n = bundle.dim();
    let mut out = v.to_vec();
    out.extend((0..n).map(|m| -(0..n).map(|i| conn.get(&[m, i]) * v[i]).sum::<f64>()));
    Ok(out)
}
