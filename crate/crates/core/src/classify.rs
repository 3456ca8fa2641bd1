//! Berwald / Landsberg classification from pointwise tensor magnitudes.

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::dsl::{MetricSpec, PointState};
use crate::error::Result;
use crate::geometry::{compute, Convention, GeometryBundle, TensorKind};
use crate::jet::Orders;

pub const DEFAULT_CLASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Berwald,
    LandsbergNotBerwald,
    NonLandsberg,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Berwald => "Berwald",
            Verdict::LandsbergNotBerwald => "Landsberg-not-Berwald",
            Verdict::NonLandsberg => "non-Landsberg",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Unanimous verdict, or `Mixed` when the points disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Consensus {
    Unanimous(Verdict),
    Mixed,
}

impl fmt::Display for Consensus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Consensus::Unanimous(v) => v.fmt(f),
            Consensus::Mixed => f.write_str("mixed"),
        }
    }
}

impl Serialize for Consensus {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointVerdict {
    pub point: PointState,
    pub max_berwald: f64,
    pub max_landsberg: f64,
    /// `max|Gb|·|y|∞ / max|∂N/∂y|`: the Berwald tensor against the connection it differentiates.
    pub berwald_ratio: f64,
    /// `2·max|L|·|y|∞ / (max|y_h|·max|∂N/∂y|)`, comparable with `berwald_ratio`.
    pub landsberg_ratio: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub tolerance: f64,
    pub points: Vec<PointVerdict>,
    pub consensus: Consensus,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Scale-free magnitudes `(berwald_ratio, landsberg_ratio)` for a bundle
/// holding the Berwald and Landsberg tensors.
pub fn ratios(bundle: &GeometryBundle) -> Result<(f64, f64)> {
    let gb = bundle.tensor(TensorKind::Berwald)?.max_abs();
    let l = bundle.tensor(TensorKind::Landsberg)?.max_abs();
    let gc = bundle.tensor(TensorKind::BerwaldConnection)?.max_abs();
    let y = bundle.point.y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let yl = bundle.y_lower.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((ratio(gb * y, gc), ratio(2.0 * l * y, yl * gc)))
}

pub fn classify_bundle(bundle: &GeometryBundle, tol: f64) -> Result<PointVerdict> {
    let (berwald_ratio, landsberg_ratio) = ratios(bundle)?;
    let verdict = if berwald_ratio <= tol {
        Verdict::Berwald
    } else if landsberg_ratio <= tol {
        Verdict::LandsbergNotBerwald
    } else {
        Verdict::NonLandsberg
    };
    Ok(PointVerdict {
        point: bundle.point.clone(),
        max_berwald: bundle.tensor(TensorKind::Berwald)?.max_abs(),
        max_landsberg: bundle.tensor(TensorKind::Landsberg)?.max_abs(),
        berwald_ratio,
        landsberg_ratio,
        verdict,
    })
}

pub fn consensus(verdicts: impl IntoIterator<Item = Verdict>) -> Consensus {
    let mut it = verdicts.into_iter();
    match it.next() {
        None => Consensus::Mixed,
        Some(first) => {
            if it.all(|v| v == first) {
                Consensus::Unanimous(first)
            } else {
                Consensus::Mixed
            }
        }
    }
}

pub fn classify(
    spec: &MetricSpec,
    points: &[PointState],
    orders: Orders,
    tol: f64,
) -> Result<Classification> {
    let kinds = [TensorKind::Berwald, TensorKind::Landsberg];
    let verdicts = points
        .par_iter()
        .map(|p| {
            classify_bundle(
                &compute(spec, p, orders, &kinds, Convention::default())?,
                tol,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let consensus = consensus(verdicts.iter().map(|v| v.verdict));
    Ok(Classification {
        tolerance: tol,
        points: verdicts,
        consensus,
    })
}
