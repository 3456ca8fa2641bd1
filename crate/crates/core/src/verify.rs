//! Numerical identity suite over sampled points.
//!
//! Each identity yields, per point, `max|lhs − rhs| / max(max Σ|terms|, floor)`
//! where the sum runs over the absolute values of the terms entering each
//! component, and `floor = 1e-10 / tol` turns near-zero comparisons into an
//! absolute `1e-10` test.

use rayon::prelude::*;
use serde::Serialize;

use crate::builtins;
use crate::classify::{ratios, DEFAULT_CLASS_TOL};
use crate::dsl::{MetricSpec, PointState};
use crate::error::Result;
use crate::geometry::{compute, Convention, GeometryBundle, TensorKind};
use crate::jet::Orders;
use crate::tensor::Tensor;

pub const DEFAULT_IDENTITY_TOL: f64 = 1e-8;

/// Largest absolute error tolerated when every term of an identity is tiny.
const ABSOLUTE_FLOOR: f64 = 1e-10;

/// Scale applied to `y` in the connection homogeneity check.
const HOMOGENEITY_LAMBDA: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResult {
    pub name: &'static str,
    pub statement: &'static str,
    /// Points at which the identity applied.
    pub points: usize,
    pub max_residual: f64,
    pub passed: bool,
    pub worst_point: Option<PointState>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub tolerance: f64,
    pub seed: u64,
    pub points: Vec<PointState>,
    pub identities: Vec<IdentityResult>,
    pub passed: bool,
}

impl IdentityReport {
    pub fn get(&self, name: &str) -> Option<&IdentityResult> {
        self.identities.iter().find(|r| r.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityResult> {
        self.identities.iter().filter(|r| !r.passed)
    }
}

/// Running `max|diff|` and `max scale` over the components of one identity.
#[derive(Debug, Clone, Copy, Default)]
struct Residual {
    diff: f64,
    scale: f64,
}

impl Residual {
    fn push(&mut self, diff: f64, scale: f64) {
        self.diff = self.diff.max(diff.abs());
        self.scale = self.scale.max(scale);
    }

    /// `lhs` and `rhs` given with the sum of absolute values of their terms.
    fn compare(&mut self, lhs: f64, lhs_terms: f64, rhs: f64, rhs_terms: f64) {
        self.push(lhs - rhs, lhs_terms + rhs_terms);
    }

    fn value(self, tol: f64) -> f64 {
        let r = self.diff / self.scale.max(ABSOLUTE_FLOOR / tol);
        if r.is_nan() {
            f64::INFINITY
        } else {
            r
        }
    }
}

type PointResiduals = Vec<(&'static str, Option<f64>)>;

const STATEMENTS: &[(&str, &str)] = &[
    ("cartan-y", "C_ijk y^k = 0"),
    ("landsberg-y", "L_ijk y^k = 0"),
    ("h-curvature-y", "Rs^h_ijk y^i = Rb^h_jk"),
    ("hv-curvature-y", "Ps^a_hjk y^j = Gc^a_hk - Γ^a_hk"),
    ("landsberg-link", "g_ma (Gc^a_hk - Γ^a_hk) = -L_mhk"),
    ("hv-curvature-y-vertical", "Ps^a_hjk y^k = 0"),
    ("bianchi", "Rs^h_ijk + Rs^h_jki + Rs^h_kij = 0"),
    (
        "pair-symmetry",
        "Rlow_wijk = Rlow_kjiw where the Barthel curvature vanishes",
    ),
    ("symmetry-metric", "g_ij = g_ji"),
    ("symmetry-chern", "Γ^i_jk = Γ^i_kj"),
    ("symmetry-hv-curvature", "Ps^a_hjk = Ps^a_jhk"),
    ("symmetry-berwald", "Gb^h_ijk totally symmetric"),
    ("symmetry-cartan", "C_ijk totally symmetric"),
    ("symmetry-landsberg", "L_ijk totally symmetric"),
    ("antisymmetry-h-curvature", "Rs^h_ijk = -Rs^h_ikj"),
    ("antisymmetry-barthel", "Rb^m_jk = -Rb^m_kj"),
    ("metric-inverse", "g_is g^sj = δ_i^j"),
    ("euler", "g_ij y^i y^j = E and y^i ∂E/∂y^i = 2E"),
    ("chern-y", "Γ^i_jk y^j = N^i_k"),
    ("homogeneity-energy", "E(x, λy) = λ² E(x, y)"),
    (
        "homogeneity-connection",
        "N(x, λy) = λ N(x, y) and Γ(x, λy) = Γ(x, y) for λ = 1.5",
    ),
    (
        "berwald-reduction",
        "Ps = 0 and Gc - Γ = 0 where Gb vanishes",
    ),
    (
        "riemannian-reduction",
        "Rs^h_ijk = R^h_ikj of the Levi-Civita connection",
    ),
];

fn statement(name: &str) -> &'static str {
    STATEMENTS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .expect("identity listed")
}

const PERMS3: [[usize; 3]; 5] = [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn symmetric3(t: &Tensor, lead: usize) -> Residual {
    let mut r = Residual::default();
    for idx in t.indices() {
        let (head, tail) = idx.split_at(lead);
        let a = t.get(&idx);
        for p in PERMS3 {
            let mut j = head.to_vec();
            j.extend(p.iter().map(|&s| tail[s]));
            let b = t.get(&j);
            r.compare(a, a.abs(), b, b.abs());
        }
    }
    r
}

fn swap_residual(t: &Tensor, s1: usize, s2: usize, sign: f64) -> Residual {
    let mut r = Residual::default();
    for idx in t.indices() {
        let mut j = idx.clone();
        j.swap(s1, s2);
        let (a, b) = (t.get(&idx), sign * t.get(&j));
        r.compare(a, a.abs(), b, b.abs());
    }
    r
}

/// Levi-Civita curvature of `E = y1² + e^{2x1} y2²`, hand-derived:
/// `Γ^1_22 = −e^{2x1}`, `Γ^2_12 = Γ^2_21 = 1`, all others zero.
pub fn hyperbolic_riemann(x1: f64) -> (Tensor, Tensor) {
    let e = (2.0 * x1).exp();
    let gamma = |a: usize, b: usize, c: usize| -> f64 {
        match (a, b, c) {
            (0, 1, 1) => -e,
            (1, 0, 1) | (1, 1, 0) => 1.0,
            _ => 0.0,
        }
    };
    // Only ∂_1 Γ^1_22 = −2e^{2x1} is nonzero.
    let dgamma = |d: usize, a: usize, b: usize, c: usize| -> f64 {
        if (d, a, b, c) == (0, 0, 1, 1) {
            -2.0 * e
        } else {
            0.0
        }
    };
    let christoffel = Tensor::from_fn(3, 2, |i| gamma(i[0], i[1], i[2]));
    // R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb
    let riemann = Tensor::from_fn(4, 2, |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        let mut v = dgamma(c, a, d, b) - dgamma(d, a, c, b);
        for m in 0..2 {
            v += gamma(a, c, m) * gamma(m, d, b) - gamma(a, d, m) * gamma(m, c, b);
        }
        v
    });
    (christoffel, riemann)
}

fn is_hyperbolic(spec: &MetricSpec) -> bool {
    builtins::builtin("riem-hyperbolic")
        .is_some_and(|h| h.energy == spec.energy && h.dim == spec.dim)
}

fn point_residuals(
    spec: &MetricSpec,
    b: &GeometryBundle,
    scaled: &GeometryBundle,
    tol: f64,
) -> Result<PointResiduals> {
    let n = b.dim();
    let y = &b.point.y;
    let t = |k| b.tensor(k);
    let (c, l, gb) = (
        t(TensorKind::Cartan)?,
        t(TensorKind::Landsberg)?,
        t(TensorKind::Berwald)?,
    );
    let (gamma, gc, rs) = (
        t(TensorKind::Chern)?,
        t(TensorKind::BerwaldConnection)?,
        t(TensorKind::ChernH)?,
    );
    let (ps, rb, rlow) = (
        t(TensorKind::ChernHv)?,
        t(TensorKind::Barthel)?,
        t(TensorKind::ChernLowered)?,
    );
    let conn = t(TensorKind::Connection)?;
    let lambda = b.mixed_landsberg.as_ref().expect("computed with chern");
    let mut out: PointResiduals = Vec::new();

    for (name, tensor) in [("cartan-y", c), ("landsberg-y", l)] {
        let mut r = Residual::default();
        for i in 0..n {
            for j in 0..n {
                let terms: Vec<f64> = (0..n).map(|k| tensor.get(&[i, j, k]) * y[k]).collect();
                r.compare(
                    terms.iter().sum(),
                    terms.iter().map(|v| v.abs()).sum(),
                    0.0,
                    0.0,
                );
            }
        }
        out.push((name, Some(r.value(tol))));
    }

    let mut r9 = Residual::default();
    let mut r11 = Residual::default();
    for h in 0..n {
        for j in 0..n {
            for k in 0..n {
                let terms: Vec<f64> = (0..n).map(|i| rs.get(&[h, i, j, k]) * y[i]).collect();
                let rbv = rb.get(&[h, j, k]);
                r9.compare(
                    terms.iter().sum(),
                    terms.iter().map(|v| v.abs()).sum(),
                    rbv,
                    rbv.abs(),
                );
                for i in 0..n {
                    let v = [
                        rs.get(&[h, i, j, k]),
                        rs.get(&[h, j, k, i]),
                        rs.get(&[h, k, i, j]),
                    ];
                    r11.compare(v.iter().sum(), v.iter().map(|x| x.abs()).sum(), 0.0, 0.0);
                }
            }
        }
    }
    out.push(("h-curvature-y", Some(r9.value(tol))));

    let mut r10a = Residual::default();
    let mut r10b = Residual::default();
    let mut rlink = Residual::default();
    for a in 0..n {
        for h in 0..n {
            for k in 0..n {
                let terms: Vec<f64> = (0..n).map(|j| ps.get(&[a, h, j, k]) * y[j]).collect();
                let lam = lambda.get(&[a, h, k]);
                let lam_terms = gc.get(&[a, h, k]).abs() + gamma.get(&[a, h, k]).abs();
                r10a.compare(
                    terms.iter().sum(),
                    terms.iter().map(|v| v.abs()).sum(),
                    lam,
                    lam_terms,
                );
                let vert: Vec<f64> = (0..n).map(|kk| ps.get(&[a, h, k, kk]) * y[kk]).collect();
                r10b.compare(
                    vert.iter().sum(),
                    vert.iter().map(|v| v.abs()).sum(),
                    0.0,
                    0.0,
                );
                // here `a` plays the lowered index m
                let low: Vec<f64> = (0..n)
                    .map(|s| b.g.get(&[a, s]) * lambda.get(&[s, h, k]))
                    .collect();
                let lv = l.get(&[a, h, k]);
                rlink.compare(
                    low.iter().sum(),
                    low.iter().map(|v| v.abs()).sum(),
                    -lv,
                    lv.abs(),
                );
            }
        }
    }
    out.push(("hv-curvature-y", Some(r10a.value(tol))));
    out.push(("landsberg-link", Some(rlink.value(tol))));
    out.push(("hv-curvature-y-vertical", Some(r10b.value(tol))));
    out.push(("bianchi", Some(r11.value(tol))));

    let rb_scale = gc.max_abs() * conn.max_abs() + rb.max_abs();
    let flat = rb.max_abs() <= ABSOLUTE_FLOOR.max(tol * tol * rb_scale);
    out.push((
        "pair-symmetry",
        flat.then(|| {
            let mut r = Residual::default();
            for idx in rlow.indices() {
                let (w, i, j, k) = (idx[0], idx[1], idx[2], idx[3]);
                let (a, bb) = (rlow.get(&idx), rlow.get(&[k, j, i, w]));
                r.compare(a, a.abs(), bb, bb.abs());
            }
            r.value(tol)
        }),
    ));

    out.push((
        "symmetry-metric",
        Some(swap_residual(&b.g, 0, 1, 1.0).value(tol)),
    ));
    out.push((
        "symmetry-chern",
        Some(swap_residual(gamma, 1, 2, 1.0).value(tol)),
    ));
    out.push((
        "symmetry-hv-curvature",
        Some(swap_residual(ps, 1, 2, 1.0).value(tol)),
    ));
    out.push(("symmetry-berwald", Some(symmetric3(gb, 1).value(tol))));
    out.push(("symmetry-cartan", Some(symmetric3(c, 0).value(tol))));
    out.push(("symmetry-landsberg", Some(symmetric3(l, 0).value(tol))));
    out.push((
        "antisymmetry-h-curvature",
        Some(swap_residual(rs, 2, 3, -1.0).value(tol)),
    ));
    out.push((
        "antisymmetry-barthel",
        Some(swap_residual(rb, 1, 2, -1.0).value(tol)),
    ));

    let mut rinv = Residual::default();
    for i in 0..n {
        for j in 0..n {
            let terms: Vec<f64> = (0..n)
                .map(|s| b.g.get(&[i, s]) * b.g_inv.get(&[s, j]))
                .collect();
            let id = if i == j { 1.0 } else { 0.0 };
            rinv.compare(
                terms.iter().sum(),
                terms.iter().map(|v| v.abs()).sum(),
                id,
                id,
            );
        }
    }
    out.push(("metric-inverse", Some(rinv.value(tol))));

    let mut reuler = Residual::default();
    let mut quad = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let v = b.g.get(&[i, j]) * y[i] * y[j];
            quad = (quad.0 + v, quad.1 + v.abs());
        }
    }
    reuler.compare(quad.0, quad.1, b.energy, b.energy.abs());
    let lin: Vec<f64> = (0..n).map(|i| 2.0 * b.y_lower[i] * y[i]).collect();
    reuler.compare(
        lin.iter().sum(),
        lin.iter().map(|v| v.abs()).sum(),
        2.0 * b.energy,
        2.0 * b.energy.abs(),
    );
    out.push(("euler", Some(reuler.value(tol))));

    let mut rcy = Residual::default();
    for i in 0..n {
        for k in 0..n {
            let terms: Vec<f64> = (0..n).map(|j| gamma.get(&[i, j, k]) * y[j]).collect();
            let nv = conn.get(&[i, k]);
            rcy.compare(
                terms.iter().sum(),
                terms.iter().map(|v| v.abs()).sum(),
                nv,
                nv.abs(),
            );
        }
    }
    out.push(("chern-y", Some(rcy.value(tol))));

    let mut rh = Residual::default();
    let conn2 = scaled.tensor(TensorKind::Connection)?;
    for (a, s) in conn.data().iter().zip(conn2.data()) {
        rh.compare(
            HOMOGENEITY_LAMBDA * a,
            HOMOGENEITY_LAMBDA * a.abs(),
            *s,
            s.abs(),
        );
    }
    for (a, s) in gamma
        .data()
        .iter()
        .zip(scaled.tensor(TensorKind::Chern)?.data())
    {
        rh.compare(*a, a.abs(), *s, s.abs());
    }
    out.push(("homogeneity-connection", Some(rh.value(tol))));

    let (berwald_ratio, _) = ratios(b)?;
    out.push((
        "berwald-reduction",
        (berwald_ratio <= DEFAULT_CLASS_TOL).then(|| {
            let mut r = Residual::default();
            let ymax = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let s = gc.max_abs();
            for v in ps.data() {
                r.push(*v, s / ymax);
            }
            for v in lambda.data() {
                r.push(*v, s);
            }
            r.value(tol)
        }),
    ));

    out.push((
        "riemannian-reduction",
        is_hyperbolic(spec).then(|| {
            let (chr, riem) = hyperbolic_riemann(b.point.x[0]);
            let mut r = Residual::default();
            for idx in rs.indices() {
                let (h, i, j, k) = (idx[0], idx[1], idx[2], idx[3]);
                let (a, o) = (rs.get(&idx), riem.get(&[h, i, k, j]));
                r.compare(a, a.abs(), o, o.abs());
            }
            for idx in chr.indices() {
                let (a, o) = (gamma.get(&idx), chr.get(&idx));
                r.compare(a, a.abs(), o, o.abs());
            }
            r.value(tol)
        }),
    ));
    Ok(out)
}

/// Runs the identity suite at the given points. `energy_homogeneity` supplies
/// the residuals of the sampled `E(x, λy) = λ²E` check, if run.
pub fn verify_points(
    spec: &MetricSpec,
    points: &[PointState],
    orders: Orders,
    tol: f64,
    seed: u64,
    energy_homogeneity: Option<&crate::dsl::HomogeneityReport>,
) -> Result<IdentityReport> {
    let per_point = points
        .par_iter()
        .map(|p| {
            let b = compute(spec, p, orders, &TensorKind::ALL, Convention::default())?;
            let scaled = compute(
                spec,
                &p.scale_y(HOMOGENEITY_LAMBDA),
                orders,
                &[TensorKind::Connection, TensorKind::Chern],
                Convention::default(),
            )?;
            point_residuals(spec, &b, &scaled, tol)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut identities = Vec::new();
    for (slot, (name, _)) in per_point
        .first()
        .map(|v| v.as_slice())
        .unwrap_or(&[])
        .iter()
        .enumerate()
    {
        let mut applied = 0;
        let mut worst: Option<(f64, &PointState)> = None;
        for (p, res) in points.iter().zip(&per_point) {
            if let Some(r) = res[slot].1 {
                applied += 1;
                if worst.map_or(true, |(w, _)| r > w || r.is_nan()) {
                    worst = Some((r, p));
                }
            }
        }
        if applied == 0 {
            continue;
        }
        let (max_residual, wp) = worst.expect("at least one point applied");
        identities.push(IdentityResult {
            name,
            statement: statement(name),
            points: applied,
            max_residual,
            passed: max_residual <= tol,
            worst_point: Some(wp.clone()),
        });
    }
    if let Some(h) = energy_homogeneity {
        let worst = h
            .checks
            .iter()
            .max_by(|a, b| a.residual.total_cmp(&b.residual));
        identities.push(IdentityResult {
            name: "homogeneity-energy",
            statement: statement("homogeneity-energy"),
            points: h.checks.len(),
            max_residual: h.max_residual,
            passed: h.passed,
            worst_point: worst.map(|c| c.point.clone()),
        });
    }
    let passed = identities.iter().all(|r| r.passed);
    Ok(IdentityReport {
        tolerance: tol,
        seed,
        points: points.to_vec(),
        identities,
        passed,
    })
}

/// Samples `count` points with `seed` and runs the whole suite, including
/// the energy homogeneity check on the same sample.
pub fn verify(
    spec: &MetricSpec,
    count: usize,
    seed: u64,
    orders: Orders,
    tol: f64,
) -> Result<IdentityReport> {
    if count == 0 {
        return Err(crate::FinslerError::InvalidArgument(
            "--points must be at least 1".into(),
        ));
    }
    let homog = spec.check_homogeneity(count, seed, tol)?;
    let points = crate::sampling::sample_points(spec, count, seed)?;
    verify_points(spec, &points, orders, tol, seed, Some(&homog))
}
