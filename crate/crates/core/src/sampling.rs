//! Seeded rejection sampling of in-domain points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsl::{MetricSpec, PointState};
use crate::error::{FinslerError, Result};

/// Points whose constraint margins are within this distance of zero count as
/// boundary points: rejected by sampling, skipped by grid scans.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

fn attempt_budget(count: usize) -> usize {
    10_000 + 1_000 * count
}

fn admissible(spec: &MetricSpec, p: &PointState) -> bool {
    if spec.check_point(p).is_err() {
        return false;
    }
    if !matches!(spec.boundary_distance(p), Ok(d) if d > BOUNDARY_MARGIN) {
        return false;
    }
    let extra_ok = spec
        .sampling
        .extra
        .iter()
        .all(|c| match c.margin(&p.x, &p.y) {
            Ok(m) => c.op.holds(m) && m.abs() > BOUNDARY_MARGIN,
            Err(_) => false,
        });
    extra_ok && matches!(spec.energy_at(&p.x, &p.y), Ok(e) if e > 0.0)
}

/// Draws `count` points uniformly from the metric's sampling box, keeping only
/// admissible ones. Deterministic for a given seed.
pub fn sample_points(spec: &MetricSpec, count: usize, seed: u64) -> Result<Vec<PointState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = attempt_budget(count);
    let draw = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| {
        if lo == hi {
            lo
        } else {
            rng.gen_range(lo..=hi)
        }
    };
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == budget {
            return Err(FinslerError::Domain(format!(
                "no in-domain sample found: {} of {count} points after {budget} attempts",
                out.len()
            )));
        }
        attempts += 1;
        let x = spec.sampling.x.iter().map(|&r| draw(&mut rng, r)).collect();
        let y = spec.sampling.y.iter().map(|&r| draw(&mut rng, r)).collect();
        let p = PointState::new(x, y);
        if admissible(spec, &p) {
            out.push(p);
        }
    }
    Ok(out)
}
