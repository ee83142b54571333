use serde::Serialize;

use crate::cutoffs::mollifier;
use crate::error::{invalid, Error, Result};
use crate::spectral::{spatial_derivative, Field, Grid, Multiplier};

/// Samples with magnitude above this belong to the numerical support.
const SUPPORT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub m: u32,
    pub s: f64,
    pub delta: f64,
    /// Periodic distance between the numerical supports.
    pub distance: f64,
    /// `‖g ∂^m D^s f‖_{L²}`.
    pub norm: f64,
    /// `norm / (‖g‖_{L²} ‖f‖_{L²})`, or 0 when either factor vanishes.
    pub ratio: f64,
}

fn support(f: &Field) -> Vec<f64> {
    f.grid()
        .points()
        .iter()
        .zip(f.samples())
        .filter(|(_, v)| v.abs() > SUPPORT_TOL)
        .map(|(x, _)| *x)
        .collect()
}

fn support_distance(f: &Field, g: &Field) -> f64 {
    let period = 2.0 * f.grid().half_length();
    let (sf, sg) = (support(f), support(g));
    let mut best = f64::INFINITY;
    for x in &sf {
        for y in &sg {
            let d = (x - y).abs();
            best = best.min(d.min(period - d));
        }
    }
    best
}

/// Measures `‖g ∂_x^m D^s f‖` for `f`, `g` with supports at least `delta`
/// apart.
pub fn separated_support_check(f: &Field, g: &Field, m: u32, s: f64, delta: f64) -> Result<SeparationReport> {
    if !f.grid().same_as(g.grid()) {
        return Err(Error::GridMismatch);
    }
    if !(delta > 0.0) || s < 0.0 {
        return Err(invalid(
            "delta",
            format!("need delta > 0 and s >= 0, got {delta}, {s}"),
        ));
    }
    let distance = support_distance(f, g);
    if distance < delta {
        return Err(Error::SupportsOverlap {
            distance,
            required: delta,
        });
    }
    let inner = spatial_derivative(&f.apply(&Multiplier::homogeneous(f.grid(), s)?)?, m);
    let norm = g.mul(&inner)?.l2_norm();
    let denom = g.l2_norm() * f.l2_norm();
    Ok(SeparationReport {
        m,
        s,
        delta,
        distance,
        norm,
        ratio: if denom == 0.0 { 0.0 } else { norm / denom },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationSweep {
    pub reports: Vec<SeparationReport>,
    pub strictly_decreasing: bool,
}

/// Two unit bumps `ρ(x)` and `ρ(x - 2 - δ)` (radius 1) at support distance
/// `δ`, for each `δ` in `deltas`.
pub fn separation_sweep(grid: &Grid, m: u32, s: f64, deltas: &[f64]) -> Result<SeparationSweep> {
    let f = Field::sample(grid, mollifier::rho)?;
    let mut reports = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let g = Field::sample(grid, |x| mollifier::rho(x - 2.0 - delta))?;
        // the grid sees the supports slightly inside their true extent
        reports.push(separated_support_check(&f, &g, m, s, 0.99 * delta)?);
    }
    let strictly_decreasing = reports.windows(2).all(|w| w[1].ratio < w[0].ratio);
    Ok(SeparationSweep {
        reports,
        strictly_decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_partner() {
        let g = Grid::new(30.0, 1024).unwrap();
        let f = Field::sample(&g, mollifier::rho).unwrap();
        let r = separated_support_check(&f, &Field::zeros(&g), 1, 0.5, 1.0).unwrap();
        assert_eq!(r.norm, 0.0);
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn overlap_rejected() {
        let g = Grid::new(30.0, 1024).unwrap();
        let f = Field::sample(&g, mollifier::rho).unwrap();
        let h = Field::sample(&g, |x| mollifier::rho(x - 1.5)).unwrap();
        assert!(matches!(
            separated_support_check(&f, &h, 0, 0.5, 0.1),
            Err(Error::SupportsOverlap { .. })
        ));
    }

    #[test]
    fn ratio_decreases_with_distance() {
        let g = Grid::new(30.0, 2048).unwrap();
        for (m, s) in [(0, 0.5), (1, 0.5), (1, 1.5), (2, 0.3)] {
            let sweep = separation_sweep(&g, m, s, &[1.0, 2.0, 4.0]).unwrap();
            assert!(sweep.strictly_decreasing, "m={m} s={s}: {sweep:?}");
        }
    }
}
