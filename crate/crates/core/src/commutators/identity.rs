use serde::Serialize;

use super::{h_d, CommutatorExpansion, Localizer};
use crate::cutoffs::CutoffFamily;
use crate::error::{Error, Result};
use crate::spectral::{check_alpha, fractional_derivative, hilbert, Field, Grid, Multiplier};

/// Multiple of machine epsilon times the size of the summed terms below
/// which a residual counts as roundoff.
const ROUNDOFF_FACTOR: f64 = 64.0;
const SUPPORT_TOL: f64 = 1e-12;

/// Both sides of the localization identity
///
/// ```text
/// ∫ φ f D^{α+1}∂f = -(a/4) ∫ φ' [(D^μ f)² + (D^μ ℋf)²] - ½ ∫ f R_0(a) f,
/// ```
///
/// with `a = α + 2` and `μ = (α+1)/2`.
///
/// `residual_flipped_sign` is the residual when both right-hand terms enter
/// with a plus sign instead; it is reported for comparison only.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub alpha: f64,
    pub grid_size: usize,
    pub lhs: f64,
    /// `(a/4) ∫ φ' [(D^μ f)² + (D^μ ℋf)²]`.
    pub derivative_term: f64,
    /// `½ ∫ f R_0(a) f`.
    pub remainder_term: f64,
    pub rhs: f64,
    pub residual: f64,
    pub residual_flipped_sign: f64,
    /// `ε_mach · 64 · ‖f‖ (‖H D^a(φ f)‖ + ‖φ H D^a f‖ + ...)`: the size of
    /// rounding error expected from the cancelling pieces.
    pub roundoff_floor: f64,
}

pub fn localization_identity(f: &Field, phi: &Localizer, alpha: f64) -> Result<IdentityReport> {
    check_alpha(alpha)?;
    if !f.grid().same_as(phi.grid()) {
        return Err(Error::GridMismatch);
    }
    let phi_prime = phi.derivative(1)?;
    let edge = phi_prime.boundary_magnitude();
    if edge > SUPPORT_TOL {
        return Err(Error::Wraparound(format!(
            "phi' reaches the box boundary with magnitude {edge:e}"
        )));
    }
    let a = alpha + 2.0;
    let mu = 0.5 * (alpha + 1.0);
    let g = f.grid();
    let phi_v = phi.value();

    let disp = f.apply(&Multiplier::dispersion(g, alpha)?)?;
    let lhs = phi_v.mul(f)?.inner(&disp)?;

    let dm = fractional_derivative(f, mu)?;
    let dmh = fractional_derivative(&hilbert(f), mu)?;
    let derivative_term = 0.25 * a * (dm.weighted_norm_sq(phi_prime)? + dmh.weighted_norm_sq(phi_prime)?);

    let exp = CommutatorExpansion::new(a, 0, phi.clone())?;
    let rf = exp.apply_rn(f)?;
    let remainder_term = 0.5 * f.inner(&rf)?;

    let rhs = -derivative_term - remainder_term;
    let hda = h_d(g, a);
    let pieces = phi_v.mul(f)?.apply(&hda)?.l2_norm() + phi_v.mul(&f.apply(&hda)?)?.l2_norm();
    let scale = f.l2_norm() * (pieces + rf.l2_norm() + disp.l2_norm()) + derivative_term.abs();
    Ok(IdentityReport {
        alpha,
        grid_size: g.len(),
        lhs,
        derivative_term,
        remainder_term,
        rhs,
        residual: (lhs - rhs).abs(),
        residual_flipped_sign: (lhs + rhs).abs(),
        roundoff_floor: ROUNDOFF_FACTOR * f64::EPSILON * scale,
    })
}

/// The identity at `n` and `2n` points for a fixed profile and cutoff.
#[derive(Clone, Debug, Serialize)]
pub struct RefinementReport {
    pub coarse: IdentityReport,
    pub fine: IdentityReport,
    /// `fine.residual <= max(0.1 coarse.residual, fine.roundoff_floor)`.
    pub pass: bool,
}

pub fn identity_refinement(
    profile: impl Fn(f64) -> f64,
    family: &CutoffFamily,
    alpha: f64,
    half_length: f64,
    n: usize,
) -> Result<RefinementReport> {
    let run = |size: usize| -> Result<IdentityReport> {
        let g = Grid::new(half_length, size)?;
        let f = Field::sample(&g, &profile)?;
        let phi = Localizer::cutoff(family, &g, false)?;
        localization_identity(&f, &phi, alpha)
    };
    let coarse = run(n)?;
    let fine = run(2 * n)?;
    let pass = fine.residual <= (0.1 * coarse.residual).max(fine.roundoff_floor);
    Ok(RefinementReport { coarse, fine, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(x: f64) -> f64 {
        (-(x - 2.0) * (x - 2.0) / 2.0).exp()
    }

    #[test]
    fn identity_holds_to_roundoff() {
        let fam = CutoffFamily::new(1.0, 5.0).unwrap();
        for alpha in [0.0, 0.5, 1.0] {
            let g = Grid::new(30.0, 1024).unwrap();
            let f = Field::sample(&g, gaussian).unwrap();
            let phi = Localizer::cutoff(&fam, &g, false).unwrap();
            let r = localization_identity(&f, &phi, alpha).unwrap();
            let h2 = crate::spectral::sobolev_norm_sq(&f, 2.0);
            assert!(r.residual <= 1e-8 * h2, "{r:?}");
            assert!(r.residual <= r.roundoff_floor, "{r:?}");
            // the opposite sign convention is far off
            assert!(r.residual_flipped_sign > 1e3 * r.residual.max(1e-16), "{r:?}");
        }
    }

    #[test]
    fn zero_field() {
        let g = Grid::new(30.0, 256).unwrap();
        let fam = CutoffFamily::new(1.0, 5.0).unwrap();
        let phi = Localizer::cutoff(&fam, &g, false).unwrap();
        let r = localization_identity(&Field::zeros(&g), &phi, 0.5).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn refinement_clause() {
        let fam = CutoffFamily::new(1.0, 5.0).unwrap();
        let r = identity_refinement(gaussian, &fam, 0.5, 30.0, 512).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
