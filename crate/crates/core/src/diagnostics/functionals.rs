use serde::{Deserialize, Serialize};

use crate::cutoffs::{CutoffFamily, Member, Placement, Ramp};
use crate::error::{invalid, Result};
use crate::spectral::{bessel_potential, Field, Grid, Multiplier};

/// A weighted pair `∫ w g²` and `∫ w (ℋg)²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub plain: f64,
    pub hilbert: f64,
}

impl Channel {
    pub fn total(&self) -> f64 {
        self.plain + self.hilbert
    }
}

/// `m` applied to `u`, and optionally the Hilbert transform of the result,
/// both weighted by `w`.
pub(crate) fn weighted(u: &Field, m: &Multiplier, w: &Field) -> Result<f64> {
    u.apply(m)?.weighted_norm_sq(w)
}

pub(crate) fn weighted_channel(u: &Field, m: &Multiplier, w: &Field) -> Result<Channel> {
    let g = u.apply(m)?;
    let h = g.apply(&Multiplier::hilbert(u.grid()))?;
    Ok(Channel {
        plain: g.weighted_norm_sq(w)?,
        hilbert: h.weighted_norm_sq(w)?,
    })
}

/// `D^s ∂^j`.
pub(crate) fn smoothing_multiplier(grid: &Grid, s: f64, j: u32) -> Result<Multiplier> {
    Multiplier::homogeneous(grid, s)?.then(&Multiplier::derivative(grid, j))
}

/// `∫ χ²_{ε,b}(arg(x, t)) (∂^j u)² dx`, the proof's energy for the
/// propagation estimate.
pub fn weighted_energy(
    u: &Field,
    family: &CutoffFamily,
    placement: &Placement,
    t: f64,
    j: u32,
) -> Result<f64> {
    let w = family.placed_sample(u.grid(), placement, t, Member::ChiSquared)?;
    weighted(u, &Multiplier::derivative(u.grid(), j), &w)
}

/// The sharp-interval version: `(∂^j u)²` integrated over `arg(x, t) >= ε`.
/// It dominates [`weighted_energy`] because `χ² <= 1` and `χ = 0` below `ε`.
pub fn weighted_energy_indicator(
    u: &Field,
    family: &CutoffFamily,
    placement: &Placement,
    t: f64,
    j: u32,
) -> Result<f64> {
    let w = indicator(u.grid(), family, placement, t)?;
    weighted(u, &Multiplier::derivative(u.grid(), j), &w)
}

pub(crate) fn indicator(grid: &Grid, family: &CutoffFamily, placement: &Placement, t: f64) -> Result<Field> {
    // Sampling χ² first reuses the wraparound check on the moving support.
    family.placed_sample(grid, placement, t, Member::Chi)?;
    let eps = family.eps();
    Field::sample(grid, |x| if placement.argument(x, t) >= eps { 1.0 } else { 0.0 })
}

/// Instantaneous smoothing densities `∫ η²(D^{(α+1)/2}∂^j u)²` and the
/// same with `ℋ` applied after the multiplier.
pub fn smoothing_density(
    u: &Field,
    family: &CutoffFamily,
    placement: &Placement,
    t: f64,
    j: u32,
    alpha: f64,
) -> Result<Channel> {
    let w = family.placed_sample(u.grid(), placement, t, Member::EtaSquared)?;
    weighted_channel(u, &smoothing_multiplier(u.grid(), 0.5 * (alpha + 1.0), j)?, &w)
}

/// `∫ χ² (D^{(1-α)/2}∂^m u)²`.
pub fn halfstep_energy(
    u: &Field,
    family: &CutoffFamily,
    placement: &Placement,
    t: f64,
    m: u32,
    alpha: f64,
) -> Result<f64> {
    let w = family.placed_sample(u.grid(), placement, t, Member::ChiSquared)?;
    weighted(u, &smoothing_multiplier(u.grid(), 0.5 * (1.0 - alpha), m)?, &w)
}

/// `∫ η² (∂^{m+1}u)²` and `∫ η² (ℋ∂^{m+1}u)²`.
pub fn halfstep_smoothing_density(
    u: &Field,
    family: &CutoffFamily,
    placement: &Placement,
    t: f64,
    m: u32,
) -> Result<Channel> {
    let w = family.placed_sample(u.grid(), placement, t, Member::EtaSquared)?;
    weighted_channel(u, &Multiplier::derivative(u.grid(), m + 1), &w)
}

/// `(1 + x_-²)^{-(j+δ)/2}` with `x_- = max(0, -x)`.
pub fn decay_weight(grid: &Grid, j: u32, delta: f64) -> Result<Field> {
    if !(delta >= 0.0) {
        return Err(invalid("delta", format!("must be nonnegative, got {delta}")));
    }
    let p = -0.5 * (j as f64 + delta);
    Field::sample(grid, |x| {
        let neg = (-x).max(0.0);
        (1.0 + neg * neg).powf(p)
    })
}

/// `F_j = ∫ (1 + x_-²)^{-(j+δ)/2} (∂^j u)²`.
pub fn decay_functional(u: &Field, j: u32, delta: f64) -> Result<f64> {
    let w = decay_weight(u.grid(), j, delta)?;
    weighted(u, &Multiplier::derivative(u.grid(), j), &w)
}

/// Cutoff used by [`local_sobolev`] unless another is given.
pub const LOCAL_SOBOLEV_EPS: f64 = 0.1;
pub const LOCAL_SOBOLEV_B: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalSobolev {
    pub x0: f64,
    pub s: f64,
    pub eps: f64,
    pub b: f64,
    /// `‖χ_{ε,b}(· - x0 + ε) J^s u‖`.
    pub value: f64,
}

/// Norm of `J^s u` restricted smoothly to the right of `x0`. The weight is
/// zero on `x <= x0` and one from `x0 + b - ε` on.
pub fn local_sobolev(u: &Field, x0: f64, s: f64) -> Result<LocalSobolev> {
    local_sobolev_with(u, x0, s, LOCAL_SOBOLEV_EPS, LOCAL_SOBOLEV_B)
}

pub fn local_sobolev_with(u: &Field, x0: f64, s: f64, eps: f64, b: f64) -> Result<LocalSobolev> {
    let ramp = Ramp::new(eps, b)?;
    let w = Field::sample(u.grid(), |x| ramp.value(x - x0 + eps).powi(2))?;
    let value = bessel_potential(u, s).weighted_norm_sq(&w)?.sqrt();
    Ok(LocalSobolev { x0, s, eps, b, value })
}

/// Transition half-width of the smooth window, in units of its `ε`.
const WINDOW_EPS: f64 = 0.25;

/// The windowed smoothing integrand
/// `|∂ D^{r+(α+1)/2} u|² + |ℋ∂ D^{r+(α+1)/2} u|²` over `[-R, R]`.
///
/// The smooth window is a product of two `χ_{ε,5ε}` ramps with `ε = 1/4`,
/// centred so that it crosses 1/2 near `±R`; the sharp indicator is
/// reported alongside it.
#[derive(Clone, Debug)]
pub struct KatoWindow {
    pub radius: f64,
    pub r: f64,
    pub alpha: f64,
    smooth: Field,
    sharp: Field,
    multiplier: Multiplier,
}

/// Smallest `r` accepted: the local well-posedness threshold `(9 - 3α)/8`.
pub fn kato_threshold(alpha: f64) -> f64 {
    (9.0 - 3.0 * alpha) / 8.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowDensity {
    pub smooth: f64,
    pub sharp: f64,
}

impl KatoWindow {
    pub fn new(grid: &Grid, radius: f64, r: f64, alpha: f64, margin: f64) -> Result<Self> {
        crate::spectral::check_alpha(alpha)?;
        if !(r > kato_threshold(alpha)) {
            return Err(invalid(
                "r",
                format!("need r > (9 - 3 alpha)/8 = {}, got {r}", kato_threshold(alpha)),
            ));
        }
        let eps = WINDOW_EPS;
        let reach = radius + 2.0 * eps;
        if !(radius > 0.0) || reach > grid.half_length() - margin {
            return Err(invalid(
                "radius",
                format!("window [-{reach}, {reach}] must sit inside the box less the margin {margin}"),
            ));
        }
        let ramp = Ramp::new(eps, 5.0 * eps)?;
        let centre = radius + 3.0 * eps;
        let smooth = Field::sample(grid, |x| ramp.value(x + centre) * ramp.value(centre - x))?;
        let sharp = Field::sample(grid, |x| if x.abs() <= radius { 1.0 } else { 0.0 })?;
        let multiplier = smoothing_multiplier(grid, r + 0.5 * (alpha + 1.0), 1)?;
        Ok(Self {
            radius,
            r,
            alpha,
            smooth,
            sharp,
            multiplier,
        })
    }

    pub fn density(&self, u: &Field) -> Result<WindowDensity> {
        let smooth = weighted_channel(u, &self.multiplier, &self.smooth)?.total();
        let sharp = weighted_channel(u, &self.multiplier, &self.sharp)?.total();
        Ok(WindowDensity { smooth, sharp })
    }

    pub fn window(&self) -> &Field {
        &self.smooth
    }
}

/// Running trapezoid `∫₀^t f(s) ds` over unevenly spaced samples.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Trapezoid {
    last: Option<(f64, f64)>,
    total: f64,
}

impl Trapezoid {
    pub fn push(&mut self, t: f64, value: f64) -> f64 {
        if let Some((t0, v0)) = self.last {
            self.total += 0.5 * (t - t0) * (value + v0);
        }
        self.last = Some((t, value));
        self.total
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// `∫∫ w (g² + (ℋg)²)` accumulated over a stored trajectory, with the
/// window density supplied by `window`.
pub fn kato_window(trajectory: &[(f64, Field)], window: &KatoWindow) -> Result<WindowDensity> {
    let mut smooth = Trapezoid::default();
    let mut sharp = Trapezoid::default();
    for (t, u) in trajectory {
        let d = window.density(u)?;
        smooth.push(*t, d.smooth);
        sharp.push(*t, d.sharp);
    }
    Ok(WindowDensity {
        smooth: smooth.total(),
        sharp: sharp.total(),
    })
}
