//! Weight families `χ_{ε,b}`, `φ_{ε,b}`, `φ̃_{ε,b}`, `ψ_ε`, `η_{ε,b}` built as
//! mollified ramps, plus a sweep that checks their listed properties.
//!
//! `χ_{ε,b} = ρ_ε * ν_{ε,b}` where `ν_{ε,b}` is the piecewise-linear ramp
//! rising from 0 at `2ε` to 1 at `b - ε`. Because `ν` is linear between its
//! kinks, the convolution reduces to the distribution function and first
//! moment of `ρ`, and every derivative of order >= 2 is a difference of two
//! translated copies of `ρ_ε^{(j-2)}`.

pub mod mollifier;
mod properties;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use properties::{PropertyCheck, PropertyReport};

use crate::error::{invalid, Error, Result};
use crate::spectral::{Field, Grid};

/// Highest derivative of `χ` available by default (`2 n_max + 1` with `n_max = 4`).
pub const DEFAULT_MAX_ORDER: u32 = 9;

/// Default distance kept between a weight's transition region and the box edge.
pub const DEFAULT_MARGIN: f64 = 1.0;

/// A mollified ramp `χ_{ε,b}(x - shift)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ramp {
    eps: f64,
    b: f64,
    shift: f64,
}

impl Ramp {
    /// `χ_{ε,b}` with the usual admissibility condition `b >= 5ε`.
    pub fn new(eps: f64, b: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid("eps", format!("must be positive, got {eps}")));
        }
        if !(b >= 5.0 * eps) || !b.is_finite() {
            return Err(invalid("b", format!("need b >= 5 eps, got b = {b}, eps = {eps}")));
        }
        Ok(Self { eps, b, shift: 0.0 })
    }

    /// The same construction for any `b > 3ε`, translated by `shift`.
    fn unchecked(eps: f64, b: f64, shift: f64) -> Self {
        debug_assert!(b > 3.0 * eps);
        Self { eps, b, shift }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn value(&self, x: f64) -> f64 {
        let (eps, b) = (self.eps, self.b);
        let y = x - self.shift;
        if y <= eps {
            return 0.0;
        }
        if y >= b {
            return 1.0;
        }
        let zl = ((y - b + eps) / eps).clamp(-1.0, 1.0);
        let zh = ((y - 2.0 * eps) / eps).clamp(-1.0, 1.0);
        let (c_lo, c_hi) = (mollifier::cdf(zl), mollifier::cdf(zh));
        let m = mollifier::first_moment(zh) - mollifier::first_moment(zl);
        c_lo + ((y - 2.0 * eps) * (c_hi - c_lo) - eps * m) / (b - 3.0 * eps)
    }

    /// `χ^{(j)}(x)`; `j = 0` is the value itself.
    pub fn derivative(&self, x: f64, j: u32) -> f64 {
        let (eps, b) = (self.eps, self.b);
        let y = x - self.shift;
        match j {
            0 => self.value(x),
            _ if y <= eps || y >= b => 0.0,
            1 => {
                let zl = (y - b + eps) / eps;
                let zh = (y - 2.0 * eps) / eps;
                (mollifier::cdf(zh) - mollifier::cdf(zl)) / (b - 3.0 * eps)
            }
            _ => {
                let k = (j - 2) as usize;
                let scale = eps.powi(-(k as i32) - 1);
                let lo = mollifier::rho_derivative((y - 2.0 * eps) / eps, k);
                let hi = mollifier::rho_derivative((y - b + eps) / eps, k);
                scale * (lo - hi) / (b - 3.0 * eps)
            }
        }
    }
}

/// Members of a [`CutoffFamily`] that can be sampled onto a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Member {
    Chi,
    ChiSquared,
    /// `χ^{(j)}`.
    ChiDerivative(u32),
    /// `(χ²)^{(j)}`.
    ChiSquaredDerivative(u32),
    Phi,
    PhiTilde,
    Psi,
    Eta,
    EtaSquared,
}

/// Which half-line a translated weight looks at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `w(x - x0 + v t)`: support on the right, sliding left.
    #[default]
    Right,
    /// Mirror image `w(x0 - x + v t)`: support on the left, sliding right.
    Left,
}

/// Where a weight sits on the line at time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    #[serde(default)]
    pub x0: f64,
    pub v: f64,
    #[serde(default)]
    pub orientation: Orientation,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

impl Placement {
    pub fn moving(v: f64) -> Self {
        Self {
            x0: 0.0,
            v,
            orientation: Orientation::Right,
            margin: DEFAULT_MARGIN,
        }
    }

    pub fn mirrored(self) -> Self {
        let orientation = match self.orientation {
            Orientation::Right => Orientation::Left,
            Orientation::Left => Orientation::Right,
        };
        Self { orientation, ..self }
    }

    /// Argument at which the unshifted member is evaluated.
    pub fn argument(&self, x: f64, t: f64) -> f64 {
        match self.orientation {
            Orientation::Right => x - self.x0 + self.v * t,
            Orientation::Left => self.x0 - x + self.v * t,
        }
    }

    /// Grid-space interval occupied by the argument range `[lo, hi]`.
    fn image(&self, lo: f64, hi: f64, t: f64) -> (f64, f64) {
        match self.orientation {
            Orientation::Right => (lo + self.x0 - self.v * t, hi + self.x0 - self.v * t),
            Orientation::Left => (self.x0 + self.v * t - hi, self.x0 + self.v * t - lo),
        }
    }
}

/// The quintuple `(χ, φ, φ̃, ψ, η)` for one admissible `(ε, b)`.
#[derive(Clone, Debug)]
pub struct CutoffFamily {
    chi: Ramp,
    psi_ramp: Ramp,
    max_order: u32,
}

impl CutoffFamily {
    pub fn new(eps: f64, b: f64) -> Result<Self> {
        Self::with_max_order(eps, b, DEFAULT_MAX_ORDER)
    }

    /// Builds the family and checks that `1 - χ² - ψ` is nonnegative.
    ///
    /// `ψ_ε = 1 - χ_{ε/16, 5ε/16}(· - 3ε/16)`, a mollified step falling from 1
    /// at `ε/4` to 0 at `ε/2`; `φ` and `φ̃` are then fixed by the two
    /// partition identities.
    pub fn with_max_order(eps: f64, b: f64, max_order: u32) -> Result<Self> {
        let chi = Ramp::new(eps, b)?;
        let psi_ramp = Ramp::unchecked(eps / 16.0, 5.0 * eps / 16.0, 3.0 * eps / 16.0);
        let family = Self {
            chi,
            psi_ramp,
            max_order,
        };
        let n = 4000;
        let (lo, hi) = (-b, 2.0 * b);
        let worst = (0..=n)
            .into_par_iter()
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / n as f64;
                let c = family.chi(x);
                1.0 - c * c - family.psi(x)
            })
            .reduce(|| f64::INFINITY, f64::min);
        if worst < -1e-12 {
            return Err(Error::Construction(format!("1 - chi^2 - psi reaches {worst:e}")));
        }
        Ok(family)
    }

    pub fn eps(&self) -> f64 {
        self.chi.eps
    }

    pub fn b(&self) -> f64 {
        self.chi.b
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn ramp(&self) -> &Ramp {
        &self.chi
    }

    pub fn chi(&self, x: f64) -> f64 {
        self.chi.value(x)
    }

    pub fn chi_derivative(&self, x: f64, j: u32) -> Result<f64> {
        if j > self.max_order {
            return Err(invalid(
                "j",
                format!("derivative order {j} exceeds supported {}", self.max_order),
            ));
        }
        Ok(self.chi.derivative(x, j))
    }

    /// `(χ²)^{(j)} = Σ_i C(j,i) χ^{(i)} χ^{(j-i)}`.
    pub fn chi_squared_derivative(&self, x: f64, j: u32) -> Result<f64> {
        if j > self.max_order {
            return Err(invalid(
                "j",
                format!("derivative order {j} exceeds supported {}", self.max_order),
            ));
        }
        let d: Vec<f64> = (0..=j).map(|i| self.chi.derivative(x, i)).collect();
        let mut binom = 1.0;
        let mut total = 0.0;
        for i in 0..=j as usize {
            total += binom * d[i] * d[j as usize - i];
            binom = binom * (j as usize - i) as f64 / (i + 1) as f64;
        }
        Ok(total)
    }

    pub fn psi(&self, x: f64) -> f64 {
        1.0 - self.psi_ramp.value(x)
    }

    pub fn phi(&self, x: f64) -> f64 {
        1.0 - self.chi(x) - self.psi(x)
    }

    pub fn phi_tilde(&self, x: f64) -> f64 {
        let c = self.chi(x);
        (1.0 - c * c - self.psi(x)).max(0.0).sqrt()
    }

    pub fn eta_squared(&self, x: f64) -> f64 {
        (self.chi(x) * self.chi.derivative(x, 1)).max(0.0)
    }

    pub fn eta(&self, x: f64) -> f64 {
        self.eta_squared(x).sqrt()
    }

    pub fn evaluate(&self, member: Member, x: f64) -> Result<f64> {
        Ok(match member {
            Member::Chi => self.chi(x),
            Member::ChiSquared => self.chi(x).powi(2),
            Member::ChiDerivative(j) => self.chi_derivative(x, j)?,
            Member::ChiSquaredDerivative(j) => self.chi_squared_derivative(x, j)?,
            Member::Phi => self.phi(x),
            Member::PhiTilde => self.phi_tilde(x),
            Member::Psi => self.psi(x),
            Member::Eta => self.eta(x),
            Member::EtaSquared => self.eta_squared(x),
        })
    }

    /// Samples `member(x)` on the grid points.
    pub fn sample(&self, member: Member, grid: &Grid) -> Result<Field> {
        self.sample_at(member, grid, |x| x)
    }

    /// `member(x + v t)` on the grid, for the right-facing weights of the
    /// weighted energy estimates.
    pub fn shifted_sample(&self, grid: &Grid, v: f64, t: f64, member: Member) -> Result<Field> {
        self.placed_sample(grid, &Placement::moving(v), t, member)
    }

    /// `member(placement.argument(x, t))` on the grid. Fails when the
    /// family's transition region `[ε/4, b]` is carried closer than
    /// `placement.margin` to the box edge, where the weight would wrap.
    pub fn placed_sample(&self, grid: &Grid, placement: &Placement, t: f64, member: Member) -> Result<Field> {
        let (lo, hi) = placement.image(self.eps() / 4.0, self.b(), t);
        let l = grid.half_length();
        if lo < -l + placement.margin || hi > l - placement.margin {
            return Err(Error::Wraparound(format!(
                "transition region [{lo:.4}, {hi:.4}] at t = {t} leaves [{:.4}, {:.4}]",
                -l + placement.margin,
                l - placement.margin
            )));
        }
        self.sample_at(member, grid, |x| placement.argument(x, t))
    }

    fn sample_at(&self, member: Member, grid: &Grid, arg: impl Fn(f64) -> f64 + Sync) -> Result<Field> {
        let values: Result<Vec<f64>> = grid
            .points()
            .par_iter()
            .map(|&x| self.evaluate(member, arg(x)))
            .collect();
        Field::new(grid, values?)
    }

    /// Runs the property sweep on `samples` points of `[-b, 2b]`.
    pub fn verify_properties(&self, samples: usize) -> Result<PropertyReport> {
        properties::verify(self, samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn chi_boundary_values() {
        let f = CutoffFamily::new(1.0, 5.0).unwrap();
        assert_eq!(f.chi(0.9), 0.0);
        assert_eq!(f.chi(6.0), 1.0);
        assert!(Ramp::new(1.0, 4.9).is_err());
    }

    #[test]
    fn chi_midpoint_against_direct_convolution() {
        // Oracle: composite Simpson on ∫ ρ_1(3 - y) (y - 2) / (b - 3ε) dy over [2, 4].
        let f = CutoffFamily::new(1.0, 5.0).unwrap();
        let n = 20_000;
        let (a, b) = (2.0, 4.0);
        let h = (b - a) / n as f64;
        let g = |y: f64| mollifier::rho(3.0 - y) * (y - 2.0) / 2.0;
        let mut s = g(a) + g(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * g(a + i as f64 * h);
        }
        let oracle = s * h / 3.0;
        assert!((f.chi(3.0) - oracle).abs() < 1e-12, "{} vs {oracle}", f.chi(3.0));
        assert!((f.chi(3.0) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn chi_off_center_against_direct_convolution() {
        // Points where the mollifier straddles a kink of ν.
        let f = CutoffFamily::new(0.5, 3.0).unwrap();
        for &x in &[0.7, 1.2, 2.3, 2.9] {
            let direct = quad::integrate(
                |z| {
                    let y = x - 0.5 * z;
                    let nu = ((y - 1.0) / 1.5).clamp(0.0, 1.0);
                    mollifier::rho(z) * nu
                },
                -1.0,
                1.0,
                1e-15,
            );
            assert!((f.chi(x) - direct).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn chi_prime_facts() {
        let f = CutoffFamily::new(1.0, 5.0).unwrap();
        assert_eq!(f.chi_derivative(10.0, 1).unwrap(), 0.0);
        let mass = quad::integrate(|x| f.chi_derivative(x, 1).unwrap(), 1.0, 5.0, 1e-13);
        assert!((mass - 1.0).abs() < 1e-12);
        let bound = 1.0 / (10.0 * 4.0);
        for i in 0..1000 {
            let x = 2.0 + i as f64 / 999.0;
            assert!(f.chi_derivative(x, 1).unwrap() >= bound);
        }
        assert!(f.chi_derivative(3.0, 10).is_err());
    }

    #[test]
    fn derivatives_consistent_with_finite_differences() {
        let f = CutoffFamily::new(1.0, 5.0).unwrap();
        for &x in &[1.3, 1.8, 2.6, 3.5, 4.2, 4.7] {
            for j in 0..6 {
                let h = 1e-5;
                let fd =
                    (f.chi_derivative(x + h, j).unwrap() - f.chi_derivative(x - h, j).unwrap()) / (2.0 * h);
                let exact = f.chi_derivative(x, j + 1).unwrap();
                assert!((fd - exact).abs() < 1e-5 * exact.abs().max(1.0), "x={x} j={j}");
            }
            let h = 1e-5;
            let fd = (f.chi(x + h).powi(2) - f.chi(x - h).powi(2)) / (2.0 * h);
            assert!((fd - f.chi_squared_derivative(x, 1).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn family_values() {
        let f = CutoffFamily::new(1.0, 5.0).unwrap();
        assert!((f.phi(0.75) - 1.0).abs() < 1e-15);
        assert!((f.phi_tilde(0.75) - 1.0).abs() < 1e-15);
        assert_eq!(f.psi(1.0), 0.0);
        let mut worst: f64 = 0.0;
        for i in 0..10_000 {
            let x = -5.0 + 15.0 * i as f64 / 9999.0;
            worst = worst.max((f.chi(x) + f.phi(x) + f.psi(x) - 1.0).abs());
        }
        assert!(worst <= 1e-10);
    }

    #[test]
    fn shifted_samples() {
        let g = Grid::new(30.0, 256).unwrap();
        let f = CutoffFamily::new(1.0, 5.0).unwrap();
        let a = f.shifted_sample(&g, 0.0, 3.7, Member::Chi).unwrap();
        let b = f.sample(Member::Chi, &g).unwrap();
        assert_eq!(a.samples(), b.samples());
        let s = f.shifted_sample(&g, 1.0, 2.0, Member::ChiSquared).unwrap();
        for (x, v) in g.points().iter().zip(s.samples()) {
            assert_eq!(*v, f.chi(x + 2.0).powi(2));
        }
        assert!(matches!(
            f.shifted_sample(&g, 1.0, 31.0, Member::Chi),
            Err(Error::Wraparound(_))
        ));
    }

    #[test]
    fn mirrored_placement() {
        let g = Grid::new(30.0, 256).unwrap();
        let f = CutoffFamily::new(1.0, 5.0).unwrap();
        let p = Placement::moving(1.0).mirrored();
        let s = f.placed_sample(&g, &p, 0.5, Member::Chi).unwrap();
        for (x, v) in g.points().iter().zip(s.samples()) {
            assert_eq!(*v, f.chi(-x + 0.5));
        }
    }
}
