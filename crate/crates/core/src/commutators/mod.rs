//! The commutator expansion of `[H D^a; h]` with `H = -ℋ`: the leading
//! part `P_n(a)`, the remainder `R_n(a)`, and numerical checks of the
//! estimates built on them.
//!
//! `P_n(a) f = a Σ_{j<=n} c_{2j+1} (-1)^j 4^{-j} D^{μ-j}(h^{(2j+1)} D^{μ-j} f)`
//! with `μ = (a-1)/2`, and `R_n(a) = [H D^a; h] - ½(P_n(a) - H P_n(a) H)`.

mod bound;
mod identity;
mod localizer;
mod separated;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub use bound::{bound_check_rn, bound_check_rn_band, BoundReport};
pub use identity::{identity_refinement, localization_identity, IdentityReport, RefinementReport};
pub use localizer::Localizer;
pub use separated::{separated_support_check, separation_sweep, SeparationReport, SeparationSweep};

use crate::error::{invalid, Error, Result};
use crate::spectral::{Field, Grid, Multiplier};

/// Orders within this distance of zero are treated as exactly zero.
const ORDER_SNAP: f64 = 1e-12;

/// `c_1, c_3, ..., c_{2n+1}` with `c_1 = 1` and
/// `c_{2j+1} = c_{2j-1} (a² - (2j-1)²) / ((2j)(2j+1))`.
pub fn coefficients(a: f64, n: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(n + 1);
    c.push(1.0);
    for j in 1..=n {
        let jf = j as f64;
        let prev = c[j - 1];
        let odd = 2.0 * jf - 1.0;
        c.push(prev * (a * a - odd * odd) / ((2.0 * jf) * (2.0 * jf + 1.0)));
    }
    c
}

/// `H D^s` with `H = -ℋ`, symbol `i sgn(k) |k|^s`.
fn h_d(grid: &Grid, s: f64) -> Multiplier {
    let ny = grid.nyquist_index();
    let symbol = grid
        .wavenumbers()
        .iter()
        .enumerate()
        .map(|(m, &k)| {
            if k == 0.0 || m == ny {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k.signum() * k.abs().powf(s))
            }
        })
        .collect();
    Multiplier::new(grid, format!("HD^{s}"), symbol).expect("odd imaginary symbol")
}

fn d(f: &Field, s: f64) -> Result<Field> {
    let s = if s.abs() < ORDER_SNAP { 0.0 } else { s };
    f.apply(&Multiplier::homogeneous(f.grid(), s)?)
}

/// `P_n(a)` and `R_n(a)` for a fixed localizer `h`.
#[derive(Clone, Debug)]
pub struct CommutatorExpansion {
    a: f64,
    n: usize,
    coeffs: Vec<f64>,
    h: Localizer,
}

impl CommutatorExpansion {
    pub fn new(a: f64, n: usize, h: Localizer) -> Result<Self> {
        if !(a > 1.0 && a.is_finite()) {
            return Err(invalid("a", format!("must exceed 1, got {a}")));
        }
        if (h.max_order() as usize) < 2 * n + 1 {
            return Err(invalid(
                "n",
                format!(
                    "needs h^({}) but the localizer stops at order {}",
                    2 * n + 1,
                    h.max_order()
                ),
            ));
        }
        Ok(Self {
            a,
            n,
            coeffs: coefficients(a, n),
            h,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        0.5 * (self.a - 1.0)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn localizer(&self) -> &Localizer {
        &self.h
    }

    fn check(&self, f: &Field, sigma: f64) -> Result<()> {
        if !f.grid().same_as(self.h.grid()) {
            return Err(Error::GridMismatch);
        }
        if sigma < 0.0 {
            return Err(invalid("sigma", format!("must be nonnegative, got {sigma}")));
        }
        let lowest = sigma + self.mu() - self.n as f64;
        if lowest < -ORDER_SNAP {
            return Err(invalid(
                "n",
                format!(
                    "fractional order sigma + mu - n = {lowest} is negative (a = {}, n = {}, sigma = {sigma})",
                    self.a, self.n
                ),
            ));
        }
        Ok(())
    }

    /// `D^σ P_n(a) D^σ f`, with the outer powers merged into each term.
    fn conjugated_pn(&self, f: &Field, sigma: f64) -> Result<Field> {
        let mut total = Field::zeros(f.grid());
        for (j, c) in self.coeffs.iter().enumerate() {
            let order = sigma + self.mu() - j as f64;
            let weight = self.a * c * (-0.25_f64).powi(j as i32);
            if weight == 0.0 {
                continue;
            }
            let hj = self.h.derivative(2 * j as u32 + 1)?;
            let inner = hj.mul(&d(f, order)?)?;
            total = total.add(&d(&inner, order)?.scale(weight))?;
        }
        Ok(total)
    }

    pub fn apply_pn(&self, f: &Field) -> Result<Field> {
        self.check(f, 0.0)?;
        self.conjugated_pn(f, 0.0)
    }

    pub fn apply_rn(&self, f: &Field) -> Result<Field> {
        self.apply_conjugated_rn(f, 0.0)
    }

    /// The commutator `[H D^a; h] f = H D^a(h f) - h H D^a f` alone.
    pub fn apply_commutator(&self, f: &Field) -> Result<Field> {
        self.conjugated_commutator(f, 0.0)
    }

    fn conjugated_commutator(&self, f: &Field, sigma: f64) -> Result<Field> {
        let g = f.grid();
        let h = self.h.value();
        let first = h.mul(&d(f, sigma)?)?.apply(&h_d(g, self.a + sigma))?;
        let second = d(&h.mul(&f.apply(&h_d(g, self.a + sigma))?)?, sigma)?;
        first.sub(&second)
    }

    /// `D^σ R_n(a) D^σ f`.
    ///
    /// The powers `D^σ` are folded into the terms of `P_n`, so only
    /// `σ + μ - n >= 0` is needed rather than `μ >= n`.
    pub fn apply_conjugated_rn(&self, f: &Field, sigma: f64) -> Result<Field> {
        self.check(f, sigma)?;
        let g = f.grid();
        let hop = h_d(g, 0.0);
        let comm = self.conjugated_commutator(f, sigma)?;
        let p = self.conjugated_pn(f, sigma)?;
        let hph = self.conjugated_pn(&f.apply(&hop)?, sigma)?.apply(&hop)?;
        comm.sub(&p.sub(&hph)?.scale(0.5))
    }
}

/// A real field whose spectrum is supported on `|m| <= band` with
/// independent standard complex Gaussian coefficients, scaled to unit
/// `L²` norm.
pub fn random_band_limited(grid: &Grid, band: usize, rng: &mut impl Rng) -> Field {
    let n = grid.len();
    let band = band.min(n / 2 - 1);
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    spec[0] = Complex64::new(rng.sample(StandardNormal), 0.0);
    for m in 1..=band {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let c = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        spec[m] = c;
        spec[n - m] = c.conj();
    }
    let f = Field::from_spectrum(grid, &spec);
    let norm = f.l2_norm();
    f.scale(1.0 / norm)
}
