use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{invalid, Error, Result};

const REALITY_TOL: f64 = 1e-13;

/// A Fourier multiplier: one complex symbol value per grid wavenumber.
///
/// Construction verifies `m(-k) = conj(m(k))` (with the zero and Nyquist
/// modes real), so applying a multiplier to a real field yields a real field.
#[derive(Clone, Debug)]
pub struct Multiplier {
    grid: Grid,
    name: String,
    symbol: Vec<Complex64>,
}

impl Multiplier {
    pub fn new(grid: &Grid, name: impl Into<String>, symbol: Vec<Complex64>) -> Result<Self> {
        let name = name.into();
        if symbol.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "symbol `{name}` has {} entries for {} modes",
                symbol.len(),
                grid.len()
            )));
        }
        if !is_real_preserving(&symbol) {
            return Err(Error::NotRealPreserving(name));
        }
        Ok(Self {
            grid: grid.clone(),
            name,
            symbol,
        })
    }

    /// Evaluates `f(k)` at every wavenumber, then replaces the Nyquist entry
    /// with `nyquist(k_N)` where `k_N > 0`.
    fn tabulate(
        grid: &Grid,
        name: impl Into<String>,
        f: impl Fn(f64) -> Complex64,
        nyquist: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let mut symbol: Vec<Complex64> = grid.wavenumbers().iter().map(|&k| f(k)).collect();
        let ny = grid.nyquist_index();
        symbol[ny] = nyquist(grid.wavenumbers()[ny].abs());
        Self::new(grid, name, symbol)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbol(&self) -> &[Complex64] {
        &self.symbol
    }

    /// Product of symbols, i.e. operator composition.
    pub fn then(&self, other: &Multiplier) -> Result<Multiplier> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let symbol = self
            .symbol
            .iter()
            .zip(&other.symbol)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            name: format!("{} . {}", other.name, self.name),
            symbol,
        })
    }

    pub fn identity(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            name: "I".into(),
            symbol: vec![Complex64::new(1.0, 0.0); grid.len()],
        }
    }

    /// `D^s`, symbol `|k|^s`; `D^0` is the identity.
    ///
    /// Negative `s` is accepted here (zero mode sent to 0); the public
    /// operator in [`crate::spectral::fractional_derivative`] rejects it.
    pub fn homogeneous(grid: &Grid, s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(invalid("s", "must be finite"));
        }
        let sym = move |k: f64| {
            let v = if k == 0.0 {
                if s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                k.abs().powf(s)
            };
            Complex64::new(v, 0.0)
        };
        Self::tabulate(grid, format!("D^{s}"), sym, sym)
    }

    /// `ℋ`, symbol `-i sgn(k)`; zero and Nyquist modes are annihilated.
    pub fn hilbert(grid: &Grid) -> Self {
        Self::tabulate(
            grid,
            "H",
            |k| Complex64::new(0.0, if k == 0.0 { 0.0 } else { -k.signum() }),
            |_| Complex64::new(0.0, 0.0),
        )
        .expect("Hilbert symbol is real-preserving")
    }

    /// `J^s = (1 - d²/dx²)^{s/2}`.
    pub fn bessel(grid: &Grid, s: f64) -> Self {
        let sym = move |k: f64| Complex64::new((1.0 + k * k).powf(0.5 * s), 0.0);
        Self::tabulate(grid, format!("J^{s}"), sym, sym).expect("even real symbol")
    }

    /// `∂_x^j`, symbol `(ik)^j`; the Nyquist mode is zeroed for odd `j`.
    pub fn derivative(grid: &Grid, j: u32) -> Self {
        Self::tabulate(
            grid,
            format!("d^{j}"),
            move |k| Complex64::new(0.0, k).powu(j),
            move |k| {
                if j % 2 == 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k).powu(j)
                }
            },
        )
        .expect("derivative symbol is real-preserving")
    }

    /// Free propagator `S(t)`, symbol `exp(i t |k|^{α+1} k)`.
    ///
    /// At the Nyquist mode the odd part of the symbol is dropped, leaving
    /// `cos(t k_N^{α+2})`. The operator is exactly unitary on fields without
    /// Nyquist content.
    pub fn linear_group(grid: &Grid, t: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Self::tabulate(
            grid,
            format!("S({t})"),
            move |k| Complex64::from_polar(1.0, t * k.abs().powf(alpha + 1.0) * k),
            move |k| Complex64::new((t * k.powf(alpha + 2.0)).cos(), 0.0),
        )
    }

    /// Linear dispersion generator `D^{α+1} ∂_x`, symbol `i |k|^{α+1} k`.
    pub fn dispersion(grid: &Grid, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Self::tabulate(
            grid,
            format!("D^{}d", alpha + 1.0),
            move |k| Complex64::new(0.0, k.abs().powf(alpha + 1.0) * k),
            |_| Complex64::new(0.0, 0.0),
        )
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(invalid("alpha", format!("must lie in [0, 1], got {alpha}")))
    }
}

fn is_real_preserving(symbol: &[Complex64]) -> bool {
    let n = symbol.len();
    let scale = symbol.iter().fold(1.0_f64, |m, c| m.max(c.norm()));
    let tol = REALITY_TOL * scale;
    if symbol[0].im.abs() > tol || symbol[n / 2].im.abs() > tol {
        return false;
    }
    (1..n / 2).all(|m| (symbol[m] - symbol[n - m].conj()).norm() <= tol)
}
