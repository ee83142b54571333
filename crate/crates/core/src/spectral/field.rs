use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::grid::Grid;
use super::multiplier::Multiplier;
use crate::error::{Error, Result};

/// Real samples on a [`Grid`] with a lazily computed DFT.
///
/// Samples are immutable once constructed, so the cached spectrum can never
/// go stale; every transformation returns a new `Field`.
#[derive(Clone)]
pub struct Field {
    grid: Grid,
    samples: Arc<Vec<f64>>,
    spectrum: OnceLock<Arc<Vec<Complex64>>>,
}

impl Field {
    pub fn new(grid: &Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self::from_samples_unchecked(grid, samples))
    }

    pub(crate) fn from_samples_unchecked(grid: &Grid, samples: Vec<f64>) -> Self {
        Self {
            grid: grid.clone(),
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        }
    }

    /// Builds a field from DFT coefficients. The imaginary residue of the
    /// inverse transform is discarded, and the cache holds the spectrum of the
    /// resulting real samples.
    pub fn from_spectrum(grid: &Grid, spectrum: &[Complex64]) -> Self {
        Self::from_samples_unchecked(grid, grid.inverse(spectrum))
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_samples_unchecked(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self::from_samples_unchecked(grid, vec![value; grid.len()])
    }

    /// Samples `f` at the grid points.
    pub fn sample(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().iter().map(|&x| f(x)).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        Arc::try_unwrap(self.samples).unwrap_or_else(|s| (*s).clone())
    }

    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum
            .get_or_init(|| Arc::new(self.grid.forward(&self.samples)))
    }

    pub fn apply(&self, m: &Multiplier) -> Result<Field> {
        if !m.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let spec: Vec<Complex64> = self
            .spectrum()
            .iter()
            .zip(m.symbol())
            .map(|(a, b)| a * b)
            .collect();
        Ok(Field::from_spectrum(&self.grid, &spec))
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.samples)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// `∫ u²` by the grid quadrature.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.dx() * self.samples.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `∫ u v` by the grid quadrature.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.grid.dx()
            * self
                .samples
                .iter()
                .zip(other.samples.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }

    /// `∫ w u²`.
    pub fn weighted_norm_sq(&self, weight: &Field) -> Result<f64> {
        self.check_grid(weight)?;
        Ok(self.grid.dx()
            * self
                .samples
                .iter()
                .zip(weight.samples.iter())
                .map(|(u, w)| w * u * u)
                .sum::<f64>())
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|u|` over the outer 1/32 of the box on either side.
    pub fn boundary_magnitude(&self) -> f64 {
        let n = self.samples.len();
        let strip = (n / 32).max(1);
        self.samples[..strip]
            .iter()
            .chain(&self.samples[n - strip..])
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_samples_unchecked(&self.grid, self.samples.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_grid(other)?;
        Ok(Field::from_samples_unchecked(
            &self.grid,
            self.samples
                .iter()
                .zip(other.samples.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    /// `u(-x)` on the grid (the point `-L` maps to itself).
    pub fn reflect(&self) -> Field {
        let n = self.samples.len();
        let s = &self.samples;
        let out = (0..n).map(|i| s[(n - i) % n]).collect();
        Field::from_samples_unchecked(&self.grid, out)
    }

    fn check_grid(&self, other: &Field) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("max_abs", &self.max_abs())
            .finish()
    }
}
