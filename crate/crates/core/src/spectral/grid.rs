use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default fraction of the resolved band kept by the dealiasing mask.
pub const DEFAULT_DEALIAS_CUT: f64 = 2.0 / 3.0;

/// Periodic discretization of `[-L, L)` with `N` equispaced points.
///
/// Wavenumbers follow the FFT ordering `k_m = pi m / L` for
/// `m = 0, 1, ..., N/2 - 1, -N/2, ..., -1`. The entry at index `N/2` is the
/// Nyquist mode; it is its own conjugate partner, so every odd symbol must
/// vanish there.
///
/// Cloning is cheap: the tables and FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    half_length: f64,
    n: usize,
    dealias_cut: f64,
    points: Vec<f64>,
    wavenumbers: Vec<f64>,
    dealias: Vec<bool>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl Grid {
    pub fn new(half_length: f64, n: usize) -> Result<Self> {
        Self::with_dealias(half_length, n, DEFAULT_DEALIAS_CUT)
    }

    pub fn with_dealias(half_length: f64, n: usize, dealias_cut: f64) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half length must be positive, got {half_length}"
            )));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count must be a power of two >= 16, got {n}"
            )));
        }
        if !(dealias_cut > 0.0 && dealias_cut <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias cut must lie in (0, 1], got {dealias_cut}"
            )));
        }
        let dx = 2.0 * half_length / n as f64;
        let points = (0..n).map(|i| -half_length + i as f64 * dx).collect();
        let half = n / 2;
        let index = |m: usize| -> i64 {
            if m < half {
                m as i64
            } else {
                m as i64 - n as i64
            }
        };
        let wavenumbers = (0..n).map(|m| PI * index(m) as f64 / half_length).collect();
        let keep = dealias_cut * half as f64;
        let dealias = (0..n).map(|m| (index(m).unsigned_abs() as f64) < keep).collect();

        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                half_length,
                n,
                dealias_cut,
                points,
                wavenumbers,
                dealias,
                fft,
                ifft,
            }),
        })
    }

    pub fn half_length(&self) -> f64 {
        self.inner.half_length
    }

    pub fn len(&self) -> usize {
        self.inner.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.inner.half_length / self.inner.n as f64
    }

    /// Wavenumber spacing `pi / L`.
    pub fn dk(&self) -> f64 {
        PI / self.inner.half_length
    }

    pub fn dealias_cut(&self) -> f64 {
        self.inner.dealias_cut
    }

    pub fn points(&self) -> &[f64] {
        &self.inner.points
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    pub fn nyquist_index(&self) -> usize {
        self.inner.n / 2
    }

    /// `true` for the modes kept by the dealiasing truncation.
    pub fn dealias_mask(&self) -> &[bool] {
        &self.inner.dealias
    }

    /// Same box, `factor` times as many points.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::with_dealias(self.half_length(), self.len() * factor, self.dealias_cut())
    }

    /// Unnormalized forward DFT of real samples.
    pub fn forward(&self, samples: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(samples.len(), self.len());
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.inner.fft.process(&mut buf);
        buf
    }

    /// Inverse DFT (normalized by `1/N`), keeping the real part.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut buf = spectrum.to_vec();
        self.inverse_in_place(&mut buf);
        let scale = 1.0 / self.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Unnormalized inverse DFT in place.
    pub(crate) fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inner.ifft.process(buf);
    }

    pub(crate) fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.inner.fft.process(buf);
    }

    /// Riemann sum `dx * sum(values)`, spectrally accurate for periodic integrands.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.dx() * values.iter().sum::<f64>()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self == other
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.inner.n == other.inner.n
            && self.inner.half_length == other.inner.half_length
            && self.inner.dealias_cut == other.inner.dealias_cut
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("half_length", &self.inner.half_length)
            .field("n", &self.inner.n)
            .field("dealias_cut", &self.inner.dealias_cut)
            .finish()
    }
}
