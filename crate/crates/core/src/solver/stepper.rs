use num_complex::Complex64;

use super::config::{AbsorbingLayer, Nonlinearity};
use crate::error::{Error, Result};
use crate::spectral::{check_alpha, Field, Grid};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Integrating-factor RK4 for `∂_t û = i|k|^{α+1}k û + N(û)`.
///
/// With `E = e^{L dt/2}`, one step is
///
/// ```text
/// a = dt N(v)
/// b = dt N(E(v + a/2))
/// c = dt N(E v + b/2)
/// d = dt N(E² v + E c)
/// v ← E² v + (E² a + 2E(b + c) + d) / 6
/// ```
///
/// so the dispersive part is exact and only the nonlinearity is discretized.
pub struct Stepper {
    grid: Grid,
    alpha: f64,
    dt: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    /// `i k` on kept modes, zero elsewhere (and at the Nyquist mode).
    ik: Vec<Complex64>,
    keep: Vec<bool>,
    nonlinearity: Nonlinearity,
    damping: Option<Vec<f64>>,
    layer: Option<AbsorbingLayer>,
    spectrum: Vec<Complex64>,
    scratch: Vec<Complex64>,
    stages: [Vec<Complex64>; 4],
    stage_in: Vec<Complex64>,
}

impl Stepper {
    pub fn new(
        u0: &Field,
        alpha: f64,
        dt: f64,
        dealias: bool,
        nonlinearity: Nonlinearity,
        layer: Option<AbsorbingLayer>,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        let grid = u0.grid().clone();
        let n = grid.len();
        let ny = grid.nyquist_index();
        let keep: Vec<bool> = if dealias {
            grid.dealias_mask().to_vec()
        } else {
            (0..n).map(|m| m != ny).collect()
        };
        let ik = grid
            .wavenumbers()
            .iter()
            .zip(&keep)
            .map(|(&k, &kept)| if kept { Complex64::new(0.0, k) } else { ZERO })
            .collect();
        let mut s = Self {
            grid,
            alpha,
            dt: 0.0,
            half: Vec::new(),
            full: Vec::new(),
            ik,
            keep,
            nonlinearity,
            damping: None,
            layer,
            spectrum: u0.spectrum().to_vec(),
            scratch: vec![ZERO; n],
            stages: std::array::from_fn(|_| vec![ZERO; n]),
            stage_in: vec![ZERO; n],
        };
        s.set_dt(dt);
        Ok(s)
    }

    /// Changes the step; a negative `dt` integrates backward in time.
    pub fn set_dt(&mut self, dt: f64) {
        let ny = self.grid.nyquist_index();
        let phase = |k: f64, tau: f64| Complex64::from_polar(1.0, tau * k.abs().powf(self.alpha + 1.0) * k);
        let factors = |tau: f64| -> Vec<Complex64> {
            self.grid
                .wavenumbers()
                .iter()
                .enumerate()
                .map(|(m, &k)| {
                    if m == ny {
                        Complex64::new((tau * k.abs().powf(self.alpha + 2.0)).cos(), 0.0)
                    } else {
                        phase(k, tau)
                    }
                })
                .collect()
        };
        self.half = factors(0.5 * dt);
        self.full = factors(dt);
        self.damping = self.layer.map(|layer| {
            let l = self.grid.half_length();
            self.grid
                .points()
                .iter()
                .map(|&x| (-layer.rate(x, l) * dt.abs()).exp())
                .collect()
        });
        self.dt = dt;
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn field(&self) -> Field {
        Field::from_spectrum(&self.grid, &self.spectrum)
    }

    /// `dt · N(v)` written into `out`, where
    /// `N(v) = -coef · i k · keep[ FFT( (IFFT keep[v])^{p+1} / (p+1) ) ]`.
    fn rhs(&mut self, which: usize) {
        let out = &mut self.stages[which];
        let coef = self.nonlinearity.coefficient;
        if coef == 0.0 {
            out.iter_mut().for_each(|c| *c = ZERO);
            return;
        }
        let n = self.grid.len();
        for ((s, v), &kept) in self.scratch.iter_mut().zip(&self.stage_in).zip(&self.keep) {
            *s = if kept { *v } else { ZERO };
        }
        self.grid.inverse_in_place(&mut self.scratch);
        let p = self.nonlinearity.power as i32;
        let inv_n = 1.0 / n as f64;
        for s in self.scratch.iter_mut() {
            let u = s.re * inv_n;
            *s = Complex64::new(u.powi(p + 1) / (p + 1) as f64, 0.0);
        }
        self.grid.forward_in_place(&mut self.scratch);
        let scale = -coef * self.dt;
        for ((o, s), ik) in out.iter_mut().zip(&self.scratch).zip(&self.ik) {
            *o = ik * s * scale;
        }
    }

    pub fn step(&mut self) {
        let n = self.grid.len();
        // a
        self.stage_in.copy_from_slice(&self.spectrum);
        self.rhs(0);
        // b
        for m in 0..n {
            self.stage_in[m] = self.half[m] * (self.spectrum[m] + 0.5 * self.stages[0][m]);
        }
        self.rhs(1);
        // c
        for m in 0..n {
            self.stage_in[m] = self.half[m] * self.spectrum[m] + 0.5 * self.stages[1][m];
        }
        self.rhs(2);
        // d
        for m in 0..n {
            self.stage_in[m] = self.full[m] * self.spectrum[m] + self.half[m] * self.stages[2][m];
        }
        self.rhs(3);
        let [a, b, c, d] = &self.stages;
        for m in 0..n {
            self.spectrum[m] = self.full[m] * self.spectrum[m]
                + (self.full[m] * a[m] + 2.0 * self.half[m] * (b[m] + c[m]) + d[m]) / 6.0;
        }
        if let Some(damping) = &self.damping {
            self.scratch.copy_from_slice(&self.spectrum);
            self.grid.inverse_in_place(&mut self.scratch);
            let inv_n = 1.0 / n as f64;
            for (s, w) in self.scratch.iter_mut().zip(damping) {
                *s = Complex64::new(s.re * inv_n * w, 0.0);
            }
            self.grid.forward_in_place(&mut self.scratch);
            self.spectrum.copy_from_slice(&self.scratch);
        }
    }

    /// The current field, or `BlowUp` if it is no longer finite.
    pub fn checked_field(&self, step: u64, t: f64) -> Result<Field> {
        let samples = self.grid.inverse(&self.spectrum);
        Field::new(&self.grid, samples).map_err(|_| Error::BlowUp { step, t })
    }
}

/// `-coef · ½ ∂_x(u²)` (for `power = 1`) with the product formed from the
/// dealiased field and the result dealiased again.
pub fn nonlinear_rhs(u: &Field, nonlinearity: Nonlinearity, dealias: bool) -> Result<Field> {
    let mut s = Stepper::new(u, 0.0, 1.0, dealias, nonlinearity, None)?;
    s.stage_in.copy_from_slice(u.spectrum());
    s.rhs(0);
    Ok(Field::from_spectrum(u.grid(), &s.stages[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::linear_group;
    use std::f64::consts::PI;

    #[test]
    fn nonlinear_term_closed_forms() {
        let g = Grid::new(PI, 64).unwrap();
        let c = Field::constant(&g, 2.5);
        assert!(
            nonlinear_rhs(&c, Nonlinearity::default(), true)
                .unwrap()
                .max_abs()
                < 1e-13
        );
        let s = Field::sample(&g, f64::sin).unwrap();
        let r = nonlinear_rhs(&s, Nonlinearity::default(), true).unwrap();
        for (x, v) in g.points().iter().zip(r.samples()) {
            assert!((v + 0.5 * (2.0 * x).sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_step_is_exact() {
        let g = Grid::new(30.0, 256).unwrap();
        let u = Field::sample(&g, |x| (-x * x).exp() * (1.0 + x)).unwrap();
        let mut s = Stepper::new(&u, 0.5, 0.01, true, Nonlinearity::linear(), None).unwrap();
        for _ in 0..10 {
            s.step();
        }
        let exact = linear_group(&u, 0.1, 0.5).unwrap();
        assert!(s.field().sub(&exact).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn zero_stays_zero() {
        let g = Grid::new(30.0, 128).unwrap();
        let mut s = Stepper::new(&Field::zeros(&g), 0.3, 0.01, true, Nonlinearity::default(), None).unwrap();
        for _ in 0..5 {
            s.step();
        }
        assert_eq!(s.field().max_abs(), 0.0);
    }
}
