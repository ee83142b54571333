//! Periodic pseudo-spectral representation and the Fourier multipliers
//! `D^s`, `J^s`, `ℋ`, `∂_x^j` and the free group `S(t)`.

mod field;
mod grid;
mod multiplier;

pub use field::Field;
pub use grid::{Grid, DEFAULT_DEALIAS_CUT};
pub use multiplier::Multiplier;

pub(crate) use multiplier::check_alpha;

use crate::error::{invalid, Result};

/// `D^s f`, spectrum `|k|^s f̂(k)`, for `s >= 0`.
pub fn fractional_derivative(f: &Field, s: f64) -> Result<Field> {
    if s < 0.0 || s.is_nan() {
        return Err(invalid("s", format!("order must be nonnegative, got {s}")));
    }
    f.apply(&Multiplier::homogeneous(f.grid(), s)?)
}

/// Hilbert transform, multiplier `-i sgn(k)`.
pub fn hilbert(f: &Field) -> Field {
    f.apply(&Multiplier::hilbert(f.grid()))
        .expect("multiplier built on the field's grid")
}

/// Bessel potential `J^s`, multiplier `(1 + k²)^{s/2}`. Any real `s`.
pub fn bessel_potential(f: &Field, s: f64) -> Field {
    f.apply(&Multiplier::bessel(f.grid(), s))
        .expect("multiplier built on the field's grid")
}

/// `S(t) f` for the linear part of the equation.
pub fn linear_group(f: &Field, t: f64, alpha: f64) -> Result<Field> {
    f.apply(&Multiplier::linear_group(f.grid(), t, alpha)?)
}

/// `∂_x^j f`.
pub fn spatial_derivative(f: &Field, j: u32) -> Field {
    f.apply(&Multiplier::derivative(f.grid(), j))
        .expect("multiplier built on the field's grid")
}

/// `‖J^s f‖²_{L²}` evaluated as a weighted spectral sum (Parseval).
pub fn sobolev_norm_sq(f: &Field, s: f64) -> f64 {
    let g = f.grid();
    let scale = g.dx() / g.len() as f64;
    f.spectrum()
        .iter()
        .zip(g.wavenumbers())
        .map(|(c, k)| (1.0 + k * k).powf(s) * c.norm_sqr())
        .sum::<f64>()
        * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pi_grid(n: usize) -> Grid {
        Grid::new(PI, n).unwrap()
    }

    #[test]
    fn fractional_derivative_of_sine() {
        let g = pi_grid(64);
        let f = Field::sample(&g, |x| (3.0 * x).sin()).unwrap();
        for s in [0.3, 1.0, 1.7, 2.5] {
            let d = fractional_derivative(&f, s).unwrap();
            let c = 3f64.powf(s);
            for (x, v) in g.points().iter().zip(d.samples()) {
                assert!((v - c * (3.0 * x).sin()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn d_zero_is_identity_and_negative_rejected() {
        let g = pi_grid(32);
        let f = Field::sample(&g, |x| 1.5 + x.cos()).unwrap();
        let d0 = fractional_derivative(&f, 0.0).unwrap();
        assert!(d0.sub(&f).unwrap().max_abs() < 1e-13);
        assert!(fractional_derivative(&f, -0.5).is_err());
    }

    #[test]
    fn half_derivatives_compose() {
        let g = pi_grid(64);
        let f = Field::sample(&g, |x| (2.0 * x).sin()).unwrap();
        let twice = fractional_derivative(&fractional_derivative(&f, 0.5).unwrap(), 0.5).unwrap();
        for (x, v) in g.points().iter().zip(twice.samples()) {
            assert!((v - 2.0 * (2.0 * x).sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn hilbert_of_trig() {
        let g = pi_grid(64);
        for k in 1..5 {
            let kf = k as f64;
            let c = Field::sample(&g, |x| (kf * x).cos()).unwrap();
            let s = Field::sample(&g, |x| (kf * x).sin()).unwrap();
            assert!(hilbert(&c).sub(&s).unwrap().max_abs() < 1e-12);
            assert!(hilbert(&s).add(&c).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn hilbert_squared_removes_mean() {
        let g = Grid::new(8.0, 256).unwrap();
        let f = Field::sample(&g, |x| 0.7 + (-(x - 1.0) * (x - 1.0)).exp()).unwrap();
        let hh = hilbert(&hilbert(&f));
        let mean = f.mean();
        let r = hh.add(&f.map(|v| v - mean)).unwrap();
        assert!(r.max_abs() < 1e-12, "{}", r.max_abs());
    }

    #[test]
    fn bessel_potential_cases() {
        let g = pi_grid(32);
        let f = Field::sample(&g, |x| x.sin()).unwrap();
        assert!(bessel_potential(&f, 0.0).sub(&f).unwrap().max_abs() < 1e-13);
        let j2 = bessel_potential(&f, 2.0);
        assert!(j2.sub(&f.scale(2.0)).unwrap().max_abs() < 1e-12);
        let g2 = Field::sample(&g, |x| (x.cos() + 0.2).exp()).unwrap();
        let back = bessel_potential(&bessel_potential(&g2, 1.3), -1.3);
        assert!(back.sub(&g2).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn bessel_norm_matches_parseval_quadrature() {
        // Oracle: Gaussian e^{-x²} has f̂(ξ) = √π e^{-ξ²/4} (non-unitary
        // convention), so ‖J^s f‖² = (1/2π) ∫ (1+ξ²)^s π e^{-ξ²/2} dξ.
        let g = Grid::new(20.0, 512).unwrap();
        let f = Field::sample(&g, |x| (-x * x).exp()).unwrap();
        for s in [0.0, 1.0, 1.5] {
            let numeric = bessel_potential(&f, s).l2_norm_sq();
            let h = 1e-3;
            let mut quad = 0.0;
            let mut xi: f64 = -40.0;
            while xi < 40.0 {
                let m = xi + 0.5 * h;
                quad += (1.0 + m * m).powf(s) * (-m * m / 2.0).exp() * h;
                xi += h;
            }
            let oracle = quad * PI / (2.0 * PI);
            assert!((numeric - oracle).abs() / oracle < 1e-9, "s={s}");
            assert!((sobolev_norm_sq(&f, s) - numeric).abs() / numeric < 1e-12);
        }
    }

    #[test]
    fn linear_group_properties() {
        let g = Grid::new(10.0, 256).unwrap();
        let f = Field::sample(&g, |x| (-(x * x)).exp() * (1.0 + 0.3 * x)).unwrap();
        let s0 = linear_group(&f, 0.0, 0.5).unwrap();
        assert!(s0.sub(&f).unwrap().max_abs() < 1e-14);
        let s = linear_group(&f, 1.7, 0.5).unwrap();
        assert!((s.l2_norm() - f.l2_norm()).abs() < 1e-12 * f.l2_norm());
        let back = linear_group(&s, -1.7, 0.5).unwrap();
        assert!(back.sub(&f).unwrap().l2_norm() < 1e-12);
        assert!(linear_group(&f, 1.0, 1.2).is_err());
    }

    #[test]
    fn derivatives() {
        let g = pi_grid(32);
        let f = Field::sample(&g, |x| x.sin()).unwrap();
        let c = Field::sample(&g, |x| x.cos()).unwrap();
        assert!(spatial_derivative(&f, 1).sub(&c).unwrap().max_abs() < 1e-12);
        assert!(spatial_derivative(&f, 0).sub(&f).unwrap().max_abs() < 1e-14);

        let g = Grid::new(12.0, 512).unwrap();
        let f = Field::sample(&g, |x| (-x * x).exp()).unwrap();
        let d2 = spatial_derivative(&f, 2);
        for (x, v) in g.points().iter().zip(d2.samples()) {
            let exact = (4.0 * x * x - 2.0) * (-x * x).exp();
            assert!((v - exact).abs() < 1e-8);
        }
    }
}
