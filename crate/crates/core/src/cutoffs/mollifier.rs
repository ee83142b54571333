//! The standard bump `ρ(z) = C exp(-1/(1-z²))` on `(-1, 1)`, normalized to
//! unit mass, with its derivatives, distribution function and first moment.

use std::sync::OnceLock;

use crate::quad;

const QUAD_TOL: f64 = 1e-15;

/// Beyond this value of `1/(1-z²)` the bump and all its tabulated
/// derivatives are below `1e-200` and are returned as zero.
const FLAT_CUTOFF: f64 = 600.0;

fn raw(z: f64) -> f64 {
    let w = 1.0 - z * z;
    if w <= 0.0 || 1.0 / w > FLAT_CUTOFF {
        0.0
    } else {
        (-1.0 / w).exp()
    }
}

/// Normalization constant `C = 1 / ∫ exp(-1/(1-z²))`.
pub fn normalization() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| 1.0 / quad::integrate(raw, -1.0, 1.0, 1e-16))
}

pub fn rho(z: f64) -> f64 {
    normalization() * raw(z)
}

/// `ρ^{(order)}(z)` from the Taylor jet of `exp(-1/(1-(z+h)²))` at `h = 0`.
pub fn rho_derivative(z: f64, order: usize) -> f64 {
    let w0 = 1.0 - z * z;
    if w0 <= 0.0 || 1.0 / w0 > FLAT_CUTOFF {
        return 0.0;
    }
    // w(h) = w0 - 2z h - h², r = 1/w, g = -r, e = exp(g)
    let w1 = -2.0 * z;
    let w2 = -1.0;
    let mut r = vec![0.0; order + 1];
    r[0] = 1.0 / w0;
    for n in 1..=order {
        let mut acc = w1 * r[n - 1];
        if n >= 2 {
            acc += w2 * r[n - 2];
        }
        r[n] = -acc / w0;
    }
    let g: Vec<f64> = r.iter().map(|v| -v).collect();
    let mut e = vec![0.0; order + 1];
    e[0] = g[0].exp();
    for n in 1..=order {
        let mut acc = 0.0;
        for k in 1..=n {
            acc += k as f64 * g[k] * e[n - k];
        }
        e[n] = acc / n as f64;
    }
    let factorial: f64 = (1..=order).map(|k| k as f64).product();
    normalization() * e[order] * factorial
}

/// `∫_{-1}^{t} ρ`.
pub fn cdf(t: f64) -> f64 {
    if t <= -1.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else if t > 0.0 {
        1.0 - cdf(-t)
    } else {
        quad::integrate(rho, -1.0, t, QUAD_TOL)
    }
}

/// `∫_{-1}^{t} z ρ(z) dz`; even in `t`, zero at `±1`.
pub fn first_moment(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let t = -t.abs();
        quad::integrate(|z| z * rho(z), -1.0, t, QUAD_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mass_and_symmetry() {
        assert!((cdf(1.0 - 1e-12) - 1.0).abs() < 1e-14);
        assert!((cdf(0.0) - 0.5).abs() < 1e-14);
        assert!((cdf(0.3) + cdf(-0.3) - 1.0).abs() < 1e-15);
        assert!((rho(0.4) - rho(-0.4)).abs() < 1e-16);
        assert_eq!(rho(1.0), 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for &z in &[-0.7, -0.2, 0.0, 0.35, 0.8] {
            for order in 0..6 {
                // fourth-order central difference
                let h = 1e-3;
                let f = |dz: f64| rho_derivative(z + dz, order);
                let fd = (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h);
                let exact = rho_derivative(z, order + 1);
                let scale = exact.abs().max(1.0);
                assert!(
                    (fd - exact).abs() < 1e-5 * scale,
                    "z={z} order={order}: {fd} vs {exact}"
                );
            }
        }
        assert!((rho_derivative(0.3, 0) - rho(0.3)).abs() < 1e-16);
    }

    #[test]
    fn moment_is_even() {
        assert!((first_moment(0.5) - first_moment(-0.5)).abs() < 1e-16);
        assert!(first_moment(-0.5) < 0.0);
    }
}
