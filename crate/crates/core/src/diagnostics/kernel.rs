//! The dyadic oscillatory integral
//! `I_k(x, t) = ∫ exp(i(t ξ|ξ|^{α+1} + x ξ)) ψ_k(ξ) dξ`
//! against its envelope `H^α_k`, and the lattice sum of the envelope.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoffs::mollifier::rho;
use crate::error::{invalid, Result};
use crate::quad::GaussLegendre;
use crate::spectral::check_alpha;

/// Gauss-Legendre nodes per panel; panels are at most a quarter period of
/// the fastest local oscillation, so this is far past convergence.
const NODES: usize = 6;
/// Upper bound on `|t|`.
pub const T_MAX: f64 = 2.0;

/// `ψ_k(ξ) = ρ((ξ - 1.25·2^k)/(0.75·2^k)) / ρ(0)`: a unit-height bump
/// supported in `(2^{k-1}, 2^{k+1})`.
pub fn bump(k: u32, xi: f64) -> f64 {
    let s = 2f64.powi(k as i32);
    rho((xi - 1.25 * s) / (0.75 * s)) / rho(0.0)
}

/// `∫ ψ_k`, which is `0.75·2^k / ρ(0)` because `ρ` has unit mass.
pub fn bump_mass(k: u32) -> f64 {
    0.75 * 2f64.powi(k as i32) / rho(0.0)
}

/// The constant `c` in the envelope breakpoint `c·2^{k(α+1)}`.
///
/// The phase is stationary where `|x| = t(α+2)ξ^{α+1}`, which for `|t| <= 2`
/// and `ξ <= 2^{k+1}` stays below `2(α+2)2^{α+1}·2^{k(α+1)}`; twice that is
/// used so the stationary set lies well inside the middle regime.
pub fn breakpoint_constant(alpha: f64) -> f64 {
    4.0 * (alpha + 2.0) * 2f64.powf(alpha + 1.0)
}

/// `H^α_k(x)`: `2^k` for `|x| <= 1`, `2^{k/2}|x|^{-1/2}` up to
/// `c·2^{k(α+1)}`, and `(1 + x²)^{-1}` beyond.
pub fn envelope(k: u32, alpha: f64, x: f64) -> f64 {
    let ax = x.abs();
    let s = 2f64.powi(k as i32);
    if ax <= 1.0 {
        s
    } else if ax <= breakpoint_constant(alpha) * s.powf(alpha + 1.0) {
        s.sqrt() / ax.sqrt()
    } else {
        1.0 / (1.0 + ax * ax)
    }
}

pub fn kernel_integral(k: u32, alpha: f64, x: f64, t: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    if !(t.abs() <= T_MAX) {
        return Err(invalid("t", format!("need |t| <= {T_MAX}, got {t}")));
    }
    let s = 2f64.powi(k as i32);
    let (a, b) = (0.5 * s, 2.0 * s);
    // Largest |φ'(ξ)| = |t(α+2)ξ^{α+1} + x| on the support.
    let fastest = t.abs() * (alpha + 2.0) * b.powf(alpha + 1.0) + x.abs();
    let quarter = 0.5 * std::f64::consts::PI / fastest.max(1e-300);
    let panels = (((b - a) / quarter).ceil() as usize).max(128);
    let gl = GaussLegendre::new(NODES);
    let phase = |xi: f64| t * xi.powf(alpha + 2.0) + x * xi;
    let re = gl.integrate(|xi| bump(k, xi) * phase(xi).cos(), a, b, panels);
    let im = gl.integrate(|xi| bump(k, xi) * phase(xi).sin(), a, b, panels);
    Ok(Complex64::new(re, im))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub x: f64,
    pub t: f64,
    pub modulus: f64,
    pub envelope: f64,
    pub ratio: f64,
}

/// The envelope lattice sum `Σ_l H^α_k(|l|)` normalized two ways.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSum {
    pub k: u32,
    pub sum: f64,
    /// `sum / 2^{k(α+1)/2}`.
    pub ratio: f64,
    /// `sum / 2^{k(α+2)/2}`, the growth rate the middle regime actually has.
    pub ratio_alt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub k: u32,
    pub alpha: f64,
    pub breakpoint: f64,
    pub bump_mass: f64,
    /// Smallest `C` with `|I| <= C H^α_k` over the samples.
    pub fitted_constant: f64,
    pub samples: Vec<KernelSample>,
    pub lattice: LatticeSum,
}

/// `Σ_{l ∈ Z} H^α_k(|l|)`. The middle regime is summed term by term; the
/// `(1+l²)^{-1}` tail is summed to `X + 10⁶` and closed with `1/l`.
pub fn lattice_sum(k: u32, alpha: f64) -> LatticeSum {
    let s = 2f64.powi(k as i32);
    let x_break = breakpoint_constant(alpha) * s.powf(alpha + 1.0);
    let last = x_break.floor() as u64;
    let mut sum = envelope(k, alpha, 0.0) + 2.0 * envelope(k, alpha, 1.0);
    let middle: f64 = (2..=last).map(|l| envelope(k, alpha, l as f64)).sum();
    let far_end = last + 1_000_000;
    let far: f64 = (last + 1..=far_end).map(|l| envelope(k, alpha, l as f64)).sum();
    sum += 2.0 * (middle + far + 1.0 / far_end as f64);
    LatticeSum {
        k,
        sum,
        ratio: sum / s.powf(0.5 * (alpha + 1.0)),
        ratio_alt: sum / s.powf(0.5 * (alpha + 2.0)),
    }
}

/// Stratified `(x, t)` samples: a fifth in `|x| <= 1`, two fifths placed on
/// the stationary-phase curve `x = -t(α+2)ξ*^{α+1}`, a fifth log-uniform in
/// the middle regime, and a fifth beyond the breakpoint.
pub fn kernel_samples(k: u32, alpha: f64, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let s = 2f64.powi(k as i32);
    let x_break = breakpoint_constant(alpha) * s.powf(alpha + 1.0);
    let sign = |rng: &mut ChaCha8Rng| if rng.random::<bool>() { 1.0 } else { -1.0 };
    (0..count)
        .map(|i| {
            let t = sign(&mut rng) * rng.random_range(0.05..T_MAX);
            let x = match i % 5 {
                0 => rng.random_range(-1.0..=1.0),
                1 | 2 => {
                    let xi = rng.random_range(0.6..1.9) * s;
                    -t * (alpha + 2.0) * xi.powf(alpha + 1.0)
                }
                3 => sign(&mut rng) * x_break.powf(rng.random_range(0.0..1.0)),
                _ => sign(&mut rng) * x_break * rng.random_range(1.0..2.0),
            };
            (x, t)
        })
        .collect()
}

pub fn oscillatory_kernel_check(k: u32, alpha: f64, samples: &[(f64, f64)]) -> Result<KernelReport> {
    check_alpha(alpha)?;
    if k == 0 {
        return Err(invalid("k", "dyadic index must be at least 1"));
    }
    let samples: Vec<KernelSample> = samples
        .par_iter()
        .map(|&(x, t)| {
            let modulus = kernel_integral(k, alpha, x, t)?.norm();
            let envelope = envelope(k, alpha, x);
            Ok(KernelSample {
                x,
                t,
                modulus,
                envelope,
                ratio: modulus / envelope,
            })
        })
        .collect::<Result<_>>()?;
    let fitted_constant = samples.iter().fold(0.0, |m: f64, s| m.max(s.ratio));
    Ok(KernelReport {
        k,
        alpha,
        breakpoint: breakpoint_constant(alpha) * 2f64.powf(k as f64 * (alpha + 1.0)),
        bump_mass: bump_mass(k),
        fitted_constant,
        samples,
        lattice: lattice_sum(k, alpha),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn origin_value_is_bump_mass() {
        for k in 1..6 {
            let i = kernel_integral(k, 0.5, 0.0, 0.0).unwrap();
            let s = 2f64.powi(k as i32);
            let direct = quad::integrate(|xi| bump(k, xi), 0.5 * s, 2.0 * s, 1e-13);
            assert!((i.re - direct).abs() < 1e-10 * direct, "{k}");
            assert!((i.re - bump_mass(k)).abs() < 1e-10 * direct);
            assert!(i.im.abs() < 1e-12);
            assert!(i.re <= envelope(k, 0.5, 0.0));
        }
    }

    #[test]
    fn pure_translation_is_a_fourier_transform() {
        // t = 0: I(x) = ∫ e^{ixξ} ψ(ξ) dξ, compare with adaptive quadrature.
        let (k, x) = (3, 2.7);
        let i = kernel_integral(k, 0.5, x, 0.0).unwrap();
        let re = quad::integrate(|xi| bump(k, xi) * (x * xi).cos(), 4.0, 16.0, 1e-13);
        let im = quad::integrate(|xi| bump(k, xi) * (x * xi).sin(), 4.0, 16.0, 1e-13);
        assert!((i.re - re).abs() < 1e-10 && (i.im - im).abs() < 1e-10);
    }

    #[test]
    fn envelope_pieces_and_time_limit() {
        let k = 4;
        assert_eq!(envelope(k, 0.5, 0.3), 16.0);
        assert!((envelope(k, 0.5, 4.0) - 2.0).abs() < 1e-15);
        let far = 2.0 * breakpoint_constant(0.5) * 16f64.powf(1.5);
        assert!((envelope(k, 0.5, far) - 1.0 / (1.0 + far * far)).abs() < 1e-20);
        assert!(kernel_integral(k, 0.5, 0.0, 2.5).is_err());
    }

    #[test]
    fn samples_are_reproducible_and_in_range() {
        let a = kernel_samples(4, 0.25, 50, 7);
        assert_eq!(a, kernel_samples(4, 0.25, 50, 7));
        assert!(a.iter().all(|&(_, t)| t.abs() <= T_MAX));
    }
}
