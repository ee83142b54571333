use serde::{Deserialize, Serialize};

use super::config::Nonlinearity;
use crate::error::Result;
use crate::spectral::{fractional_derivative, Field};

/// `I = ∫u`, `M = ∫u²` and the Hamiltonian
/// `H = ½∫(D^{(1+α)/2}u)² - coef/((p+1)(p+2)) ∫u^{p+2}`,
/// which is `½∫(D^{(1+α)/2}u)² - (1/6)∫u³` for the equation proper.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub integral: f64,
    pub mass: f64,
    pub energy: f64,
}

pub fn conserved(u: &Field, alpha: f64, nonlinearity: Nonlinearity) -> Result<Conserved> {
    let p = nonlinearity.power as i32;
    let d = fractional_derivative(u, 0.5 * (1.0 + alpha))?;
    let potential = u
        .grid()
        .integrate(&u.samples().iter().map(|v| v.powi(p + 2)).collect::<Vec<_>>());
    let weight = nonlinearity.coefficient / ((p + 1) * (p + 2)) as f64;
    Ok(Conserved {
        integral: u.integral(),
        mass: u.l2_norm_sq(),
        energy: 0.5 * d.l2_norm_sq() - weight * potential,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn trig_and_zero() {
        let g = Grid::new(PI, 64).unwrap();
        let s = Field::sample(&g, f64::sin).unwrap();
        let c = conserved(&s, 0.5, Nonlinearity::default()).unwrap();
        assert!(c.integral.abs() < 1e-14);
        assert!((c.mass - PI).abs() < 1e-13);
        let z = conserved(&Field::zeros(&g), 0.5, Nonlinearity::default()).unwrap();
        assert_eq!(z, Conserved::default());
    }

    #[test]
    fn energy_matches_spectral_sum() {
        // Independent path: ½ Σ |k|^{1.5} |û|² dx/N - (1/6) Σ u³ dx.
        let g = Grid::new(30.0, 1024).unwrap();
        let u = Field::sample(&g, |x| (-x * x).exp()).unwrap();
        let spec = g.forward(u.samples());
        let dx = g.dx();
        let n = g.len() as f64;
        let kinetic: f64 = spec
            .iter()
            .zip(g.wavenumbers())
            .map(|(c, k)| k.abs().powf(1.5) * c.norm_sqr())
            .sum::<f64>()
            * dx
            / n;
        let cubic: f64 = u.samples().iter().map(|v| v * v * v).sum::<f64>() * dx;
        let oracle = 0.5 * kinetic - cubic / 6.0;
        let c = conserved(&u, 0.5, Nonlinearity::default()).unwrap();
        assert!((c.energy - oracle).abs() < 1e-10, "{} vs {oracle}", c.energy);
    }
}
