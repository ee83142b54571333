use rayon::prelude::*;

use crate::cutoffs::CutoffFamily;
use crate::error::{invalid, Error, Result};
use crate::spectral::{spatial_derivative, Field, Grid};

#[derive(Clone, Debug)]
enum Source {
    Samples,
    Cutoff {
        family: CutoffFamily,
        squared: bool,
        periodized: bool,
    },
}

/// The multiplier function `h` of a commutator, with its derivatives
/// `h^{(k)}` tabulated on a grid up to some order.
#[derive(Clone, Debug)]
pub struct Localizer {
    derivs: Vec<Field>,
    source: Source,
}

impl Localizer {
    /// Derivatives by spectral differentiation of the sampled field.
    pub fn from_field(h: &Field, max_order: u32) -> Self {
        let derivs = (0..=max_order).map(|k| spatial_derivative(h, k)).collect();
        Self {
            derivs,
            source: Source::Samples,
        }
    }

    /// `χ` or `χ²` of a cutoff family, with closed-form derivatives.
    ///
    /// The cutoff saturates at 1 on the right and therefore jumps at the box
    /// edge; that is harmless for operators applied to fields that vanish
    /// there, but not for bounds that need `ĥ` itself (see
    /// [`Localizer::periodized_chi_squared`]).
    pub fn cutoff(family: &CutoffFamily, grid: &Grid, squared: bool) -> Result<Self> {
        if family.b() >= grid.half_length() {
            return Err(Error::Wraparound(format!(
                "cutoff transition [{}, {}] reaches the box edge {}",
                family.eps(),
                family.b(),
                grid.half_length()
            )));
        }
        Self::tabulate(
            grid,
            Source::Cutoff {
                family: family.clone(),
                squared,
                periodized: false,
            },
        )
    }

    /// A periodic version of `χ²`: `χ²(x)` on `x <= L/2` and `χ²(L - x)`
    /// beyond, so the ramp up on `[ε, b]` is matched by a ramp down on
    /// `[L - b, L - ε]` and the function is smooth on the torus.
    pub fn periodized_chi_squared(family: &CutoffFamily, grid: &Grid) -> Result<Self> {
        if family.b() > 0.5 * grid.half_length() {
            return Err(invalid(
                "b",
                format!(
                    "periodized cutoff needs b <= L/2, got b = {} with L = {}",
                    family.b(),
                    grid.half_length()
                ),
            ));
        }
        Self::tabulate(
            grid,
            Source::Cutoff {
                family: family.clone(),
                squared: true,
                periodized: true,
            },
        )
    }

    fn tabulate(grid: &Grid, source: Source) -> Result<Self> {
        let Source::Cutoff { family, .. } = &source else {
            unreachable!("only cutoff sources are tabulated");
        };
        let max = family.max_order();
        let l = grid.half_length();
        let derivs = (0..=max)
            .map(|k| {
                let values: Result<Vec<f64>> = grid
                    .points()
                    .par_iter()
                    .map(|&x| eval(&source, l, x, k))
                    .collect();
                Field::new(grid, values?)
            })
            .collect::<Result<_>>()?;
        Ok(Self { derivs, source })
    }

    pub fn grid(&self) -> &Grid {
        self.derivs[0].grid()
    }

    pub fn value(&self) -> &Field {
        &self.derivs[0]
    }

    pub fn max_order(&self) -> u32 {
        self.derivs.len() as u32 - 1
    }

    pub fn derivative(&self, k: u32) -> Result<&Field> {
        self.derivs.get(k as usize).ok_or_else(|| {
            invalid(
                "k",
                format!("h^({k}) requested, tabulated up to {}", self.max_order()),
            )
        })
    }

    /// The same localizer on another grid. Only available when `h` is known
    /// in closed form.
    pub fn resampled(&self, grid: &Grid) -> Result<Self> {
        match &self.source {
            Source::Samples => Err(invalid(
                "localizer",
                "sampled localizers cannot be evaluated on a new grid",
            )),
            source => Self::tabulate(grid, source.clone()),
        }
    }

    /// `(2π)^{-1/2} ‖(D^s h)^∧‖_{L¹(ξ)}`, computed on a grid `refine` times
    /// finer when `h` is known in closed form.
    ///
    /// On the torus this is `Σ_m |k_m|^s |c_m|` with `c_m` the Fourier
    /// series coefficients of `h`.
    pub fn symbol_l1(&self, s: f64, refine: usize) -> Result<f64> {
        let fine;
        let h = match self.source {
            Source::Samples => self.value(),
            _ => {
                fine = self.resampled(&self.grid().refined(refine)?)?;
                fine.value()
            }
        };
        let g = h.grid();
        let n = g.len() as f64;
        Ok(h.spectrum()
            .iter()
            .zip(g.wavenumbers())
            .map(|(c, k)| {
                if *k == 0.0 {
                    0.0
                } else {
                    k.abs().powf(s) * c.norm()
                }
            })
            .sum::<f64>()
            / n)
    }
}

fn eval(source: &Source, l: f64, x: f64, k: u32) -> Result<f64> {
    let Source::Cutoff {
        family,
        squared,
        periodized,
    } = source
    else {
        unreachable!()
    };
    let at = |y: f64| {
        if *squared {
            family.chi_squared_derivative(y, k)
        } else {
            family.chi_derivative(y, k)
        }
    };
    if *periodized && x > 0.5 * l {
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * at(l - x)?)
    } else {
        at(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_matches_spectral_derivatives_when_periodic() {
        // The bump's spectrum decays like exp(-c sqrt|k|), so agreement is
        // limited by resolution rather than roundoff.
        let g = Grid::new(16.0, 2048).unwrap();
        let fam = CutoffFamily::new(1.0, 5.0).unwrap();
        let h = Localizer::periodized_chi_squared(&fam, &g).unwrap();
        let spectral = Localizer::from_field(h.value(), 3);
        for k in 0..=3 {
            let d = h
                .derivative(k)
                .unwrap()
                .sub(spectral.derivative(k).unwrap())
                .unwrap();
            let scale = h.derivative(k).unwrap().max_abs().max(1.0);
            assert!(d.max_abs() < 1e-3 * scale, "k={k}: {}", d.max_abs());
        }
    }

    #[test]
    fn periodized_profile_shape() {
        let g = Grid::new(16.0, 256).unwrap();
        let fam = CutoffFamily::new(1.0, 5.0).unwrap();
        let h = Localizer::periodized_chi_squared(&fam, &g).unwrap();
        for (x, v) in g.points().iter().zip(h.value().samples()) {
            if *x <= 1.0 || *x >= 15.0 {
                assert_eq!(*v, 0.0);
            } else if (5.0..=11.0).contains(x) {
                assert_eq!(*v, 1.0);
            }
        }
        assert!(Localizer::periodized_chi_squared(&CutoffFamily::new(2.0, 10.0).unwrap(), &g).is_err());
    }

    #[test]
    fn symbol_l1_converges_under_refinement() {
        let g = Grid::new(30.0, 1024).unwrap();
        let fam = CutoffFamily::new(1.0, 5.0).unwrap();
        let h = Localizer::periodized_chi_squared(&fam, &g).unwrap();
        let a = h.symbol_l1(2.5, 4).unwrap();
        let b = h.symbol_l1(2.5, 8).unwrap();
        assert!((a - b).abs() < 1e-4 * b, "{a} vs {b}");
    }
}
