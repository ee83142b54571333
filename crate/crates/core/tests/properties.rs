use dgbo_core::commutators::{random_band_limited, CommutatorExpansion, Localizer};
use dgbo_core::cutoffs::CutoffFamily;
use dgbo_core::diagnostics::Trapezoid;
use dgbo_core::solver::{nonlinear_rhs, Nonlinearity, Stepper};
use dgbo_core::spectral::{spatial_derivative, Field, Grid, Multiplier};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(grid: &Grid, band: usize, seed: u64) -> Field {
    random_band_limited(grid, band, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn close(a: &Field, b: &Field, tol: f64) -> bool {
    a.sub(b).unwrap().max_abs() <= tol * a.max_abs().max(b.max_abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn remainder_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0, n in 0usize..3) {
        let g = Grid::new(30.0, 256).unwrap();
        let fam = CutoffFamily::new(1.0, 5.0).unwrap();
        let h = Localizer::cutoff(&fam, &g, true).unwrap();
        let exp = CommutatorExpansion::new(2.0 * n as f64 + 1.5, n, h).unwrap();
        let f = field(&g, 40, seed);
        let k = field(&g, 40, seed ^ 0x9e37);
        let lhs = exp.apply_rn(&f.scale(a).add(&k.scale(b)).unwrap()).unwrap();
        let rhs = exp.apply_rn(&f).unwrap().scale(a).add(&exp.apply_rn(&k).unwrap().scale(b)).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn homogeneous_multipliers_compose(s in 0.0f64..3.0, t in 0.0f64..3.0, seed in any::<u64>()) {
        let g = Grid::new(10.0, 128).unwrap();
        let f = field(&g, 30, seed);
        let ds = Multiplier::homogeneous(&g, s).unwrap();
        let dt = Multiplier::homogeneous(&g, t).unwrap();
        let composed = f.apply(&ds.then(&dt).unwrap()).unwrap();
        let sequential = f.apply(&ds).unwrap().apply(&dt).unwrap();
        let direct = f.apply(&Multiplier::homogeneous(&g, s + t).unwrap()).unwrap();
        prop_assert!(close(&composed, &sequential, 1e-12));
        prop_assert!(close(&composed, &direct, 1e-12));
    }

    #[test]
    fn hilbert_squared_is_minus_identity_off_the_mean(seed in any::<u64>()) {
        let g = Grid::new(10.0, 128).unwrap();
        let f = field(&g, 30, seed);
        let f = f.sub(&Field::constant(&g, f.mean())).unwrap();
        let h = Multiplier::hilbert(&g);
        let hh = f.apply(&h).unwrap().apply(&h).unwrap();
        prop_assert!(close(&hh, &f.scale(-1.0), 1e-13));
    }

    #[test]
    fn divergence_form_matches_pointwise_product(seed in any::<u64>(), band in 1usize..60) {
        // A band below N/4 makes u² alias free, so both forms are exact
        // before the final projection.
        let g = Grid::new(15.0, 256).unwrap();
        let u = field(&g, band, seed).scale(3.0);
        let divergence = nonlinear_rhs(&u, Nonlinearity::default(), true).unwrap();
        let mask: Vec<Complex64> = g
            .dealias_mask()
            .iter()
            .map(|&k| Complex64::new(if k { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let project = Multiplier::new(&g, "P", mask).unwrap();
        let pointwise = u.mul(&spatial_derivative(&u, 1)).unwrap().scale(-1.0).apply(&project).unwrap();
        prop_assert!(close(&divergence, &pointwise, 1e-11));
    }

    #[test]
    fn trapezoid_total_never_decreases_for_nonnegative_data(
        values in proptest::collection::vec(0.0f64..1e3, 1..50),
        dt in 1e-4f64..1.0,
    ) {
        let mut tr = Trapezoid::default();
        let mut last = 0.0;
        for (i, v) in values.iter().enumerate() {
            let total = tr.push(i as f64 * dt, *v);
            prop_assert!(total >= last);
            last = total;
        }
    }
}

#[test]
fn integration_runs_backward_to_the_initial_state() {
    let g = Grid::new(30.0, 512).unwrap();
    let u0 = Field::sample(&g, |x| {
        1.5 * (-(x * x) / 2.0).exp() + 0.5 * (-((x - 4.0).powi(2))).exp()
    })
    .unwrap();
    for alpha in [0.25, 0.5, 1.0] {
        let mut s = Stepper::new(&u0, alpha, 1e-3, true, Nonlinearity::default(), None).unwrap();
        for _ in 0..500 {
            s.step();
        }
        assert!(
            s.field().sub(&u0).unwrap().l2_norm() > 1e-2,
            "the flow moved nothing"
        );
        s.set_dt(-1e-3);
        for _ in 0..500 {
            s.step();
        }
        let err = s.field().sub(&u0).unwrap().l2_norm();
        assert!(err <= 1e-6, "alpha {alpha}: {err:e}");
    }
}

/// `‖J^s(fg) - f J^s g‖ <= C (‖f'‖_∞ ‖J^{s-1} g‖ + ‖J^s f‖ ‖g‖_∞)` for a
/// fixed pair of smooth fields: the implied constant must be moderate and
/// resolution independent.
#[test]
fn kato_ponce_commutator_spot_check() {
    let constant = |n: usize, s: f64| {
        let g = Grid::new(20.0, n).unwrap();
        let f = Field::sample(&g, |x| (x / 2.0).tanh() * (-(x * x) / 20.0).exp()).unwrap();
        let k = Field::sample(&g, |x| (-(x - 1.0).powi(2)).exp() * (3.0 * x).cos()).unwrap();
        let js = Multiplier::bessel(&g, s);
        let lhs = f
            .mul(&k)
            .unwrap()
            .apply(&js)
            .unwrap()
            .sub(&f.mul(&k.apply(&js).unwrap()).unwrap())
            .unwrap();
        let rhs = spatial_derivative(&f, 1).max_abs()
            * k.apply(&Multiplier::bessel(&g, s - 1.0)).unwrap().l2_norm()
            + f.apply(&js).unwrap().l2_norm() * k.max_abs();
        lhs.l2_norm() / rhs
    };
    for s in [1.0, 1.5, 2.0, 3.0] {
        let (c1, c2) = (constant(512, s), constant(1024, s));
        assert!(c1 > 0.0 && c1 < 10.0, "s {s}: {c1}");
        // The sup norms are grid maxima, accurate to O(dx²) only.
        assert!((c1 - c2).abs() <= 1e-2 * c1, "s {s}: {c1} vs {c2}");
    }
}
