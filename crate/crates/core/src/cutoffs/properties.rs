use rayon::prelude::*;
use serde::Serialize;

use super::{CutoffFamily, Ramp};
use crate::error::{invalid, Result};

/// Tolerance for identities that hold exactly in the construction.
const EXACT_TOL: f64 = 1e-14;
/// Tolerance for inequalities that are attained with equality somewhere.
const BOUND_TOL: f64 = 1e-12;
const PARTITION_TOL: f64 = 1e-10;
/// Safety factor applied to fitted constants.
const FIT_FACTOR: f64 = 1.05;

/// One line of the property sweep.
#[derive(Clone, Debug, Serialize)]
pub struct PropertyCheck {
    pub id: u8,
    pub name: String,
    pub bound: String,
    /// Smallest `allowed - observed` over the samples; negative means violated.
    pub worst_margin: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_constants: Option<Vec<f64>>,
    /// Reported but not part of the overall verdict.
    pub informational: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub eps: f64,
    pub b: f64,
    pub samples: usize,
    pub interval: [f64; 2],
    pub checks: Vec<PropertyCheck>,
    pub max_partition_residual: f64,
    pub all_pass: bool,
}

impl PropertyReport {
    pub fn check(&self, id: u8) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.id == id && !c.informational)
    }

    pub fn failures(&self) -> Vec<&PropertyCheck> {
        self.checks
            .iter()
            .filter(|c| !c.pass && !c.informational)
            .collect()
    }
}

struct Row {
    x: f64,
    /// `χ^{(j)}` for `j = 0..=max_order`.
    d: Vec<f64>,
    wide_prime: f64,
    wide: f64,
    narrow: f64,
    phi: f64,
    phi_tilde: f64,
    psi: f64,
}

fn check(id: u8, name: &str, bound: &str, worst_margin: f64, tol: f64) -> PropertyCheck {
    PropertyCheck {
        id,
        name: name.into(),
        bound: bound.into(),
        worst_margin,
        pass: worst_margin >= -tol,
        fitted_constants: None,
        informational: false,
    }
}

fn min_over(rows: &[Row], f: impl Fn(&Row) -> Option<f64>) -> f64 {
    rows.iter().filter_map(f).fold(f64::INFINITY, f64::min)
}

/// `1.05 · max |num|/den` over rows with `den > 0`, and the worst margin over
/// rows where `den = 0` (there `num` must vanish too).
fn fit(rows: &[Row], num: impl Fn(&Row) -> f64, den: impl Fn(&Row) -> f64) -> (f64, f64) {
    let mut ratio: f64 = 0.0;
    let mut margin = f64::INFINITY;
    for r in rows {
        let (n, d) = (num(r).abs(), den(r));
        if d > 0.0 {
            ratio = ratio.max(n / d);
        } else {
            margin = margin.min(-n);
        }
    }
    (FIT_FACTOR * ratio, if margin.is_finite() { margin } else { 0.0 })
}

pub(super) fn verify(family: &CutoffFamily, samples: usize) -> Result<PropertyReport> {
    if samples < 2 {
        return Err(invalid("samples", "need at least two sample points"));
    }
    let (eps, b) = (family.eps(), family.b());
    let max_order = family.max_order();
    let wide = Ramp::unchecked(eps / 3.0, b + eps, 0.0);
    let narrow = Ramp::new(eps / 5.0, eps)?;
    let (lo, hi) = (-b, 2.0 * b);

    let rows: Vec<Row> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            let d = (0..=max_order).map(|j| family.chi.derivative(x, j)).collect();
            Row {
                x,
                d,
                wide_prime: wide.derivative(x, 1),
                wide: wide.value(x),
                narrow: narrow.value(x),
                phi: family.phi(x),
                phi_tilde: family.phi_tilde(x),
                psi: family.psi(x),
            }
        })
        .collect();

    let mut checks = Vec::new();

    checks.push(check(
        1,
        "monotonicity",
        "chi' >= 0",
        min_over(&rows, |r| Some(r.d[1])),
        0.0,
    ));

    let m2 = min_over(&rows, |r| {
        let range = r.d[0].min(1.0 - r.d[0]);
        let edge = if r.x <= eps {
            -r.d[0].abs()
        } else if r.x >= b {
            -(r.d[0] - 1.0).abs()
        } else {
            0.0
        };
        Some(range.min(edge))
    });
    checks.push(check(
        2,
        "boundary values",
        "0 <= chi <= 1, chi = 0 for x <= eps, chi = 1 for x >= b",
        m2,
        EXACT_TOL,
    ));

    checks.push(check(
        3,
        "support of chi",
        "chi = 0 for x < eps",
        min_over(&rows, |r| (r.x < eps).then(|| -r.d[0].abs())),
        EXACT_TOL,
    ));

    let floor = 1.0 / (10.0 * (b - eps));
    checks.push(check(
        4,
        "lower bound on chi'",
        "chi' >= 1/(10(b - eps)) on [2 eps, b - 2 eps]",
        min_over(&rows, |r| {
            (r.x >= 2.0 * eps && r.x <= b - 2.0 * eps).then(|| r.d[1] - floor)
        }),
        0.0,
    ));

    checks.push(check(
        5,
        "support of chi'",
        "chi' = 0 outside [eps, b]",
        min_over(&rows, |r| (r.x < eps || r.x > b).then(|| -r.d[1].abs())),
        EXACT_TOL,
    ));

    let mut constants = Vec::new();
    let mut m6 = f64::INFINITY;
    for j in 1..=max_order as usize {
        let (c, m) = fit(&rows, |r| r.d[j], |r| r.wide_prime);
        constants.push(c);
        m6 = m6.min(m);
    }
    let mut p6 = check(
        6,
        "derivative domination",
        "|chi^(j)| <= c_j chi'_{eps/3, b+eps}, c_j fitted",
        m6,
        BOUND_TOL,
    );
    p6.pass &= constants.iter().all(|c| c.is_finite());
    p6.fitted_constants = Some(constants);
    checks.push(p6);

    let half = 0.5 * eps / (b - 3.0 * eps);
    checks.push(check(
        7,
        "lower bound on chi",
        "chi >= eps/(2(b - 3 eps)) on (3 eps, inf)",
        min_over(&rows, |r| (r.x > 3.0 * eps).then(|| r.d[0] - half)),
        0.0,
    ));

    let cap = eps / (b - 3.0 * eps);
    checks.push(check(
        8,
        "upper bound on widened chi'",
        "chi'_{eps/3, b+eps} <= eps/(b - 3 eps)",
        min_over(&rows, |r| Some(cap - r.wide_prime)),
        BOUND_TOL,
    ));

    let (c1, m1) = fit(&rows, |r| r.d[1], |r| r.wide_prime * r.wide);
    let (c2, m2) = fit(&rows, |r| r.d[1], |r| r.narrow);
    let mut p9 = check(
        9,
        "product bounds",
        "chi' <= c1 chi'_{eps/3,b+eps} chi_{eps/3,b+eps}, chi' <= c2 chi_{eps/5,eps}",
        m1.min(m2),
        BOUND_TOL,
    );
    p9.pass &= c1.is_finite() && c2.is_finite();
    p9.fitted_constants = Some(vec![c1, c2]);
    checks.push(p9);

    let chi_prime_max = rows.iter().map(|r| r.d[1]).fold(0.0, f64::max);
    checks.push(check(
        10,
        "eta",
        "eta^2 = chi chi' >= 0 and eta^2 <= chi max(chi')",
        min_over(&rows, |r| {
            let e2 = family.eta_squared(r.x);
            Some(e2.min(r.d[0] * chi_prime_max - e2))
        }),
        BOUND_TOL,
    ));

    checks.push(check(
        11,
        "support of phi and phi~",
        "phi = phi~ = 0 outside [eps/4, b]",
        min_over(&rows, |r| {
            (r.x < eps / 4.0 || r.x > b).then(|| -r.phi.abs().max(r.phi_tilde.abs()))
        }),
        EXACT_TOL,
    ));

    checks.push(check(
        12,
        "plateau of phi and phi~",
        "phi = phi~ = 1 on [eps/2, eps]",
        min_over(&rows, |r| {
            (r.x >= eps / 2.0 && r.x <= eps).then(|| -(r.phi - 1.0).abs().max((r.phi_tilde - 1.0).abs()))
        }),
        EXACT_TOL,
    ));

    checks.push(check(
        13,
        "support of psi",
        "psi = 0 for x > eps/2",
        min_over(&rows, |r| (r.x > eps / 2.0).then(|| -r.psi.abs())),
        EXACT_TOL,
    ));

    let residual = rows
        .iter()
        .map(|r| {
            let a = (r.d[0] + r.phi + r.psi - 1.0).abs();
            let s = (r.d[0].powi(2) + r.phi_tilde.powi(2) + r.psi - 1.0).abs();
            a.max(s)
        })
        .fold(0.0, f64::max);
    checks.push(check(
        14,
        "partitions of unity",
        "chi + phi + psi = 1 and chi^2 + phi~^2 + psi = 1",
        -residual,
        PARTITION_TOL,
    ));

    let squared = rows
        .iter()
        .map(|r| (r.d[0].powi(2) + r.phi_tilde.powi(2) + r.psi.powi(2) - 1.0).abs())
        .fold(0.0, f64::max);
    let mut variant = check(
        14,
        "partition with psi squared",
        "chi^2 + phi~^2 + psi^2 = 1",
        -squared,
        PARTITION_TOL,
    );
    variant.informational = true;
    checks.push(variant);

    let all_pass = checks.iter().all(|c| c.pass || c.informational);
    Ok(PropertyReport {
        eps,
        b,
        samples,
        interval: [lo, hi],
        checks,
        max_partition_residual: residual,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_passes_for_reference_family() {
        let f = CutoffFamily::new(1.0, 5.0).unwrap();
        let report = f.verify_properties(10_000).unwrap();
        assert!(report.all_pass, "{:#?}", report.failures());
        assert_eq!(report.checks.iter().filter(|c| !c.informational).count(), 14);
        assert!(report.max_partition_residual <= 1e-10);
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["checks"][0]["id"], 1);
    }

    #[test]
    fn fitted_c2_stable_under_refinement() {
        let f = CutoffFamily::new(1.0, 5.0).unwrap();
        let c2 = |n| {
            f.verify_properties(n)
                .unwrap()
                .check(6)
                .unwrap()
                .fitted_constants
                .clone()
                .unwrap()[1]
        };
        let (coarse, fine) = (c2(5_000), c2(20_000));
        assert!(coarse.is_finite() && fine.is_finite());
        assert!((coarse - fine).abs() / fine < 0.02, "{coarse} vs {fine}");
    }

    #[test]
    fn chi_lower_bound_example() {
        let f = CutoffFamily::new(1.0, 5.0).unwrap();
        assert!(f.chi(3.5) >= 0.25);
    }

    #[test]
    fn psi_squared_variant_is_reported_not_gated() {
        let f = CutoffFamily::new(1.0, 5.0).unwrap();
        let r = f.verify_properties(2_000).unwrap();
        let v = r.checks.iter().find(|c| c.informational).unwrap();
        assert_eq!(v.id, 14);
        // ψ takes values strictly inside (0, 1) on (ε/4, ε/2), so ψ ≠ ψ² there.
        assert!(!v.pass);
        assert!(r.all_pass);
    }
}
