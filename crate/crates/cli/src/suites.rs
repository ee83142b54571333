//! One function per subcommand. Each writes its artifacts under `out`, and
//! returns a serializable report whose `pass` decides the exit status.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dgbo_core::commutators::{
    bound_check_rn, identity_refinement, BoundReport, CommutatorExpansion, Localizer, RefinementReport,
};
use dgbo_core::cutoffs::{CutoffFamily, PropertyReport};
use dgbo_core::diagnostics::{
    kernel_samples, lattice_sum, oscillatory_kernel_check, DiagnosticsRecord, DiagnosticsSummary, LatticeSum,
    Recorder,
};
use dgbo_core::io;
use dgbo_core::solver::{
    run as integrate, Conserved, Drift, DriftFlags, InitialData, Profile, RunSummary, SimConfig,
};
use dgbo_core::spectral::{sobolev_norm_sq, spatial_derivative, Field, Grid, Multiplier};
use dgbo_core::Error;
use serde::Serialize;

use crate::config::{
    BoundBlock, CutoffBlock, IdentityBlock, KernelBlock, PropagationBlock, RunBlock, SolitonBlock,
};
use crate::plots;

pub const REPORT_FILE: &str = "report.json";

fn write_report<T: Serialize>(out: &Path, report: &T) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    io::write_json(&out.join(REPORT_FILE), report)?;
    Ok(())
}

// ---------------------------------------------------------------- run

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub steps: u64,
    pub initial: Conserved,
    pub drift: Drift,
    pub drift_flags: DriftFlags,
    pub diagnostics: Option<DiagnosticsSummary>,
}

/// A simulation plus its diagnostics, persisted as a run directory.
pub struct RunOutput {
    pub summary: RunSummary,
    pub record: Option<DiagnosticsRecord>,
}

/// Integrates `sim`, writing config, snapshots, series and diagnostics to
/// `dir`. On a blow-up the partial diagnostics are still written, and the
/// error names the abort snapshot.
pub fn simulate(
    sim: &SimConfig,
    diagnostics: Option<&dgbo_core::diagnostics::DiagnosticsConfig>,
    dir: &Path,
    run_id: &str,
) -> Result<RunOutput> {
    sim.validate()?;
    io::create_run_dir(dir)?;
    io::write_config(dir, sim)?;
    let grid = sim.grid()?;
    let mut snaps = io::SnapshotWriter::new(dir)?;
    let mut recorder = diagnostics
        .map(|d| Recorder::new(run_id, d.clone(), &grid, sim.alpha, sim.nonlinearity))
        .transpose()?;
    let result = match recorder.as_mut() {
        Some(rec) => integrate(sim, &mut [&mut snaps, rec]),
        None => integrate(sim, &mut [&mut snaps]),
    };
    let record = recorder.map(Recorder::into_record);
    if let Some(r) = &record {
        io::write_table(&dir.join(io::DIAGNOSTICS_FILE), &r.columns, &r.rows)?;
    }
    let summary = match result {
        Ok(s) => s,
        Err(e @ Error::BlowUp { .. }) => {
            let snap = snaps
                .abort_snapshot()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "(none)".into());
            return Err(anyhow::Error::new(e).context(format!("last finite state saved to {snap}")));
        }
        Err(e) => return Err(e.into()),
    };
    io::write_series(dir, &summary.series)?;
    Ok(RunOutput { summary, record })
}

pub fn run(block: &RunBlock, seed: u64, out: &Path) -> Result<RunReport> {
    let output = simulate(&block.sim, block.diagnostics.as_ref(), out, "run")?;
    let report = RunReport {
        seed,
        steps: output.summary.steps,
        initial: output.summary.initial,
        drift: output.summary.drift,
        drift_flags: output.summary.flags,
        diagnostics: output.record.as_ref().map(DiagnosticsRecord::summary),
    };
    io::write_json(&out.join(io::SUMMARY_FILE), &report)?;
    plots::emit_plots(out)?;
    Ok(report)
}

// ---------------------------------------------------------------- cutoffs

#[derive(Clone, Debug, Serialize)]
pub struct CutoffSuiteReport {
    pub reports: Vec<PropertyReport>,
    pub partition_tolerance: f64,
    pub pass: bool,
}

pub fn verify_cutoffs(block: &CutoffBlock, out: &Path) -> Result<CutoffSuiteReport> {
    let reports = block
        .pairs
        .iter()
        .map(|&[eps, b]| CutoffFamily::new(eps, b)?.verify_properties(block.samples))
        .collect::<dgbo_core::Result<Vec<_>>>()?;
    let pass = reports
        .iter()
        .all(|r| r.all_pass && r.max_partition_residual <= block.partition_tolerance);
    let report = CutoffSuiteReport {
        reports,
        partition_tolerance: block.partition_tolerance,
        pass,
    };
    write_report(out, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- identity

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCase {
    pub alpha: f64,
    pub h2_norm_sq: f64,
    pub threshold: f64,
    pub refinement: RefinementReport,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentitySuiteReport {
    pub cases: Vec<IdentityCase>,
    pub pass: bool,
}

pub fn verify_identity(block: &IdentityBlock, out: &Path) -> Result<IdentitySuiteReport> {
    let family = CutoffFamily::new(block.eps, block.b)?;
    let profile = block.profile.clone();
    profile.validate()?;
    let grid = Grid::new(block.half_length, block.n)?;
    let h2 = sobolev_norm_sq(&Field::sample(&grid, |x| profile.eval(x))?, 2.0);
    let cases = block
        .alphas
        .iter()
        .map(|&alpha| -> Result<IdentityCase> {
            let refinement =
                identity_refinement(|x| profile.eval(x), &family, alpha, block.half_length, block.n)?;
            let threshold = block.relative_tolerance * h2;
            let pass = refinement.pass
                && refinement.coarse.residual <= threshold
                && refinement.fine.residual <= threshold;
            Ok(IdentityCase {
                alpha,
                h2_norm_sq: h2,
                threshold,
                refinement,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = cases.iter().all(|c| c.pass);
    let report = IdentitySuiteReport { cases, pass };
    write_report(out, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- commutator bound

#[derive(Clone, Debug, Serialize)]
pub struct BoundSuiteReport {
    pub bound: BoundReport,
    pub slack: f64,
    pub pass: bool,
}

pub fn verify_commutator_bound(block: &BoundBlock, seed: u64, out: &Path) -> Result<BoundSuiteReport> {
    let grid = Grid::new(block.half_length, block.grid_size)?;
    let family = CutoffFamily::new(block.eps, block.b)?;
    let h = Localizer::periodized_chi_squared(&family, &grid)?;
    let a = block.alpha + 2.0 + block.a_offset;
    let exp = CommutatorExpansion::new(a, block.n, h)?;
    let bound = bound_check_rn(&exp, block.sigma, block.trials, seed)?;
    let limit = 1.0 + block.slack;
    let pass = if bound.unit_constant_case {
        bound.max_ratio <= limit && bound.power_ratio <= limit
    } else {
        bound.pass
    };
    let report = BoundSuiteReport {
        bound,
        slack: block.slack,
        pass,
    };
    write_report(out, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- soliton

#[derive(Clone, Debug, Serialize)]
pub struct SolitonReport {
    pub c: f64,
    /// `‖u_num(T) - u0(· - cT)‖_{L²}`.
    pub translation_error: f64,
    pub tolerance: f64,
    pub richardson_dts: Vec<f64>,
    /// `‖u_{dt_i} - u_{dt_{i+1}}‖` at the final time.
    pub richardson_differences: Vec<f64>,
    pub richardson_orders: Vec<f64>,
    pub min_order: f64,
    /// Traveling-wave residual of the KdV profile at `t = 0`.
    pub kdv_residual: f64,
    pub residual_tolerance: f64,
    /// The same residual for the algebraic profile at `α = 0`; reported
    /// only, since its normalization depends on an unstated convention.
    pub bo_residual: f64,
    pub pass: bool,
}

fn kdv_config(block: &SolitonBlock, dt: f64, center: f64) -> SimConfig {
    let init = InitialData::from(Profile::KdvSoliton { c: block.c, center })
        .with_boundary_tolerance(block.boundary_tolerance);
    let mut cfg = SimConfig::new(1.0, block.t_final, init);
    cfg.half_length = block.half_length;
    cfg.n = block.n;
    cfg.dt = dt;
    cfg.stride = u64::MAX;
    cfg
}

/// `‖-c u' - (D^{α+1}∂u - u u')‖` for a profile moving at speed `c`.
fn traveling_residual(u: &Field, c: f64, alpha: f64) -> Result<f64> {
    let ux = spatial_derivative(u, 1);
    let disp = u.apply(&Multiplier::dispersion(u.grid(), alpha)?)?;
    let adv = u.mul(&ux)?;
    let r = ux.scale(-c).sub(&disp.sub(&adv)?)?;
    Ok(r.l2_norm())
}

pub fn soliton_test(block: &SolitonBlock, out: &Path) -> Result<SolitonReport> {
    let cfg = kdv_config(block, block.dt, 0.0);
    let grid = cfg.grid()?;
    let final_state = integrate(&cfg, &mut [])?.final_state;
    let exact = kdv_config(block, block.dt, block.c * block.t_final)
        .initial
        .sample(&grid)?;
    let translation_error = final_state.sub(&exact)?.l2_norm();

    let finals = block
        .richardson_dts
        .iter()
        .map(|&dt| Ok(integrate(&kdv_config(block, dt, 0.0), &mut [])?.final_state))
        .collect::<Result<Vec<_>>>()?;
    let differences = finals
        .windows(2)
        .map(|w| Ok(w[0].sub(&w[1])?.l2_norm()))
        .collect::<Result<Vec<f64>>>()?;
    let orders: Vec<f64> = differences
        .windows(2)
        .zip(block.richardson_dts.windows(2))
        .map(|(d, h)| (d[0] / d[1]).ln() / (h[0] / h[1]).ln())
        .collect();

    let rgrid = Grid::new(block.half_length, block.residual_n)?;
    let kdv = Field::sample(&rgrid, |x| {
        Profile::KdvSoliton {
            c: block.c,
            center: 0.0,
        }
        .eval(x)
    })?;
    let kdv_residual = traveling_residual(&kdv, block.c, 1.0)?;
    let bo = Field::sample(&rgrid, |x| {
        Profile::BoSoliton {
            c: block.c,
            center: 0.0,
        }
        .eval(x)
    })?;
    let bo_residual = traveling_residual(&bo, block.c, 0.0)?;

    let pass = translation_error <= block.tolerance
        && !orders.is_empty()
        && orders.iter().all(|&p| p >= block.min_order)
        && kdv_residual <= block.residual_tolerance;
    let report = SolitonReport {
        c: block.c,
        translation_error,
        tolerance: block.tolerance,
        richardson_dts: block.richardson_dts.clone(),
        richardson_differences: differences,
        richardson_orders: orders,
        min_order: block.min_order,
        kdv_residual,
        residual_tolerance: block.residual_tolerance,
        bo_residual,
        pass,
    };
    write_report(out, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- kernel

#[derive(Clone, Debug, Serialize)]
pub struct KernelAlpha {
    pub alpha: f64,
    pub fitted_constants: Vec<(u32, f64)>,
    pub constant_spread: f64,
    pub constants_stable: bool,
    pub lattice: Vec<LatticeSum>,
    /// max/min of `Σ H / 2^{k(α+1)/2}` over the lattice `k`s.
    pub lattice_spread: f64,
    /// The same spread for `Σ H / 2^{k(α+2)/2}`.
    pub lattice_spread_alt: f64,
    pub lattice_bounded: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelSuiteReport {
    pub seed: u64,
    pub samples: usize,
    pub cases: Vec<KernelAlpha>,
    pub reports: Vec<dgbo_core::diagnostics::KernelReport>,
    pub constants_stable: bool,
    pub lattice_bounded: bool,
    pub lattice_asserted: bool,
    pub pass: bool,
}

fn spread(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = values.fold(f64::INFINITY, f64::min);
    max / min
}

pub fn kernel_bound(block: &KernelBlock, seed: u64, out: &Path) -> Result<KernelSuiteReport> {
    let mut cases = Vec::new();
    let mut reports = Vec::new();
    for &alpha in &block.alphas {
        let mut fitted = Vec::new();
        for &k in &block.ks {
            let samples = kernel_samples(k, alpha, block.samples, seed);
            let r = oscillatory_kernel_check(k, alpha, &samples)?;
            fitted.push((k, r.fitted_constant));
            reports.push(r);
        }
        let lattice: Vec<LatticeSum> = block.lattice_ks.iter().map(|&k| lattice_sum(k, alpha)).collect();
        let constant_spread = spread(fitted.iter().map(|f| f.1));
        let lattice_spread = spread(lattice.iter().map(|l| l.ratio));
        cases.push(KernelAlpha {
            alpha,
            constants_stable: constant_spread <= block.stability_factor,
            fitted_constants: fitted,
            constant_spread,
            lattice_spread_alt: spread(lattice.iter().map(|l| l.ratio_alt)),
            lattice_bounded: lattice_spread <= block.lattice_factor,
            lattice_spread,
            lattice,
        });
    }
    let constants_stable = cases.iter().all(|c| c.constants_stable);
    let lattice_bounded = cases.iter().all(|c| c.lattice_bounded);
    let pass = constants_stable && (lattice_bounded || !block.assert_lattice);
    let report = KernelSuiteReport {
        seed,
        samples: block.samples,
        cases,
        reports,
        constants_stable,
        lattice_bounded,
        lattice_asserted: block.assert_lattice,
        pass,
    };
    write_report(out, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- propagation

#[derive(Clone, Debug, Serialize)]
pub struct OrientedRun {
    pub label: String,
    pub grid_size: usize,
    pub initial: f64,
    pub max: f64,
    /// `max / max(initial, 1)`.
    pub growth: f64,
    pub smoothing: f64,
    pub halfstep_smoothing: f64,
    pub decay_spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropagationReport {
    pub runs: Vec<OrientedRun>,
    pub growth_factor: f64,
    /// Right-regular data stays within the growth factor, reflected data
    /// exceeds it, at every resolution run.
    pub dichotomy: bool,
    pub smoothing_change: Option<f64>,
    pub halfstep_smoothing_change: Option<f64>,
    pub smoothing_converged: bool,
    pub decay_spread: f64,
    pub decay_bounded: bool,
    pub pass: bool,
}

fn orientation_summary(
    label: &str,
    n: usize,
    record: &DiagnosticsRecord,
    block: &PropagationBlock,
) -> Result<OrientedRun> {
    let col = |name: String| {
        record
            .column(&name)
            .with_context(|| format!("diagnostics lack column {name}"))
    };
    let w = col(format!("W_{}", block.energy_order))?;
    let initial = w[0];
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let times = record.times();
    let f = col(format!("F_{}", block.decay_order))?;
    let [lo, hi] = block.decay_window;
    let tf = times
        .iter()
        .zip(&f)
        .filter(|(t, _)| **t >= lo - 1e-12 && **t <= hi + 1e-12)
        .map(|(t, f)| t * f);
    Ok(OrientedRun {
        label: label.into(),
        grid_size: n,
        initial,
        max,
        growth: max / initial.max(1.0),
        smoothing: *col(format!("S_{}", block.smoothing_order))?
            .last()
            .unwrap_or(&f64::NAN),
        halfstep_smoothing: *col(format!("Sp_{}", block.smoothing_order))?
            .last()
            .unwrap_or(&f64::NAN),
        decay_spread: spread(tf),
    })
}

pub fn propagation_demo(block: &PropagationBlock, out: &Path) -> Result<PropagationReport> {
    let sizes: Vec<usize> = if block.refine {
        vec![block.sim.n, 2 * block.sim.n]
    } else {
        vec![block.sim.n]
    };
    let mut runs = Vec::new();
    let mut curves: Vec<(String, PathBuf)> = Vec::new();
    for (label, reflect) in [("original", false), ("reflected", true)] {
        for &n in &sizes {
            let mut sim = block.sim.clone();
            sim.n = n;
            let mut diag = block.diagnostics.clone();
            if reflect {
                sim.initial = sim.initial.reflected();
                diag.placement = diag.placement.mirrored();
            }
            let dir = out.join(label).join(format!("n{n}"));
            let id = format!("{label}-n{n}");
            let output = simulate(&sim, Some(&diag), &dir, &id)?;
            let record = output.record.expect("diagnostics configured");
            runs.push(orientation_summary(label, n, &record, block)?);
            if n == block.sim.n {
                curves.push((label.to_string(), dir));
            }
        }
    }
    let original: Vec<&OrientedRun> = runs.iter().filter(|r| r.label == "original").collect();
    let reflected: Vec<&OrientedRun> = runs.iter().filter(|r| r.label == "reflected").collect();
    let dichotomy = original.iter().all(|r| r.growth <= block.growth_factor)
        && reflected.iter().all(|r| r.growth > block.growth_factor);
    let change = |f: fn(&OrientedRun) -> f64| {
        (original.len() == 2).then(|| (f(original[1]) - f(original[0])).abs() / f(original[1]).abs())
    };
    let smoothing_change = change(|r| r.smoothing);
    let halfstep_smoothing_change = change(|r| r.halfstep_smoothing);
    // Without the refined run there is nothing to compare; the check is
    // then skipped rather than failed.
    let smoothing_converged = !block.refine
        || [smoothing_change, halfstep_smoothing_change]
            .iter()
            .all(|c| c.is_some_and(|c| c <= block.convergence_tolerance));
    let decay_spread = original[0].decay_spread;
    let decay_bounded = decay_spread <= block.decay_ratio;

    plots::propagation_plot(
        &curves,
        &format!("W_{}", block.energy_order),
        &out.join("w_comparison.svg"),
    )?;
    let report = PropagationReport {
        growth_factor: block.growth_factor,
        dichotomy,
        smoothing_change,
        halfstep_smoothing_change,
        smoothing_converged,
        decay_spread,
        decay_bounded,
        pass: dichotomy && smoothing_converged && decay_bounded,
        runs,
    };
    write_report(out, &report)?;
    Ok(report)
}
