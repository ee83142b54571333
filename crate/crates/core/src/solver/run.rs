use serde::Serialize;

use super::config::SimConfig;
use super::conserved::{conserved, Conserved};
use super::stepper::Stepper;
use crate::error::{Error, Result};
use crate::spectral::Field;

/// One row of the scalar time series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesRow {
    pub step: u64,
    pub t: f64,
    pub integral: f64,
    pub mass: f64,
    pub energy: f64,
    pub max_abs_u: f64,
    pub boundary_magnitude: f64,
}

/// Largest relative drift of each conserved quantity over the run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Drift {
    pub integral: f64,
    pub mass: f64,
    pub energy: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct DriftFlags {
    pub integral: bool,
    pub mass: bool,
    pub energy: bool,
}

impl DriftFlags {
    pub fn any(&self) -> bool {
        self.integral || self.mass || self.energy
    }
}

/// Callback for scheduled snapshots: step 0, every `stride` steps, and the
/// final step.
pub trait Observer {
    fn observe(&mut self, step: u64, t: f64, u: &Field) -> Result<()>;

    /// Called with the last finite state before a run aborts.
    fn abort(&mut self, _step: u64, _t: f64, _last_good: &Field) -> Result<()> {
        Ok(())
    }
}

impl<F: FnMut(u64, f64, &Field) -> Result<()>> Observer for F {
    fn observe(&mut self, step: u64, t: f64, u: &Field) -> Result<()> {
        self(step, t, u)
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub steps: u64,
    pub series: Vec<SeriesRow>,
    pub initial: Conserved,
    pub drift: Drift,
    pub flags: DriftFlags,
    pub final_state: Field,
}

fn drift(now: Conserved, start: Conserved, l1: f64) -> Drift {
    let rel = |a: f64, b: f64| {
        if b == 0.0 {
            (a - b).abs()
        } else {
            ((a - b) / b).abs()
        }
    };
    Drift {
        integral: (now.integral - start.integral).abs() / l1.max(1.0),
        mass: rel(now.mass, start.mass),
        energy: rel(now.energy, start.energy),
    }
}

/// Integrates `cfg` from `t = 0` to `t_final`, calling every observer on the
/// snapshot schedule.
///
/// The advective CFL condition is checked before every step with the current
/// `max|u|`; a non-finite state aborts the run with the offending step.
pub fn run(cfg: &SimConfig, observers: &mut [&mut dyn Observer]) -> Result<RunSummary> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let u0 = cfg.initial.sample(&grid)?;
    let mut stepper = Stepper::new(
        &u0,
        cfg.alpha,
        cfg.dt,
        cfg.dealias,
        cfg.nonlinearity,
        cfg.absorbing,
    )?;
    let steps = cfg.steps()?;
    let start = conserved(&u0, cfg.alpha, cfg.nonlinearity)?;
    let l1 = grid.integrate(&u0.samples().iter().map(|v| v.abs()).collect::<Vec<_>>());

    let mut series = Vec::new();
    let mut worst = Drift::default();
    let mut u = u0;
    let mut record = |step: u64, u: &Field, observers: &mut [&mut dyn Observer]| -> Result<()> {
        let t = step as f64 * cfg.dt;
        let c = conserved(u, cfg.alpha, cfg.nonlinearity)?;
        let d = drift(c, start, l1);
        worst.integral = worst.integral.max(d.integral);
        worst.mass = worst.mass.max(d.mass);
        worst.energy = worst.energy.max(d.energy);
        series.push(SeriesRow {
            step,
            t,
            integral: c.integral,
            mass: c.mass,
            energy: c.energy,
            max_abs_u: u.max_abs(),
            boundary_magnitude: u.boundary_magnitude(),
        });
        for o in observers.iter_mut() {
            o.observe(step, t, u)?;
        }
        Ok(())
    };
    record(0, &u, observers)?;

    for step in 1..=steps {
        let limit = cfg.cfl_limit(u.max_abs());
        if cfg.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl {
                step,
                dt: cfg.dt,
                limit,
            });
        }
        stepper.step();
        let t = step as f64 * cfg.dt;
        match stepper.checked_field(step, t) {
            Ok(next) => u = next,
            Err(e) => {
                for o in observers.iter_mut() {
                    o.abort(step - 1, t - cfg.dt, &u)?;
                }
                return Err(e);
            }
        }
        if step % cfg.stride == 0 || step == steps {
            record(step, &u, observers)?;
        }
    }

    let tol = cfg.tolerances;
    let flags = DriftFlags {
        integral: worst.integral > tol.integral,
        mass: worst.mass > tol.mass,
        energy: worst.energy > tol.energy,
    };
    Ok(RunSummary {
        steps,
        series,
        initial: start,
        drift: worst,
        flags,
        final_state: u,
    })
}
