use serde::{Deserialize, Serialize};

use super::initial::InitialData;
use crate::error::{invalid, Result};
use crate::spectral::{check_alpha, Grid};

pub const SCHEMA_VERSION: u32 = 1;

/// The nonlinear term `coefficient · u^power ∂_x u`.
///
/// `power = 1, coefficient = 1` is the equation proper; a negative
/// coefficient gives the defocusing variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nonlinearity {
    pub power: u32,
    pub coefficient: f64,
}

impl Default for Nonlinearity {
    fn default() -> Self {
        Self {
            power: 1,
            coefficient: 1.0,
        }
    }
}

impl Nonlinearity {
    pub fn linear() -> Self {
        Self {
            power: 1,
            coefficient: 0.0,
        }
    }
}

/// A damping layer `∂_t u = -σ(x) u` near both box edges, applied as the
/// factor `exp(-σ |dt|)` after each step.
///
/// `σ` rises smoothly from 0 at `|x| = L - width` to `strength` at `|x| = L`.
/// Dispersive radiation travels to the edge and would otherwise re-enter on
/// the opposite side of the periodic box; the layer removes it while
/// leaving the interior untouched.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsorbingLayer {
    pub width: f64,
    pub strength: f64,
}

impl AbsorbingLayer {
    pub fn rate(&self, x: f64, half_length: f64) -> f64 {
        let z = ((x.abs() - (half_length - self.width)) / self.width).clamp(0.0, 1.0);
        self.strength * z * z * (3.0 - 2.0 * z)
    }
}

impl Default for AbsorbingLayer {
    fn default() -> Self {
        Self {
            width: 8.0,
            strength: 2000.0,
        }
    }
}

/// Drift thresholds. Exceeding them is reported, not fatal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftTolerances {
    /// `|M(t) - M(0)| / M(0)`.
    pub mass: f64,
    /// `|I(t) - I(0)| / max(‖u0‖_{L¹}, 1)`.
    pub integral: f64,
    /// `|H(t) - H(0)| / |H(0)|`.
    pub energy: f64,
}

impl Default for DriftTolerances {
    fn default() -> Self {
        Self {
            mass: 1e-8,
            integral: 1e-10,
            energy: 1e-6,
        }
    }
}

fn schema() -> u32 {
    SCHEMA_VERSION
}
fn default_stride() -> u64 {
    10
}
fn yes() -> bool {
    true
}
fn default_safety() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "schema")]
    pub schema: u32,
    pub alpha: f64,
    /// Half-width `L` of the periodic box `[-L, L)`.
    pub half_length: f64,
    /// Number of grid points, a power of two.
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub initial: InitialData,
    /// Snapshot and diagnostics interval, in steps.
    #[serde(default = "default_stride")]
    pub stride: u64,
    #[serde(default = "yes")]
    pub dealias: bool,
    /// Advective CFL safety factor: `dt <= safety · dx / max(1, max|u|)`.
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorbing: Option<AbsorbingLayer>,
    #[serde(default)]
    pub tolerances: DriftTolerances,
}

impl SimConfig {
    /// Desk-scale defaults: `L = 30`, `N = 1024`, `dt = 1e-3`.
    pub fn new(alpha: f64, t_final: f64, initial: impl Into<InitialData>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            alpha,
            half_length: 30.0,
            n: 1024,
            dt: 1e-3,
            t_final,
            initial: initial.into(),
            stride: default_stride(),
            dealias: true,
            cfl_safety: default_safety(),
            nonlinearity: Nonlinearity::default(),
            absorbing: None,
            tolerances: DriftTolerances::default(),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.half_length, self.n)
    }

    /// Number of steps to reach `t_final`; `t_final` must be a whole number
    /// of steps (or zero).
    pub fn steps(&self) -> Result<u64> {
        let ratio = self.t_final / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(invalid(
                "t_final",
                format!("{} is not a whole number of steps of {}", self.t_final, self.dt),
            ));
        }
        Ok(steps as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(invalid(
                "schema",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema),
            ));
        }
        check_alpha(self.alpha)?;
        self.grid()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_final == 0.0 || self.t_final >= self.dt) {
            return Err(invalid(
                "t_final",
                format!("must be 0 or at least dt, got {}", self.t_final),
            ));
        }
        self.steps()?;
        if self.stride == 0 {
            return Err(invalid("stride", "must be at least 1"));
        }
        if !(self.cfl_safety > 0.0) {
            return Err(invalid("cfl_safety", "must be positive"));
        }
        if self.nonlinearity.power == 0 {
            return Err(invalid("nonlinearity.power", "must be at least 1"));
        }
        if let Some(layer) = self.absorbing {
            if !(layer.width > 0.0 && layer.width < self.half_length && layer.strength >= 0.0) {
                return Err(invalid(
                    "absorbing",
                    format!("need 0 < width < L and strength >= 0, got {layer:?}"),
                ));
            }
        }
        self.initial.profile.validate()
    }

    /// `safety · dx / max(1, max|u|)`.
    pub fn cfl_limit(&self, max_abs_u: f64) -> f64 {
        let dx = 2.0 * self.half_length / self.n as f64;
        self.cfl_safety * dx / max_abs_u.max(1.0)
    }
}
