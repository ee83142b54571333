use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::functionals::{
    decay_weight, indicator, local_sobolev_with, smoothing_multiplier, weighted, weighted_channel,
    KatoWindow, Trapezoid, LOCAL_SOBOLEV_B, LOCAL_SOBOLEV_EPS,
};
use crate::cutoffs::{CutoffFamily, Member, Placement};
use crate::error::{invalid, Error, Result};
use crate::solver::{conserved, Nonlinearity, Observer};
use crate::spectral::{Field, Grid, Multiplier};

/// Readings below this are treated as a broken nonnegativity invariant.
const NEGATIVE_TOL: f64 = -1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KatoSpec {
    pub radius: f64,
    pub r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalSobolevSpec {
    pub x0: f64,
    pub s: f64,
    #[serde(default = "local_eps")]
    pub eps: f64,
    #[serde(default = "local_b")]
    pub b: f64,
}

fn local_eps() -> f64 {
    LOCAL_SOBOLEV_EPS
}
fn local_b() -> f64 {
    LOCAL_SOBOLEV_B
}

/// What to measure at each scheduled time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub eps: f64,
    pub b: f64,
    pub placement: Placement,
    /// `j` values for `W_j` and its sharp-interval companion.
    pub energy_orders: Vec<u32>,
    /// `j` values for the smoothing integrals `S_j`, `S_j^ℋ`.
    pub smoothing_orders: Vec<u32>,
    /// `m` values for `W'_m`, `S'_m`, `S'^ℋ_m`.
    pub halfstep_orders: Vec<u32>,
    /// `j` values for `F_j`.
    pub decay_orders: Vec<u32>,
    pub delta: f64,
    pub kato: Option<KatoSpec>,
    pub local_sobolev: Option<LocalSobolevSpec>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            eps: 1.0,
            b: 5.0,
            placement: Placement::moving(1.0),
            energy_orders: vec![0, 1, 2, 3],
            smoothing_orders: vec![1, 2],
            halfstep_orders: vec![2],
            decay_orders: vec![2],
            delta: 1.0,
            kato: None,
            local_sobolev: None,
        }
    }
}

impl DiagnosticsConfig {
    pub fn validate(&self) -> Result<()> {
        CutoffFamily::new(self.eps, self.b)?;
        if !(self.placement.v >= 0.0) {
            return Err(invalid(
                "v",
                format!("must be nonnegative, got {}", self.placement.v),
            ));
        }
        if !(self.delta >= 0.0) {
            return Err(invalid(
                "delta",
                format!("must be nonnegative, got {}", self.delta),
            ));
        }
        Ok(())
    }

    /// Column names in the order they appear in each row.
    pub fn columns(&self) -> Vec<String> {
        let mut c: Vec<String> = ["step", "t", "I", "M", "H"].map(String::from).to_vec();
        for j in &self.energy_orders {
            c.push(format!("W_{j}"));
            c.push(format!("W_{j}_sharp"));
        }
        for j in &self.smoothing_orders {
            c.extend([
                format!("s_{j}"),
                format!("sH_{j}"),
                format!("S_{j}"),
                format!("SH_{j}"),
            ]);
        }
        for m in &self.halfstep_orders {
            c.extend([
                format!("Wp_{m}"),
                format!("sp_{m}"),
                format!("spH_{m}"),
                format!("Sp_{m}"),
                format!("SpH_{m}"),
            ]);
        }
        for j in &self.decay_orders {
            c.push(format!("F_{j}"));
        }
        if self.kato.is_some() {
            c.extend(["kato_density", "kato_density_sharp", "K", "K_sharp"].map(String::from));
        }
        if self.local_sobolev.is_some() {
            c.push("local_sobolev".into());
        }
        c
    }
}

/// Per-time values of every configured functional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub run_id: String,
    pub alpha: f64,
    pub config: DiagnosticsConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DiagnosticsRecord {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn times(&self) -> Vec<f64> {
        self.column("t").unwrap_or_default()
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.column(name)?.last().copied()
    }

    pub fn max(&self, name: &str) -> Option<f64> {
        self.column(name)?.into_iter().reduce(f64::max)
    }

    /// Final accumulated integrals and the invariant checks.
    pub fn summary(&self) -> DiagnosticsSummary {
        let accumulated: BTreeMap<String, f64> = self
            .columns
            .iter()
            .filter(|c| is_accumulated(c))
            .filter_map(|c| Some((c.clone(), self.last(c)?)))
            .collect();
        let maxima: BTreeMap<String, f64> = self
            .columns
            .iter()
            .filter(|c| c.starts_with("W") || c.starts_with("F_"))
            .filter_map(|c| Some((c.clone(), self.max(c)?)))
            .collect();
        let monotone = self.columns.iter().filter(|c| is_accumulated(c)).all(|c| {
            self.column(c)
                .unwrap_or_default()
                .windows(2)
                .all(|w| w[1] >= w[0])
        });
        let finite = self.rows.iter().flatten().all(|v| v.is_finite());
        DiagnosticsSummary {
            run_id: self.run_id.clone(),
            alpha: self.alpha,
            config: self.config.clone(),
            samples: self.rows.len(),
            accumulated,
            maxima,
            monotone,
            finite,
        }
    }
}

fn is_accumulated(name: &str) -> bool {
    ["S_", "SH_", "Sp_", "SpH_"].iter().any(|p| name.starts_with(p)) || name.starts_with('K')
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub run_id: String,
    pub alpha: f64,
    pub config: DiagnosticsConfig,
    pub samples: usize,
    pub accumulated: BTreeMap<String, f64>,
    pub maxima: BTreeMap<String, f64>,
    /// Every accumulated integral is nondecreasing in time.
    pub monotone: bool,
    pub finite: bool,
}

/// A run observer that evaluates the configured functionals on every
/// snapshot and accumulates the time integrals by the trapezoid rule.
pub struct Recorder {
    record: DiagnosticsRecord,
    family: CutoffFamily,
    alpha: f64,
    nonlinearity: Nonlinearity,
    kato: Option<KatoWindow>,
    decay_weights: Vec<Field>,
    accumulators: Vec<Trapezoid>,
}

impl Recorder {
    pub fn new(
        run_id: impl Into<String>,
        cfg: DiagnosticsConfig,
        grid: &Grid,
        alpha: f64,
        nonlinearity: Nonlinearity,
    ) -> Result<Self> {
        cfg.validate()?;
        let family = CutoffFamily::new(cfg.eps, cfg.b)?;
        let kato = cfg
            .kato
            .map(|k| KatoWindow::new(grid, k.radius, k.r, alpha, cfg.placement.margin))
            .transpose()?;
        let decay_weights = cfg
            .decay_orders
            .iter()
            .map(|&j| decay_weight(grid, j, cfg.delta))
            .collect::<Result<_>>()?;
        let n_acc = 2 * cfg.smoothing_orders.len()
            + 2 * cfg.halfstep_orders.len()
            + if cfg.kato.is_some() { 2 } else { 0 };
        Ok(Self {
            record: DiagnosticsRecord {
                run_id: run_id.into(),
                alpha,
                columns: cfg.columns(),
                config: cfg,
                rows: Vec::new(),
            },
            family,
            alpha,
            nonlinearity,
            kato,
            decay_weights,
            accumulators: vec![Trapezoid::default(); n_acc],
        })
    }

    pub fn record(&self) -> &DiagnosticsRecord {
        &self.record
    }

    pub fn into_record(self) -> DiagnosticsRecord {
        self.record
    }

    fn row(&mut self, step: u64, t: f64, u: &Field) -> Result<Vec<f64>> {
        let cfg = &self.record.config;
        let grid = u.grid();
        let p = &cfg.placement;
        let chi2 = self.family.placed_sample(grid, p, t, Member::ChiSquared)?;
        let eta2 = self.family.placed_sample(grid, p, t, Member::EtaSquared)?;
        let sharp = indicator(grid, &self.family, p, t)?;
        let c = conserved(u, self.alpha, self.nonlinearity)?;
        let mut row = vec![step as f64, t, c.integral, c.mass, c.energy];
        let mut acc = self.accumulators.iter_mut();
        let mut accumulate = |v: f64| acc.next().expect("accumulator per column").push(t, v);

        for &j in &cfg.energy_orders {
            let d = Multiplier::derivative(grid, j);
            row.push(weighted(u, &d, &chi2)?);
            row.push(weighted(u, &d, &sharp)?);
        }
        for &j in &cfg.smoothing_orders {
            let m = smoothing_multiplier(grid, 0.5 * (self.alpha + 1.0), j)?;
            let ch = weighted_channel(u, &m, &eta2)?;
            row.extend([ch.plain, ch.hilbert, accumulate(ch.plain), accumulate(ch.hilbert)]);
        }
        for &m in &cfg.halfstep_orders {
            let e = smoothing_multiplier(grid, 0.5 * (1.0 - self.alpha), m)?;
            let energy = weighted(u, &e, &chi2)?;
            let ch = weighted_channel(u, &Multiplier::derivative(grid, m + 1), &eta2)?;
            row.extend([
                energy,
                ch.plain,
                ch.hilbert,
                accumulate(ch.plain),
                accumulate(ch.hilbert),
            ]);
        }
        for (&j, w) in cfg.decay_orders.iter().zip(&self.decay_weights) {
            row.push(weighted(u, &Multiplier::derivative(grid, j), w)?);
        }
        if let Some(k) = &self.kato {
            let d = k.density(u)?;
            row.extend([d.smooth, d.sharp, accumulate(d.smooth), accumulate(d.sharp)]);
        }
        if let Some(ls) = cfg.local_sobolev {
            row.push(local_sobolev_with(u, ls.x0, ls.s, ls.eps, ls.b)?.value);
        }
        if let Some((i, v)) = row
            .iter()
            .enumerate()
            .skip(2)
            .find(|(i, v)| **v < NEGATIVE_TOL && !is_signed(*i))
        {
            return Err(Error::Construction(format!(
                "diagnostic `{}` is negative ({v:e}) at t = {t}",
                self.record.columns[i]
            )));
        }
        Ok(row)
    }
}

/// `I` and `H` may be negative; everything else is a weighted square.
fn is_signed(column: usize) -> bool {
    column == 2 || column == 4
}

impl Observer for Recorder {
    fn observe(&mut self, step: u64, t: f64, u: &Field) -> Result<()> {
        let row = self.row(step, t, u)?;
        self.record.rows.push(row);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{run, Profile, SimConfig};

    #[test]
    fn columns_match_rows() {
        let mut sim = SimConfig::new(
            0.5,
            0.05,
            Profile::Gaussian {
                amplitude: 1.0,
                center: 0.0,
                width: 1.0,
            },
        );
        sim.n = 256;
        sim.stride = 5;
        let cfg = DiagnosticsConfig {
            kato: Some(KatoSpec { radius: 5.0, r: 1.0 }),
            local_sobolev: Some(LocalSobolevSpec {
                x0: 0.0,
                s: 1.0,
                eps: 0.1,
                b: 0.5,
            }),
            ..Default::default()
        };
        let mut rec = Recorder::new("t", cfg, &sim.grid().unwrap(), sim.alpha, sim.nonlinearity).unwrap();
        run(&sim, &mut [&mut rec]).unwrap();
        let r = rec.into_record();
        assert_eq!(r.rows.len(), 11);
        assert!(r.rows.iter().all(|row| row.len() == r.columns.len()));
        let s = r.summary();
        assert!(s.monotone && s.finite);
        assert!(s.accumulated.contains_key("S_2") && s.accumulated.contains_key("K"));
        assert_eq!(r.last("t"), Some(0.05));
    }
}
