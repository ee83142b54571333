//! Experiment configuration: one JSON document with a block per subcommand.
//! Every field has a default, so a config file only lists what it changes.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use dgbo_core::diagnostics::DiagnosticsConfig;
use dgbo_core::solver::{AbsorbingLayer, InitialData, Profile, SimConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub seed: u64,
    pub run: RunBlock,
    pub verify_cutoffs: CutoffBlock,
    pub verify_identity: IdentityBlock,
    pub verify_commutator_bound: BoundBlock,
    pub soliton_test: SolitonBlock,
    pub kernel_bound: KernelBlock,
    pub propagation_demo: PropagationBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            seed: 42,
            run: RunBlock::default(),
            verify_cutoffs: CutoffBlock::default(),
            verify_identity: IdentityBlock::default(),
            verify_commutator_bound: BoundBlock::default(),
            soliton_test: SolitonBlock::default(),
            kernel_bound: KernelBlock::default(),
            propagation_demo: PropagationBlock::default(),
        }
    }
}

fn gaussian() -> Profile {
    Profile::Gaussian {
        amplitude: 1.0,
        center: 0.0,
        width: 1.0,
    }
}

/// `one_sided(2, 0, 2.4, 1)`: the third derivative fails to be square
/// integrable only at the corner `x = 0`.
pub fn one_sided() -> Profile {
    Profile::OneSided {
        m: 2,
        x0: 0.0,
        gamma: 2.4,
        amplitude: 1.0,
        center: None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunBlock {
    pub sim: SimConfig,
    pub diagnostics: Option<DiagnosticsConfig>,
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            sim: SimConfig::new(0.5, 1.0, gaussian()),
            diagnostics: Some(DiagnosticsConfig::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutoffBlock {
    /// `(ε, b)` pairs.
    pub pairs: Vec<[f64; 2]>,
    pub samples: usize,
    pub partition_tolerance: f64,
}

impl Default for CutoffBlock {
    fn default() -> Self {
        Self {
            pairs: vec![[1.0, 5.0], [0.5, 3.0], [2.0, 10.0]],
            samples: 10_000,
            partition_tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityBlock {
    pub alphas: Vec<f64>,
    pub profile: Profile,
    pub eps: f64,
    pub b: f64,
    pub half_length: f64,
    /// Coarse grid; the refinement uses twice as many points.
    pub n: usize,
    /// Residual threshold relative to `‖f‖²_{H²}`.
    pub relative_tolerance: f64,
}

impl Default for IdentityBlock {
    fn default() -> Self {
        Self {
            alphas: vec![0.25, 0.5, 0.75, 1.0],
            profile: Profile::Gaussian {
                amplitude: 1.0,
                center: 2.0,
                width: 1.5,
            },
            eps: 1.0,
            b: 5.0,
            half_length: 30.0,
            n: 1024,
            relative_tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundBlock {
    pub alpha: f64,
    /// `a - (α + 2)`; zero gives `a = α + 2`.
    pub a_offset: f64,
    pub n: usize,
    pub sigma: f64,
    pub eps: f64,
    pub b: f64,
    pub half_length: f64,
    pub grid_size: usize,
    pub trials: usize,
    pub slack: f64,
}

impl Default for BoundBlock {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            a_offset: 0.0,
            n: 0,
            sigma: 0.0,
            eps: 1.0,
            b: 5.0,
            half_length: 30.0,
            grid_size: 1024,
            trials: 100,
            slack: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolitonBlock {
    pub c: f64,
    pub half_length: f64,
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub tolerance: f64,
    /// Steps for the order estimate, each half the previous; every one must
    /// divide `t_final`.
    pub richardson_dts: Vec<f64>,
    pub min_order: f64,
    /// Grid for the `t = 0` residual check.
    pub residual_n: usize,
    pub residual_tolerance: f64,
    /// The sech² tail at `L = 30` is about `7e-12`.
    pub boundary_tolerance: f64,
}

impl Default for SolitonBlock {
    fn default() -> Self {
        Self {
            c: 1.0,
            half_length: 30.0,
            n: 512,
            dt: 1e-3,
            t_final: 1.0,
            tolerance: 1e-4,
            richardson_dts: vec![0.0125, 0.00625, 0.003125, 0.0015625],
            min_order: 3.7,
            residual_n: 1024,
            residual_tolerance: 1e-6,
            boundary_tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelBlock {
    pub alphas: Vec<f64>,
    pub ks: Vec<u32>,
    pub samples: usize,
    /// Allowed max/min spread of the fitted constant across `ks`.
    pub stability_factor: f64,
    pub lattice_ks: Vec<u32>,
    /// Allowed max/min spread of the normalized lattice sum.
    pub lattice_factor: f64,
    /// Whether the lattice-sum check counts toward the exit status.
    pub assert_lattice: bool,
}

impl Default for KernelBlock {
    fn default() -> Self {
        Self {
            alphas: vec![0.25, 0.75],
            ks: vec![3, 4, 5],
            samples: 50,
            stability_factor: 2.0,
            lattice_ks: vec![3, 4, 5, 6],
            lattice_factor: 2.0,
            assert_lattice: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationBlock {
    pub sim: SimConfig,
    pub diagnostics: DiagnosticsConfig,
    /// Also run at twice the resolution for the convergence checks.
    pub refine: bool,
    pub growth_factor: f64,
    pub energy_order: u32,
    pub smoothing_order: u32,
    pub convergence_tolerance: f64,
    pub decay_order: u32,
    pub decay_window: [f64; 2],
    pub decay_ratio: f64,
}

impl Default for PropagationBlock {
    fn default() -> Self {
        let mut sim = SimConfig::new(0.5, 1.0, InitialData::from(one_sided()));
        sim.absorbing = Some(AbsorbingLayer::default());
        Self {
            sim,
            diagnostics: DiagnosticsConfig::default(),
            refine: true,
            growth_factor: 10.0,
            energy_order: 3,
            smoothing_order: 2,
            convergence_tolerance: 0.05,
            decay_order: 2,
            decay_window: [0.1, 1.0],
            decay_ratio: 10.0,
        }
    }
}

impl ExperimentConfig {
    /// Defaults, then the file (if any), then `key.path=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let base = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read config {}", p.display()))?;
                serde_json::from_str::<Self>(&text)
                    .map_err(|e| anyhow!("{}:{}:{}: {e}", p.display(), e.line(), e.column()))?
            }
            None => Self::default(),
        };
        let cfg = apply_overrides(base, overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            bail!(
                "schema: unsupported version {}, expected {SCHEMA_VERSION}",
                self.schema
            );
        }
        let check_pair = |what: &str, eps: f64, b: f64| -> Result<()> {
            if !(eps > 0.0 && b >= 5.0 * eps) {
                bail!("{what}: need eps > 0 and b >= 5 eps, got ({eps}, {b})");
            }
            Ok(())
        };
        for [eps, b] in &self.verify_cutoffs.pairs {
            check_pair("verify_cutoffs.pairs", *eps, *b)?;
        }
        check_pair(
            "verify_identity",
            self.verify_identity.eps,
            self.verify_identity.b,
        )?;
        check_pair(
            "verify_commutator_bound",
            self.verify_commutator_bound.eps,
            self.verify_commutator_bound.b,
        )?;
        for (what, d) in [
            ("run.diagnostics", self.run.diagnostics.as_ref()),
            (
                "propagation_demo.diagnostics",
                Some(&self.propagation_demo.diagnostics),
            ),
        ] {
            if let Some(d) = d {
                d.validate().with_context(|| what.to_string())?;
            }
        }
        self.run.sim.validate().context("run.sim")?;
        self.propagation_demo
            .sim
            .validate()
            .context("propagation_demo.sim")?;
        Ok(())
    }
}

/// Each override is `a.b.c=value`; `value` is read as JSON when it parses
/// and as a string otherwise. Only existing keys can be set, except inside
/// maps that are currently `null` (optional blocks).
pub fn apply_overrides(cfg: ExperimentConfig, overrides: &[String]) -> Result<ExperimentConfig> {
    if overrides.is_empty() {
        return Ok(cfg);
    }
    let mut root = serde_json::to_value(&cfg)?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("override `{item}`: expected key=value"))?;
        let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(&mut root, key, value).with_context(|| format!("override `{item}`"))?;
    }
    serde_json::from_value(root).context("overrides produce an invalid config")
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.get_mut(*part)
                    .ok_or_else(|| anyhow!("unknown key `{}`", parts[..=i].join(".")))?
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| anyhow!("`{part}` is not an array index"))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| anyhow!("index {idx} out of range (length {len})"))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => bail!("`{}` is not a container", parts[..i].join(".")),
        };
    }
    unreachable!("loop returns on the last key")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), c);
    }

    #[test]
    fn overrides_set_nested_values() {
        let c = apply_overrides(
            ExperimentConfig::default(),
            &[
                "run.sim.t_final=0".into(),
                "seed=7".into(),
                "verify_cutoffs.pairs.0.1=6".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.run.sim.t_final, 0.0);
        assert_eq!(c.seed, 7);
        assert_eq!(c.verify_cutoffs.pairs[0], [1.0, 6.0]);
        let err = apply_overrides(ExperimentConfig::default(), &["run.nope=1".into()]);
        assert!(format!("{:#}", err.unwrap_err()).contains("unknown field `nope`"));
    }

    #[test]
    fn partial_file_and_line_anchored_errors() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.json");
        std::fs::write(&good, r#"{"seed": 3, "kernel_bound": {"ks": [3, 4]}}"#).unwrap();
        let c = ExperimentConfig::load(Some(&good), &[]).unwrap();
        assert_eq!((c.seed, c.kernel_bound.ks.clone()), (3, vec![3, 4]));
        assert_eq!(c.kernel_bound.samples, 50);

        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, "{\n  \"seed\": 3,\n  \"sed\": 4\n}").unwrap();
        let msg = ExperimentConfig::load(Some(&bad), &[]).unwrap_err().to_string();
        assert!(msg.contains("bad.json:3:"), "{msg}");

        let inadmissible = dir.path().join("pair.json");
        std::fs::write(&inadmissible, r#"{"verify_cutoffs": {"pairs": [[1, 4]]}}"#).unwrap();
        assert!(ExperimentConfig::load(Some(&inadmissible), &[]).is_err());
    }
}
