use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dgbo_cli::{plots, suites, ExperimentConfig};
use serde::Serialize;

/// Simulation and verification suites for the dispersion-generalized
/// Benjamin-Ono equation.
#[derive(Debug, Parser)]
#[command(name = "dgbo", version)]
struct Cli {
    /// JSON experiment config; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory. Defaults to `$DGBO_OUT/<subcommand>`, or
    /// `dgbo-out/<subcommand>` when DGBO_OUT is unset.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed, overriding the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `dotted.key=value`, applied after the config file. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Worker threads for the parallel parts.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one configuration and record its diagnostics.
    Run,
    /// Check the cutoff-family properties.
    VerifyCutoffs,
    /// Check the localization identity and its refinement.
    VerifyIdentity,
    /// Estimate the commutator remainder bound on random fields.
    VerifyCommutatorBound,
    /// KdV soliton transport and the time-step order.
    SolitonTest,
    /// Dyadic oscillatory kernel against its envelope.
    KernelBound,
    /// Propagation of one-sided regularity and its mirror image.
    PropagationDemo,
    /// Redraw the figures of an existing run directory.
    Report {
        /// Run directory; defaults to the output directory.
        dir: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::VerifyCutoffs => "verify-cutoffs",
            Command::VerifyIdentity => "verify-identity",
            Command::VerifyCommutatorBound => "verify-commutator-bound",
            Command::SolitonTest => "soliton-test",
            Command::KernelBound => "kernel-bound",
            Command::PropagationDemo => "propagation-demo",
            Command::Report { .. } => "report",
        }
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| {
        let root = std::env::var_os("DGBO_OUT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("dgbo-out"));
        root.join(cli.command.name())
    })
}

fn print<T: Serialize>(report: &T, out: &Path) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(report)?);
    eprintln!("artifacts in {}", out.display());
    Ok(())
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("cannot size the thread pool")?;
    }
    let out = out_dir(cli);
    std::fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    let pass = match &cli.command {
        Command::Run => {
            let r = suites::run(&cfg.run, cfg.seed, &out)?;
            print(&r, &out)?;
            if r.drift_flags.any() {
                eprintln!("warning: conserved-quantity drift above threshold: {:?}", r.drift);
            }
            true
        }
        Command::VerifyCutoffs => {
            let r = suites::verify_cutoffs(&cfg.verify_cutoffs, &out)?;
            print(&r, &out)?;
            for rep in &r.reports {
                eprintln!(
                    "(eps, b) = ({}, {}): {} (partition residual {:.2e})",
                    rep.eps,
                    rep.b,
                    verdict(rep.all_pass),
                    rep.max_partition_residual
                );
            }
            r.pass
        }
        Command::VerifyIdentity => {
            let r = suites::verify_identity(&cfg.verify_identity, &out)?;
            print(&r, &out)?;
            for c in &r.cases {
                eprintln!(
                    "alpha = {}: residual {:.3e} at N, {:.3e} at 2N (threshold {:.3e}): {}",
                    c.alpha,
                    c.refinement.coarse.residual,
                    c.refinement.fine.residual,
                    c.threshold,
                    verdict(c.pass)
                );
            }
            r.pass
        }
        Command::VerifyCommutatorBound => {
            let r = suites::verify_commutator_bound(&cfg.verify_commutator_bound, cfg.seed, &out)?;
            print(&r, &out)?;
            eprintln!(
                "max ratio {:.6} over {} trials, power-iteration ratio {:.6}: {}",
                r.bound.max_ratio,
                r.bound.trials,
                r.bound.power_ratio,
                verdict(r.pass)
            );
            r.pass
        }
        Command::SolitonTest => {
            let r = suites::soliton_test(&cfg.soliton_test, &out)?;
            print(&r, &out)?;
            eprintln!(
                "translation error {:.3e}, orders {:?}: {}",
                r.translation_error,
                r.richardson_orders,
                verdict(r.pass)
            );
            r.pass
        }
        Command::KernelBound => {
            let r = suites::kernel_bound(&cfg.kernel_bound, cfg.seed, &out)?;
            print(&r, &out)?;
            for c in &r.cases {
                eprintln!(
                    "alpha = {}: constant spread {:.3}, lattice spread {:.3} (alternative normalization {:.3})",
                    c.alpha, c.constant_spread, c.lattice_spread, c.lattice_spread_alt
                );
            }
            r.pass
        }
        Command::PropagationDemo => {
            let r = suites::propagation_demo(&cfg.propagation_demo, &out)?;
            print(&r, &out)?;
            r.pass
        }
        Command::Report { dir } => {
            let dir = dir.clone().unwrap_or(out);
            for p in plots::emit_plots(&dir)? {
                println!("{}", p.display());
            }
            true
        }
    };
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}: checks failed", cli.command.name());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
