use std::path::Path;
use std::process::{Command, Output};

use dgbo_cli::ExperimentConfig;
use dgbo_core::solver::SimConfig;

const SMALL: [&str; 6] = [
    "--override",
    "run.sim.n=128",
    "--override",
    "run.sim.t_final=0.1",
    "--override",
    "run.sim.dt=0.005",
];

fn dgbo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgbo"))
        .args(args)
        .env_remove("DGBO_OUT")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_small(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--out", out.to_str().unwrap()];
    args.extend(SMALL);
    args.extend(extra);
    dgbo(&args)
}

#[test]
fn zero_length_run_writes_one_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("r");
    let o = run_small(&out, &["--override", "run.sim.t_final=0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let snaps: Vec<_> = std::fs::read_dir(out.join("snapshots")).unwrap().collect();
    assert_eq!(snaps.len(), 1);
    for f in [
        "config.json",
        "series.csv",
        "diagnostics.csv",
        "summary.json",
        "drift.svg",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
}

#[test]
fn identical_inputs_give_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = run_small(dir, &["--seed", "7"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for f in ["series.csv", "diagnostics.csv", "summary.json", "config.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        assert!(x == y, "{f} differs between identical runs");
    }
}

#[test]
fn echoed_config_reparses_to_the_same_value() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("r");
    let o = run_small(&out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("config.json")).unwrap();
    let sim: SimConfig = serde_json::from_str(&text).unwrap();
    assert_eq!((sim.n, sim.t_final, sim.dt), (128, 0.1, 0.005));
    assert_eq!(serde_json::to_string_pretty(&sim).unwrap() + "\n", text);

    let full = tmp.path().join("full.json");
    let cfg = ExperimentConfig::default();
    std::fs::write(&full, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    assert_eq!(ExperimentConfig::load(Some(&full), &[]).unwrap(), cfg);
}

#[test]
fn cutoff_and_identity_suites_pass() {
    let tmp = tempfile::tempdir().unwrap();
    for cmd in ["verify-cutoffs", "verify-identity"] {
        let out = tmp.path().join(cmd);
        let o = dgbo(&[cmd, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stderr(&o));
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
        assert_eq!(report["pass"], true, "{cmd}");
        let stdout: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(stdout, report);
    }
}

#[test]
fn malformed_config_is_reported_with_its_position() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    std::fs::write(&path, "{\n  \"seed\": 1,\n  \"run\": oops\n}\n").unwrap();
    let out = tmp.path().join("o");
    let o = dgbo(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains(&format!("{}:3:", path.display())), "{msg}");
}

#[test]
fn invalid_values_and_unknown_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = run_small(&out, &["--override", "run.sim.n=1000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("power of two"), "{}", stderr(&o));

    let o = run_small(&out, &["--override", "run.sim.no_such_field=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no_such_field"), "{}", stderr(&o));

    let path = tmp.path().join("extra.json");
    std::fs::write(&path, "{\"sed\": 3}").unwrap();
    let o = dgbo(&[
        "verify-cutoffs",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sed"), "{}", stderr(&o));
}

#[test]
fn report_on_an_empty_directory_lists_what_is_missing() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dgbo(&["report", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    for f in ["config.json", "series.csv", "diagnostics.csv", "snapshots"] {
        assert!(msg.contains(f), "{f} not listed: {msg}");
    }
}

#[test]
fn report_redraws_an_existing_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("r");
    assert_eq!(run_small(&out, &[]).status.code(), Some(0));
    for f in ["waterfall.svg", "drift.svg", "weighted_energy.svg", "decay.svg"] {
        std::fs::remove_file(out.join(f)).unwrap();
    }
    let o = dgbo(&["report", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("waterfall.svg").exists());
}
