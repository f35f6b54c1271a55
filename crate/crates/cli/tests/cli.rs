//! Runs the `nlfronts` binary on small configurations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nonlocal_fronts::profile::read_profile;
use tempfile::TempDir;

const LATTICE: &str = r#"
seed = 3

[problem.nonlinearity]
kind = "cubic"
alpha = 0.3
lambda = 1.0

[[problem.measure.atom]]
loc = 1.0
mass = 1.0

[grid]
min = -60.0
max = 60.0
step = 0.1

[time]
dt = 0.1
horizon = 50.0

[simulate]
initial = { kind = "ramp", center = -25.0, width = 2.0 }
snapshots = 10

[hypotheses]
trials = 10
"#;

const SYMMETRIC: &str = r#"
[problem.nonlinearity]
kind = "cubic"
alpha = 0.5
lambda = 1.0

[[problem.measure.atom]]
loc = -1.0
mass = 0.5

[[problem.measure.atom]]
loc = 1.0
mass = 0.5

[grid]
min = -60.0
max = 60.0
step = 0.1

[time]
dt = 0.1
horizon = 40.0

[recursion]
n_list = [10, 20, 40]
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlfronts"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn malformed_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[grid]\nmin = \"left\"\n");
    let out = run(&["simulate"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn cross_field_validation_exits_2() {
    let dir = TempDir::new().unwrap();
    // dt * (1 + Lipschitz) >= 1 breaks the stability budget
    let cfg = write_config(dir.path(), "dt.toml", &LATTICE.replace("dt = 0.1", "dt = 0.9"));
    assert_eq!(run(&["simulate"], &cfg, &dir.path().join("o")).status.code(), Some(2));
    let cfg = write_config(
        dir.path(),
        "sigma.toml",
        &format!("{LATTICE}\n[bounds]\nsigma = 5.0\n"),
    );
    assert_eq!(run(&["bounds"], &cfg, &dir.path().join("o")).status.code(), Some(2));
}

#[test]
fn constant_alpha_stays_constant() {
    let dir = TempDir::new().unwrap();
    let text = LATTICE.replace(
        r#"initial = { kind = "ramp", center = -25.0, width = 2.0 }"#,
        r#"initial = { kind = "constant", value = 0.3 }"#,
    );
    let cfg = write_config(dir.path(), "c.toml", &text);
    let o = dir.path().join("out");
    let out = run(&["simulate"], &cfg, &o);
    assert_eq!(out.status.code(), Some(0));
    let last = read_profile(&o.join("snapshot_010.csv")).unwrap();
    assert!(last.values().iter().all(|v| (v - 0.3).abs() < 1e-12));
}

#[test]
fn lattice_simulation_emits_a_front_track() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "l.toml", LATTICE);
    let o = dir.path().join("out");
    let out = run(&["simulate", "--svg"], &cfg, &o);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&o.join("simulate.json"));
    let xs: Vec<f64> = r["crossings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(xs.len(), 11);
    // c < 0 for this kernel, so the crossing drifts right at a steady rate
    let late: Vec<f64> = xs.windows(2).skip(5).map(|w| w[1] - w[0]).collect();
    assert!(late.iter().all(|d| *d > 0.0));
    let spread = late.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - late.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 0.05 * late[0]);
    assert!(o.join("crossing_track.svg").exists());
}

#[test]
fn profile_csv_round_trips_bit_exactly() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "l.toml", LATTICE);
    let o = dir.path().join("out");
    run(&["simulate"], &cfg, &o);
    let p = read_profile(&o.join("snapshot_005.csv")).unwrap();
    let again = dir.path().join("again.csv");
    nonlocal_fronts::profile::write_profile(&p, &again).unwrap();
    assert_eq!(read_profile(&again).unwrap(), p);
    assert_eq!(
        fs::read(&again).unwrap(),
        fs::read(o.join("snapshot_005.csv")).unwrap()
    );
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "l.toml", LATTICE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for o in [&a, &b] {
        assert_eq!(run(&["hypotheses"], &cfg, o).status.code(), Some(0));
        assert_eq!(run(&["bounds"], &cfg, o).status.code(), Some(0));
    }
    for name in ["hypotheses.json", "bounds.json", "curve_minus.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
    }
}

#[test]
fn dirac_zero_gap_is_reported_not_failed() {
    let dir = TempDir::new().unwrap();
    let text = LATTICE.replace("loc = 1.0\nmass = 1.0", "loc = 0.0\nmass = 1.0");
    let cfg = write_config(dir.path(), "d0.toml", &text);
    let o = dir.path().join("out");
    let out = run(&["bounds", "--strict"], &cfg, &o);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&o.join("bounds.json"));
    assert_eq!(r["positive"], false);
    assert_eq!(r["gap"].as_f64(), Some(0.0));
}

#[test]
fn corrupted_nonlinearity_fails_under_strict() {
    let dir = TempDir::new().unwrap();
    let text = LATTICE.replace(
        "kind = \"cubic\"\nalpha = 0.3\nlambda = 1.0",
        "kind = \"tabulated\"\nalpha = 0.3\nu = [0.0, 0.15, 0.3, 0.6, 0.9, 1.0]\nf = [0.0, -0.02, 0.0, 0.05, -0.05, 0.0]",
    );
    let cfg = write_config(dir.path(), "bad_f.toml", &text);
    let o = dir.path().join("out");
    assert_eq!(run(&["hypotheses"], &cfg, &o).status.code(), Some(0));
    assert_eq!(run(&["hypotheses", "--strict"], &cfg, &o).status.code(), Some(1));
    let r = json(&o.join("hypotheses.json"));
    assert_eq!(r["passed"], false);
}

#[test]
fn mgf_check_on_lattice_measure() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "l.toml", LATTICE);
    let o = dir.path().join("out");
    assert_eq!(run(&["mgf-check", "--strict"], &cfg, &o).status.code(), Some(0));
    let r = json(&o.join("mgf.json"));
    assert!(r["relative_error"].as_f64().unwrap() < 1e-9);
}

#[test]
fn large_epsilon_exits_1() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "eps.toml",
        &format!("{LATTICE}\n[front]\nepsilon = 50.0\n"),
    );
    let out = run(&["front"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon too large"));
}

#[test]
fn symmetric_front_does_not_move() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.toml", SYMMETRIC);
    let o = dir.path().join("out");
    let out = run(&["front", "--strict", "--jobs", "2"], &cfg, &o);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&o.join("front.json"));
    assert!(r["c"].as_f64().unwrap().abs() < 5e-3);
    assert!(r["measured"]["c"].as_f64().unwrap().abs() < 5e-3);
    assert!(read_profile(&o.join("phi_minus.csv")).is_ok());
}
