use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hintbandit::harness::{run_seed, ExperimentConfig};

const RUN: &str = r#"
name = "cli"
horizon = 3000
record_every = 100
seeds = { base_seed = 5, n_reps = 3 }

[instance]
dim = 4
kind = { type = "scaled", norm = 3.0 }

[hint]
type = "quality"
r_h = 0.5

[policy]
type = "pareto_bandit"
estimator = { instances = 5 }
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hintbandit"));
    for (k, _) in std::env::vars() {
        if k.starts_with("HINTBANDIT_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn manifest_hash(dir: &Path) -> String {
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    m["config_hash"].as_str().unwrap().to_string()
}

#[test]
fn missing_config_exits_2_and_names_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["run", "no/such/file.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no/such/file.toml"));
}

#[test]
fn invalid_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.toml", &RUN.replace("horizon = 3000", "horizon = 1"));
    let out = run(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("horizon"));
    let out = run(&["bogus-command"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_is_byte_deterministic_and_manifest_tracks_content() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "a.toml", RUN);
    for d in ["o1", "o2"] {
        let out = run(&["run", &cfg, "--out", d], tmp.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (o1, o2) = (tmp.path().join("o1"), tmp.path().join("o2"));
    for f in ["trace.csv", "summary.json", "config.toml"] {
        assert_eq!(fs::read(o1.join(f)).unwrap(), fs::read(o2.join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(o1.join("trace.csv")).unwrap();
    assert!(csv.starts_with("run_id,seed,t,cum_regret,cum_hint_regret,"));
    assert_eq!(csv.lines().count(), 1 + 3 * 30);

    // formatting-only edits keep the hash, content edits change it
    let same = write(tmp.path(), "b.toml", &format!("# comment\n{}", RUN.replace(" = ", "=")));
    run(&["run", &same, "--out", "o3"], tmp.path());
    assert_eq!(manifest_hash(&o1), manifest_hash(&tmp.path().join("o3")));
    let diff = write(tmp.path(), "c.toml", &RUN.replace("r_h = 0.5", "r_h = 0.25"));
    run(&["run", &diff, "--out", "o4"], tmp.path());
    assert_ne!(manifest_hash(&o1), manifest_hash(&tmp.path().join("o4")));
}

#[test]
fn environment_overrides_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "a.toml", RUN);
    let out = bin()
        .args(["run", &cfg])
        .env("HINTBANDIT_SEEDS", "2")
        .env("HINTBANDIT_OUT", "envout")
        .env("HINTBANDIT_THREADS", "1")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("envout/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seeds"], serde_json::json!([5, 6]));
}

#[test]
fn noiseless_estimate_counts_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let body = RUN
        .replace("kind = { type = \"scaled\", norm = 3.0 }", "noise_sigma = 0.0\nseed = 4\nkind = { type = \"scaled\", norm = 20.0 }")
        .replace("horizon = 3000", "horizon = 100000");
    let cfg = write(tmp.path(), "e.toml", &body);
    let a = run(&["estimate", &cfg, "--out", "e1"], tmp.path());
    let b = run(&["estimate", &cfg, "--out", "e2", "--threads", "2"], tmp.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("e1/estimate.json")).unwrap()).unwrap();
    assert!(report["records"][0]["norm_samples"].as_u64().unwrap() > 0);
}

#[test]
fn sweep_echoes_g_values() {
    let tmp = tempfile::tempdir().unwrap();
    let body = RUN
        .replace("type = \"pareto_bandit\"", "type = \"frontier\"\ng = 4.0")
        .replace("type = \"quality\"\nr_h = 0.5", "type = \"anchor\"")
        .replace(
            "kind = { type = \"scaled\", norm = 3.0 }",
            "kind = { type = \"pareto_family\", rho = 0.5, delta = 0.1, index = 1, sign = -1 }",
        );
    let cfg = write(tmp.path(), "s.toml", &body);
    let out = run(&["sweep-frontier", &cfg, "--g-values", "2,8.5,30"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("out/frontier.csv")).unwrap();
    let gs: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(gs, ["2", "8.5", "30"]);
    let out = run(&["sweep-frontier", &cfg, "--g-values", "2,100"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_seed_exits_3() {
    let body = r#"
horizon = 20
seeds = { list = [SEEDS] }

[instance]
dim = 2
kind = { type = "random_unit" }

[hint]
type = "random"
min_regret = 1.9999999995

[policy]
type = "oful"
"#;
    let probe = ExperimentConfig::from_toml(&body.replace("SEEDS", "0")).ok();
    let probe = probe.unwrap_or_else(|| {
        // seed 0 happens to fail validation; any config is fine for probing
        toml_without_validation(&body.replace("SEEDS", "0"))
    });
    let outcomes: Vec<_> = (0..40).map(|s| run_seed(&probe, s)).collect();
    let good = outcomes.iter().find(|o| o.error.is_none()).unwrap().seed;
    let bad = outcomes.iter().find(|o| o.error.is_some()).unwrap().seed;
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "f.toml", &body.replace("SEEDS", &format!("{good}, {bad}")));
    let out = run(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("out/summary.json").exists());
}

fn toml_without_validation(text: &str) -> ExperimentConfig {
    let v: toml::Value = toml::from_str(text).unwrap();
    v.try_into().unwrap()
}

#[test]
fn calibrate_reports_w() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["calibrate-w", "2,3", "400", "--seeds", "3"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().last().unwrap().starts_with("W = "));
    let cal: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/calibration.json")).unwrap()).unwrap();
    assert_eq!(cal["rows"].as_array().unwrap().len(), 2);
}
