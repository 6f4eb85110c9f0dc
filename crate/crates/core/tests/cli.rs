use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cubelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubelab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn drift_on_the_free_group() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "drift.json",
        r#"{"family":{"kind":"tree","rank":2},"experiment":"drift","steps":20000,"trials":64,"seed":11}"#,
    );
    let out = tmp.path().join("out");
    let o = cubelab(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    let lambda = s["result"]["lambda_hat"].as_f64().unwrap();
    assert!((0.48..=0.52).contains(&lambda), "{lambda}");
    assert_eq!(s["seeds"].as_array().unwrap().len(), 64);
    assert_eq!(s["config"]["seed"], 11);
    let csv = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    assert_eq!(csv.lines().count(), 65);
}

#[test]
fn malformed_edge_list_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    for (text, field) in [
        (r#"{"family":{"kind":"raag","generators":["a","b"],"edges":[["a","x"]]}}"#, "family.edges[0]"),
        (r#"{"family":{"kind":"raag","generators":["a","b"],"edges":[["a","a"]]}}"#, "family.edges[0]"),
        ("{\"family\": {\"kind\": \"tree\", \"rank\": 2},\n \"steps\": \"many\"}", "steps"),
    ] {
        let cfg = write_config(tmp.path(), "bad.json", text);
        let o = cubelab(&["run", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(field), "{err}");
    }
    let o = cubelab(&["run", "--config", tmp.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "b.json",
        r#"{"family":{"kind":"raag","generators":["a","b","c"],"edges":[["a","b"]]},"experiment":"boundary","steps":400,"trials":10,"seed":2,"squeeze_radius":3}"#,
    );
    let dirs: Vec<_> = ["one", "two"].iter().map(|d| tmp.path().join(d)).collect();
    for d in &dirs {
        assert!(cubelab(&["run", "--config", &cfg, "--out", d.to_str().unwrap()]).status.success());
    }
    let mut names: Vec<_> = std::fs::read_dir(&dirs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for n in names {
        assert_eq!(std::fs::read(dirs[0].join(&n)).unwrap(), std::fs::read(dirs[1].join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "w.json",
        r#"{"family":{"kind":"grid","dimension":2},"steps":50,"trials":2,"seed":1}"#,
    );
    let out = tmp.path().join("o");
    assert!(cubelab(&["run", "--config", &cfg, "--seed", "99", "--out", out.to_str().unwrap()]).status.success());
    assert_eq!(summary(&out)["config"]["seed"], 99);
}

#[test]
fn subcommands_pick_the_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"family":{"kind":"raag","generators":["a","b","c"],"edges":[["a","b"]]},"elements":["c a","a b"],"halfspaces":["c@e+","c@c a+"],"validate_radius":3}"#,
    );
    let out = tmp.path().join("c");
    let o = cubelab(&["classify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed["classifications"][0]["kind"], "Contracting");
    assert_eq!(printed["classifications"][1]["kind"], "HyperbolicFlat");

    let o = cubelab(&["bridge", "--config", &cfg, "--out", tmp.path().join("b").to_str().unwrap()]);
    assert!(o.status.success());
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed["pairs"][0]["bridge"]["length"], 3);
    assert_eq!(printed["pairs"][0]["inner"], "c@c a+");

    let v = tmp.path().join("v");
    let o = cubelab(&["validate", "--config", &cfg, "--threads", "1", "--out", v.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(summary(&v)["result"]["passed"], true);
}

#[test]
fn validate_reports_and_fails_loudly() {
    let tmp = tempfile::tempdir().unwrap();
    let f2 = write_config(tmp.path(), "f2.json", r#"{"family":{"kind":"tree","rank":2},"validate_radius":4}"#);
    let out = tmp.path().join("f2");
    assert!(cubelab(&["validate", "--config", &f2, "--out", out.to_str().unwrap()]).status.success());
    assert!(summary(&out)["result"]["assertions"].as_u64().unwrap() >= 10_000);

    let line = write_config(tmp.path(), "z.json", r#"{"family":{"kind":"grid","dimension":1},"validate_radius":4}"#);
    let out = tmp.path().join("z");
    assert!(cubelab(&["validate", "--config", &line, "--out", out.to_str().unwrap()]).status.success());

    // Bridge neighbourhoods fail on Z^2*Z at radius 4; the exit code says so.
    let raag = write_config(
        tmp.path(),
        "r.json",
        r#"{"family":{"kind":"raag","generators":["a","b","c"],"edges":[["a","b"]]},"validate_radius":4}"#,
    );
    let out = tmp.path().join("r");
    let o = cubelab(&["validate", "--config", &raag, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(summary(&out)["passed"], false);
}

#[test]
fn caps_need_the_override_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "big.json",
        r#"{"family":{"kind":"tree","rank":2},"validate_radius":7}"#,
    );
    let o = cubelab(&["validate", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--override-caps"));
    let work = write_config(
        tmp.path(),
        "work.json",
        r#"{"family":{"kind":"tree","rank":2},"steps":1000000,"trials":1000}"#,
    );
    let o = cubelab(&["run", "--config", &work, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let c = cubelab::harness::ExperimentConfig::load(&path).unwrap();
        c.check(false).unwrap();
        let f = c.build_family().unwrap();
        c.build_measure(&f).unwrap();
        seen += 1;
    }
    assert!(seen >= 6);
}
