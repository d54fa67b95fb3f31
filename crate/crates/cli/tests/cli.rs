use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frontlab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scene(dir: &Path, name: &str, value: Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    p
}

fn gallery_scene(dir: &Path, entry: &str, params: Value, n: usize) -> PathBuf {
    scene(
        dir,
        &format!("{entry}.json"),
        json!({
            "surface": {"gallery": entry, "params": params},
            "resolution": [n, n],
            "tolerances": {"ball_resolution": 101}
        }),
    )
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn gallery_list_names_every_entry() {
    let o = run(&["gallery", "list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    for name in ["cuspidal_edge", "swallowtail", "cuspidal_lips", "cuspidal_beaks", "sin_family", "rank0_family", "zero_mean"] {
        assert!(text.contains(name));
    }
}

#[test]
fn gallery_scene_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = run(&["gallery", "scene", "rank0_family", "--param", "k=2", "--param", "s=-1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["surface"]["params"]["k"], 2.0);
    assert_eq!(v["surface"]["params"]["s"], -1.0);
    let o = run(&["analyze", "--config", out.to_str().unwrap(), "--point", "0,0"]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["result"]["class"]["rank"], 0);

    let o = run(&["gallery", "scene", "rank0_family", "--param", "k=2.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn smoothable_rank0_even_is_not_smoothable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gallery_scene(dir.path(), "rank0_family", json!({"k": 2}), 101);
    let o = run(&["smoothable", "--config", cfg.to_str().unwrap(), "--point", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["result"]["verdict"], "not_smoothable");
}

#[test]
fn behavior_of_lips_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gallery_scene(dir.path(), "cuspidal_lips", json!({}), 101);
    let o = run(&["behavior", "--config", cfg.to_str().unwrap(), "--quantity", "K", "--point", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["result"]["boundedness"]["verdict"], "bounded");
    assert!(v["result"]["boundedness"]["constant"].as_f64().unwrap() <= 1.0 + 1e-6);
    let ext = &v["result"]["extendibility"];
    assert_eq!(ext["verdict"], "not_extendable");
    let limits: Vec<f64> = ext["path_limits"].as_array().unwrap().iter().filter_map(|p| p["limit"].as_f64()).collect();
    assert!(limits.iter().any(|l| l.abs() < 1e-3));
    assert!(limits.iter().any(|l| (l + 2.0 / 3.0).abs() < 1e-3));
    assert_eq!(v["seed"], 7);
}

#[test]
fn inconclusive_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scene(
        dir.path(),
        "thin.json",
        json!({"surface": {"gallery": "cuspidal_edge"}, "resolution": [21, 21], "tolerances": {"min_samples": 100000}}),
    );
    let o = run(&["behavior", "--config", cfg.to_str().unwrap(), "--quantity", "H", "--protocol", "boundedness"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout_json(&o)["result"]["verdict"], "inconclusive");
}

#[test]
fn errors_exit_with_one_and_name_the_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scene(dir.path(), "bad.json", json!({"surface": {"x": ["u", "v", "u*"]}, "tmb": [["1", "0"], ["0", "1"], ["0", "0"]]}));
    let o = run(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("/surface/x/2"), "{err}");

    let cfg = scene(dir.path(), "bad2.json", json!({"surface": {"gallery": "swallowtail"}, "resolution": [5, 5], "extra": 1}));
    let o = run(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let cfg = gallery_scene(dir.path(), "cuspidal_edge", json!({}), 11);
    let o = run(&["analyze", "--config", cfg.to_str().unwrap(), "--point", "0;0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["behavior", "--config", cfg.to_str().unwrap(), "--quantity", "k3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn singular_on_beaks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gallery_scene(dir.path(), "cuspidal_beaks", json!({}), 101);
    let o = run(&["singular", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    let pts = v["result"]["singular_set"]["points"].as_array().unwrap();
    assert!(pts.len() > 50);
    for p in pts {
        let (u, w) = (p["u"].as_f64().unwrap(), p["v"].as_f64().unwrap());
        assert!((6.0 * w * w - u * u).abs() < 1e-6);
    }
    assert_eq!(v["result"]["point"]["rank"], 1);
    assert_eq!(v["result"]["point"]["degenerate"], true);
}

#[test]
fn report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scene(
        dir.path(),
        "lips.json",
        json!({"surface": {"gallery": "cuspidal_lips"}, "resolution": [61, 61], "t": -0.05, "tolerances": {"ball_resolution": 101}}),
    );
    let mut outputs = Vec::new();
    for k in 0..2 {
        let [j, c, o] = ["json", "csv", "obj"].map(|ext| dir.path().join(format!("r{k}.{ext}")));
        let status = run(&["report", "--config", cfg.to_str().unwrap(), "--out", j.to_str().unwrap(), "--csv", c.to_str().unwrap(), "--obj", o.to_str().unwrap()]).status;
        assert!(matches!(status.code(), Some(0) | Some(2)));
        outputs.push([j, c, o].map(|p| std::fs::read(p).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let report: Value = serde_json::from_slice(&outputs[0][0]).unwrap();
    let hash = report["scene_hash"].as_str().unwrap().to_string();
    assert!(String::from_utf8_lossy(&outputs[0][1]).starts_with(&format!("# scene {hash}\n")));
    assert!(String::from_utf8_lossy(&outputs[0][2]).starts_with(&format!("# scene {hash}\n")));
    let again: Value = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(again, report);
    assert_eq!(report["result"]["smoothability"]["verdict"], "smoothable_minus_side");
}

#[test]
fn parallel_writes_an_obj() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gallery_scene(dir.path(), "cuspidal_edge", json!({}), 11);
    let obj = dir.path().join("m.obj");
    let o = run(&["parallel", "--config", cfg.to_str().unwrap(), "--t", "-0.5", "--point=0.2,0.4", "--obj", obj.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 121);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 200);
    let v = stdout_json(&o);
    assert_eq!(v["result"]["t"], -0.5);
}
