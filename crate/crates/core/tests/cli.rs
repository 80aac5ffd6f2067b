//! Smoke matrix for the `hgnet` binary: exit codes, artifact shapes and
//! byte-level reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hgnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hgnet")).args(args).env_remove("HGNET_CACHE").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let o = hgnet(args);
    assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn gen(dir: &TempDir, n: usize, seed: u64) -> PathBuf {
    let out = path(dir, &format!("d{n}_{seed}.jsonl"));
    ok(&["gen", "--topology", "grid16", "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", out.to_str().unwrap()]);
    out
}

#[test]
fn gen_writes_balanced_samples_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = gen(&dir, 100, 4);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 101);
    assert!(lines[0].get("topology").is_some());
    let ones = lines[1..].iter().filter(|s| s["label"] == 1).count();
    assert_eq!(ones, 50);
    assert!(lines[1..].iter().all(|s| s["red"].as_array().unwrap().len() == 128));

    let manifest = json(&PathBuf::from(format!("{}.manifest.json", out.display())));
    let digest = manifest["artifacts"][0]["digest"].as_str().unwrap();
    assert_eq!(digest.len(), 16);
    assert_eq!(manifest["seeds"], serde_json::json!([4]));
}

#[test]
fn gen_is_byte_identical_on_rerun() {
    let dir = TempDir::new().unwrap();
    let out = gen(&dir, 20, 9);
    let first = std::fs::read(&out).unwrap();
    let manifest = PathBuf::from(format!("{}.manifest.json", out.display()));
    let first_manifest = std::fs::read(&manifest).unwrap();
    gen(&dir, 20, 9);
    assert_eq!(std::fs::read(&out).unwrap(), first);
    assert_eq!(std::fs::read(&manifest).unwrap(), first_manifest);
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, 20, 1);
    let data = data.to_str().unwrap();
    assert_eq!(code(&hgnet(&["gen", "--topology", "grid16", "--n", "4"])), 2);
    assert_eq!(code(&hgnet(&["gen", "--topology", "grid16", "--n", "3", "--out", "x"])), 2);
    assert_eq!(code(&hgnet(&["train", "--model", "gcn", "--hidden", "0", "--data", data])), 2);
    assert_eq!(code(&hgnet(&["train", "--model", "transformer", "--data", data])), 2);
    assert_eq!(code(&hgnet(&["inspect", "--topology", "grid16", "--m", "1"])), 2);
    assert_eq!(code(&hgnet(&["frobnicate"])), 2);
}

#[test]
fn runtime_failures_exit_1() {
    let dir = TempDir::new().unwrap();
    let missing = path(&dir, "missing.jsonl");
    assert_eq!(code(&hgnet(&["train", "--model", "gcn", "--data", missing.to_str().unwrap()])), 1);
    assert_eq!(code(&hgnet(&["inspect", "--topology", &format!("file:{}", missing.display())])), 1);

    let data = gen(&dir, 20, 1);
    let o = hgnet(&["train", "--model", "gcn", "--data", data.to_str().unwrap(), "--epochs", "3", "--lr", "1e38"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("at epoch"));
}

#[test]
fn train_reports_selected_epoch() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, 40, 2);
    for model in ["gcn", "gcn-vn", "hgnet-edgepool", "hgnet-louvain"] {
        let out = path(&dir, &format!("{model}.json"));
        ok(&["train", "--model", model, "--data", data.to_str().unwrap(), "--epochs", "4", "--seed", "1", "--out", out.to_str().unwrap()]);
        let r = json(&out);
        assert_eq!(r["config"]["model"], model);
        let e = r["selected_epoch"].as_u64().unwrap();
        assert!((1..=4).contains(&e), "{model}: {e}");
        assert_eq!(r["val_trace"].as_array().unwrap().len(), 4);
        let t = r["test_metric"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&t));
    }
}

#[test]
fn train_to_stdout_matches_file() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, 20, 3);
    let out = path(&dir, "r.json");
    let args = ["train", "--model", "gcn", "--data", data.to_str().unwrap(), "--epochs", "2"];
    let o = ok(&args);
    ok(&[&args[..], &["--out", out.to_str().unwrap()]].concat());
    assert_eq!(o.stdout, std::fs::read(&out).unwrap());
}

#[test]
fn cross_validation_csv() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, 60, 5);
    let out = path(&dir, "cv.json");
    ok(&["train", "--model", "gcn", "--data", data.to_str().unwrap(), "--epochs", "2", "--cv", "3", "--jobs", "2", "--out", out.to_str().unwrap()]);
    let csv = std::fs::read_to_string(format!("{}.csv", out.display())).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 5, "{csv}");
    assert!(rows[0].starts_with("fold,"));
    for (f, row) in rows[1..4].iter().enumerate() {
        assert!(row.starts_with(&format!("{f},")));
    }
    assert!(rows[4].starts_with("mean±std"));
    assert!(rows[4].contains('±'));
    assert_eq!(json(&out)["folds"].as_array().unwrap().len(), 3);

    // jobs only change scheduling
    let serial = path(&dir, "cv1.json");
    ok(&["train", "--model", "gcn", "--data", data.to_str().unwrap(), "--epochs", "2", "--cv", "3", "--out", serial.to_str().unwrap()]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&serial).unwrap());
}

#[test]
fn train_is_byte_identical_on_rerun() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, 40, 6);
    let out = path(&dir, "r.json");
    let args = ["train", "--model", "hgnet-edgepool", "--data", data.to_str().unwrap(), "--epochs", "3", "--seed", "7", "--out", out.to_str().unwrap()];
    ok(&args);
    let first = std::fs::read(&out).unwrap();
    let manifest = PathBuf::from(format!("{}.manifest.json", out.display()));
    let first_manifest = std::fs::read(&manifest).unwrap();
    ok(&args);
    assert_eq!(std::fs::read(&out).unwrap(), first);
    assert_eq!(std::fs::read(&manifest).unwrap(), first_manifest);
}

#[test]
fn node_task_on_block_model() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "n.json");
    let data = "sbm:100,2,0.08,0.004,0.5";
    ok(&[
        "train", "--task", "node", "--data", data, "--k-hop", "1", "--train-per-class", "5", "--val", "10", "--test", "10",
        "--model", "hgnet-louvain", "--levels", "1", "--epochs", "20", "--seed", "2", "--out", out.to_str().unwrap(),
    ]);
    let r = json(&out);
    assert_eq!(r["val_trace"].as_array().unwrap().len(), 20);
    assert!(r["selected_epoch"].as_u64().unwrap() <= 20);

    // more evaluation nodes than the graph can hold apart
    let o = hgnet(&["train", "--task", "node", "--data", data, "--k-hop", "2", "--test", "10000", "--model", "gcn", "--epochs", "1"]);
    assert_ne!(code(&o), 0);
}

#[test]
fn inspect_grid_to_top() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "i.json");
    ok(&["inspect", "--topology", "grid16", "--m", "2", "--out", out.to_str().unwrap()]);
    let r = json(&out);
    let sizes: Vec<u64> = r["levels"].as_array().unwrap().iter().map(|l| l["nodes"].as_u64().unwrap()).collect();
    assert_eq!(sizes[0], 256);
    assert_eq!(*sizes.last().unwrap(), 1);
    assert!(sizes.windows(2).all(|w| w[1] < w[0]), "{sizes:?}");
    assert_eq!(r["levels"][0]["edges"], 480);
    assert_eq!(r["inter_edges"].as_u64().unwrap(), sizes[..sizes.len() - 1].iter().sum::<u64>());
    let hops = r["max_routed_hops"].as_u64().unwrap();
    assert!(hops <= 2 * (sizes.len() as u64 - 1));
    for key in ["depth_bound", "node_bound", "routing_bound", "nodes_ok", "depth_ok", "routing_ok", "matched_fractions"] {
        assert!(r["bounds"].get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["bounds"]["m"], 2.0);
}

#[test]
fn inspect_flags_star() {
    let dir = TempDir::new().unwrap();
    let edges = path(&dir, "star.edges");
    let body: String = (1..=10).map(|v| format!("0 {v}\n")).collect();
    std::fs::write(&edges, body).unwrap();
    let o = ok(&["inspect", "--topology", &format!("file:{}", edges.display()), "--m", "2"]);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["levels"][0]["nodes"], 11);
    assert_eq!(r["levels"][1]["nodes"], 10);
    let violating = r["bounds"]["violating_levels"].as_array().unwrap();
    assert!(violating.contains(&Value::from(0)), "{r}");
    assert_eq!(r["bounds"]["nodes_ok"], false);
}

#[test]
fn louvain_cache_directory() {
    let dir = TempDir::new().unwrap();
    let cache = TempDir::new().unwrap();
    let data = gen(&dir, 20, 8);
    let out = path(&dir, "r.json");
    let args = ["train", "--model", "hgnet-louvain", "--data", data.to_str().unwrap(), "--epochs", "2", "--out", out.to_str().unwrap()];
    let run = || Command::new(env!("CARGO_BIN_EXE_hgnet")).args(args).env("HGNET_CACHE", cache.path()).output().unwrap();
    assert_eq!(code(&run()), 0);
    let entries = std::fs::read_dir(cache.path()).unwrap().count();
    assert!(entries > 0);
    let first = std::fs::read(&out).unwrap();
    assert_eq!(code(&run()), 0);
    assert_eq!(std::fs::read(&out).unwrap(), first);
    assert_eq!(std::fs::read_dir(cache.path()).unwrap().count(), entries);
}
