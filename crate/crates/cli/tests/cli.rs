use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn oppmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oppmod"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = oppmod(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

/// Every file in `dir`. The manifest loses its wall-clock duration and input
/// paths; input contents stay covered by its hash.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path: PathBuf = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let mut bytes = fs::read(&path).unwrap();
        if name == "manifest.json" {
            let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
            let m = v.as_object_mut().unwrap();
            m.remove("duration_ms");
            m.remove("inputs");
            bytes = serde_json::to_vec(&v).unwrap();
        }
        files.insert(name, bytes);
    }
    files
}

const SMALL_AUCTION: &str = "agents = 6\nrounds = 10\nepisodes = 20\nseeds = 2\n";
const SMALL_SIM: &str = "day_ticks = 6000\n";
const SMALL_TRAIN: &str = "epochs = 40\nhidden = [32, 32]\nlearning_rate = 0.003\n";

#[test]
fn sealed_bid_writes_three_rows_summing_to_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "a.toml", SMALL_AUCTION);
    let out = tmp.path().join("run");
    ok(&[
        "sealed-bid",
        "run",
        "--config",
        &cfg,
        "--seed",
        "3",
        "--out",
        &s(&out),
        "--jobs",
        "2",
    ]);
    let text = fs::read_to_string(out.join("winstats.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kind,wins,share");
    let kinds: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(kinds, ["OM", "IM", "Random"]);
    let total: f64 = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
    let curves = fs::read_to_string(out.join("training_curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 21);

    // thread count does not change results
    let serial = tmp.path().join("serial");
    ok(&[
        "sealed-bid",
        "run",
        "--config",
        &cfg,
        "--seed",
        "3",
        "--out",
        &s(&serial),
    ]);
    assert_eq!(
        snapshot(&out)["winstats.csv"],
        snapshot(&serial)["winstats.csv"]
    );
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let out = s(&tmp.path().join("x"));
    let missing = s(&tmp.path().join("missing.toml"));
    for cmd in [
        ["sealed-bid", "run"],
        ["lob", "simulate"],
        ["classify", "train"],
    ] {
        let r = oppmod(&[cmd[0], cmd[1], "--config", &missing, "--out", &out]);
        assert_eq!(r.status.code(), Some(2), "{cmd:?}");
        assert!(String::from_utf8_lossy(&r.stderr).contains("missing.toml"));
    }
    let unknown = write(tmp.path(), "u.toml", "agentz = 3\n");
    let r = oppmod(&["sealed-bid", "run", "--config", &unknown, "--out", &out]);
    assert_eq!(r.status.code(), Some(2));
    let invalid = write(tmp.path(), "i.toml", "agents = 1\n");
    let r = oppmod(&["sealed-bid", "run", "--config", &invalid, "--out", &out]);
    assert_eq!(r.status.code(), Some(2));
    assert_eq!(oppmod(&["lob", "simulate"]).status.code(), Some(2));
    let r = oppmod(&[
        "dataset",
        "generate",
        "--in",
        "x",
        "--ratios",
        "0.5,0.6,0.1",
        "--out",
        &out,
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn print_config_round_trips() {
    let tmp = TempDir::new().unwrap();
    for cmd in [
        ["sealed-bid", "run"],
        ["lob", "simulate"],
        ["classify", "train"],
    ] {
        let printed = ok(&[cmd[0], cmd[1], "--print-config", "--seed", "11"]).stdout;
        let cfg = write(tmp.path(), "p.toml", std::str::from_utf8(&printed).unwrap());
        let again = ok(&[
            cmd[0],
            cmd[1],
            "--print-config",
            "--config",
            &cfg,
            "--seed",
            "11",
        ])
        .stdout;
        assert_eq!(printed, again, "{cmd:?}");
    }
    let printed = ok(&["lob", "simulate", "--print-config", "--seed", "11"]).stdout;
    assert!(String::from_utf8(printed).unwrap().contains("seed = 11"));
}

#[test]
fn zero_agent_simulation_gives_empty_logs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "z.toml",
        "[mm]\ncount = 0\n[lc]\ncount = 0\n[me]\ncount = 0\n[mo]\ncount = 0\n",
    );
    let out = tmp.path().join("sim");
    ok(&["lob", "simulate", "--config", &cfg, "--out", &s(&out)]);
    assert_eq!(
        fs::read_to_string(out.join("trades.csv"))
            .unwrap()
            .lines()
            .count(),
        1
    );
    assert_eq!(
        fs::read_to_string(out.join("snapshots.csv"))
            .unwrap()
            .lines()
            .count(),
        1
    );
    assert_eq!(fs::read_to_string(out.join("records.jsonl")).unwrap(), "");
}

#[test]
fn insufficient_class_is_named() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "s.toml", SMALL_SIM);
    let sim = tmp.path().join("sim");
    ok(&["lob", "simulate", "--config", &cfg, "--out", &s(&sim)]);
    let r = oppmod(&[
        "dataset",
        "generate",
        "--in",
        &s(&sim.join("records.jsonl")),
        "--per-class",
        "100000",
        "--out",
        &s(&tmp.path().join("ds")),
    ]);
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(
        err.contains("MM") || err.contains("LC") || err.contains("ME") || err.contains("MO"),
        "{err}"
    );
}

/// Runs every subcommand into `root` and returns the output directories.
fn pipeline(root: &Path, cfg_dir: &Path) -> Vec<PathBuf> {
    let auction = write(cfg_dir, "a.toml", SMALL_AUCTION);
    let sim_cfg = write(cfg_dir, "s.toml", SMALL_SIM);
    let train_cfg = write(cfg_dir, "t.toml", SMALL_TRAIN);
    let dirs: Vec<PathBuf> = ["bid", "sim", "ds", "model", "eval", "pca"]
        .iter()
        .map(|d| root.join(d))
        .collect();
    ok(&[
        "sealed-bid",
        "run",
        "--config",
        &auction,
        "--seed",
        "5",
        "--out",
        &s(&dirs[0]),
    ]);
    ok(&[
        "lob",
        "simulate",
        "--config",
        &sim_cfg,
        "--seed",
        "5",
        "--out",
        &s(&dirs[1]),
    ]);
    ok(&[
        "dataset",
        "generate",
        "--in",
        &s(&dirs[1].join("records.jsonl")),
        "--per-class",
        "150",
        "--seed",
        "5",
        "--out",
        &s(&dirs[2]),
    ]);
    ok(&[
        "classify",
        "train",
        "--train",
        &s(&dirs[2].join("train.jsonl")),
        "--val",
        &s(&dirs[2].join("val.jsonl")),
        "--config",
        &train_cfg,
        "--seed",
        "5",
        "--out",
        &s(&dirs[3]),
    ]);
    let model = s(&dirs[3].join("model.csv"));
    let test = s(&dirs[2].join("test.jsonl"));
    ok(&[
        "classify",
        "eval",
        "--model",
        &model,
        "--data",
        &test,
        "--out",
        &s(&dirs[4]),
    ]);
    ok(&[
        "pca",
        "project",
        "--model",
        &model,
        "--data",
        &test,
        "--out",
        &s(&dirs[5]),
    ]);
    dirs
}

#[test]
fn every_subcommand_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let a = pipeline(&tmp.path().join("a"), tmp.path());
    let b = pipeline(&tmp.path().join("b"), tmp.path());
    for (x, y) in a.iter().zip(&b) {
        let (sx, sy) = (snapshot(x), snapshot(y));
        assert!(sx.contains_key("manifest.json"), "{}", x.display());
        assert_eq!(sx.keys().collect::<Vec<_>>(), sy.keys().collect::<Vec<_>>());
        for (name, bytes) in &sx {
            assert!(bytes == &sy[name], "{} differs", x.join(name).display());
        }
    }
}

#[test]
fn pipeline_outputs_have_expected_shape() {
    let tmp = TempDir::new().unwrap();
    let d = pipeline(&tmp.path().join("p"), tmp.path());

    let ds: serde_json::Value =
        serde_json::from_slice(&fs::read(d[2].join("manifest.json")).unwrap()).unwrap();
    let sizes = &ds["details"]["split_sizes"];
    assert_eq!(
        sizes["train"].as_u64().unwrap()
            + sizes["val"].as_u64().unwrap()
            + sizes["test"].as_u64().unwrap(),
        600
    );
    assert_eq!(sizes["test"], 200);
    let scaler = fs::read_to_string(d[2].join("scaler.csv")).unwrap();
    assert!(scaler.lines().count() > 1);

    let test = fs::read_to_string(d[2].join("test.jsonl")).unwrap();
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for line in test.lines().skip(1) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        *counts
            .entry(v["label"].as_str().unwrap().to_string())
            .or_default() += 1;
    }
    let cm = fs::read_to_string(d[4].join("confusion_matrix.csv")).unwrap();
    for row in cm.lines().skip(1) {
        let mut cells = row.split(',');
        let label = cells.next().unwrap();
        let sum: u64 = cells.map(|c| c.parse::<u64>().unwrap()).sum();
        assert_eq!(sum, counts[label], "{label}");
    }
    let metrics: serde_json::Value =
        serde_json::from_slice(&fs::read(d[4].join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["accuracy"].as_f64().unwrap() > 0.5);

    let proj = fs::read_to_string(d[5].join("projection.csv")).unwrap();
    assert_eq!(proj.lines().next().unwrap(), "pc1,pc2,pc3,label");
    assert!(proj.lines().all(|l| l.split(',').count() == 4));
    assert_eq!(
        proj.lines().count() as u64,
        1 + counts.values().sum::<u64>()
    );

    let model = fs::read_to_string(d[3].join("model.csv")).unwrap();
    assert!(model.starts_with("input,hidden1,hidden2,classes\n22,32,32,4\n"));
    let curve = fs::read_to_string(d[3].join("loss_curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 41);
}

#[test]
fn overfits_its_own_training_set() {
    let tmp = TempDir::new().unwrap();
    let sim_cfg = write(tmp.path(), "s.toml", SMALL_SIM);
    let train_cfg = write(
        tmp.path(),
        "t.toml",
        "epochs = 300\nhidden = [64, 64]\nlearning_rate = 0.003\n",
    );
    let sim = tmp.path().join("sim");
    let ds = tmp.path().join("ds");
    ok(&["lob", "simulate", "--config", &sim_cfg, "--out", &s(&sim)]);
    ok(&[
        "dataset",
        "generate",
        "--in",
        &s(&sim.join("records.jsonl")),
        "--per-class",
        "25",
        "--ratios",
        "1,0,0",
        "--out",
        &s(&ds),
    ]);
    let train = s(&ds.join("train.jsonl"));
    let model_dir = tmp.path().join("model");
    ok(&[
        "classify",
        "train",
        "--train",
        &train,
        "--config",
        &train_cfg,
        "--out",
        &s(&model_dir),
    ]);
    let eval = tmp.path().join("eval");
    ok(&[
        "classify",
        "eval",
        "--model",
        &s(&model_dir.join("model.csv")),
        "--data",
        &train,
        "--out",
        &s(&eval),
    ]);
    let metrics: serde_json::Value =
        serde_json::from_slice(&fs::read(eval.join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["accuracy"].as_f64().unwrap() > 0.95, "{metrics}");
}
