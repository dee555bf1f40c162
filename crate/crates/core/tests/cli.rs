mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;

const SMALL: &str = r#"
seed = 7
hierarchy = "tree.csv"
ensemble_size = 2
hidden = [8]
eval_subset = ["B", "C"]

[policy]
kind = "ones-lsr"

[optimizer]
lr0 = 0.01
decay_factor = 0.8
iterations = 40

[synthetic]
train_rows = 200
test_rows = 150
features = 4
uncertainty_rate = 0.2
readers = [{ sensitivity = 0.8, specificity = 0.8 }, { sensitivity = 0.7, specificity = 0.9 }]

[synthetic.theta]
A = 0.6
B = 0.7
C = 0.5
"#;

const TREE: &str = "name,parent,index\nA,,0\nB,A,1\nC,B,2\n";

fn hierlabel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hierlabel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(cmd: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap()];
    args.extend(extra);
    let out = hierlabel(&args);
    assert!(
        out.status.success(),
        "{cmd} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn small_project(config: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tree.csv"), TREE).unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("out = \"out\"\n{config}")).unwrap();
    (dir, cfg)
}

/// Every file under `root`, keyed by relative path.
fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, acc: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, acc);
            } else {
                acc.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    let mut acc = BTreeMap::new();
    walk(root, root, &mut acc);
    acc
}

#[test]
fn gen_train_predict_eval_happy_path() {
    let (dir, cfg) = small_project(SMALL);
    let out = dir.path().join("out");
    run_ok("gen", &cfg, &[]);
    for f in ["train_labels", "train_features", "test_labels", "test_features", "readers"] {
        assert!(out.join("data").join(format!("{f}.csv")).is_file(), "{f}");
    }
    let prov = std::fs::read_to_string(out.join("data/provenance.json")).unwrap();
    assert!(prov.contains("\"seed\": 7"), "{prov}");

    run_ok("train", &cfg, &[]);
    let model = out.join("model");
    for m in ["member-00", "member-01"] {
        for f in ["stage1.json", "stage2.json", "loss.csv"] {
            assert!(model.join(m).join(f).is_file(), "{m}/{f}");
        }
    }
    assert!(!out.join("model.partial").exists());

    run_ok("predict", &cfg, &[]);
    let preds = std::fs::read_to_string(out.join("predictions.csv")).unwrap();
    assert!(preds.starts_with("id,A,B,C\n"));
    assert_eq!(preds.lines().count(), 151);

    let eval = run_ok("eval", &cfg, &[]);
    let text = std::fs::read_to_string(out.join("report/report.txt")).unwrap();
    assert!(text.contains("mean_auc_selected"));
    assert!(text.contains("mean_readers_below"));
    assert_eq!(String::from_utf8_lossy(&eval.stdout), text);
    let summary = std::fs::read_to_string(out.join("report/summary.csv")).unwrap();
    assert!(summary.contains("mean_auc_selected") && summary.contains("mean_readers_below"));
    for l in ["a", "b", "c"] {
        assert!(out.join("report/roc").join(format!("{l}.csv")).is_file());
    }
    let snap = std::fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(snap.contains("seed = 7"));
}

#[test]
fn flags_override_the_config() {
    let (dir, cfg) = small_project(SMALL);
    let alt = dir.path().join("alt");
    let alt_s = alt.to_str().unwrap();
    run_ok("gen", &cfg, &["--out", alt_s, "--seed", "99"]);
    run_ok("train", &cfg, &["--out", alt_s, "--seed", "99", "--mode", "flat", "--policy", "zeros"]);
    assert!(alt.join("model/member-00/flat.json").is_file());
    assert!(!alt.join("model/member-00/stage1.json").exists());
    let manifest = std::fs::read_to_string(alt.join("model/ensemble.json")).unwrap();
    assert!(manifest.contains("\"flat\"") && manifest.contains("\"zeros\""), "{manifest}");
    assert!(manifest.contains("\"seed\": 99"));
    assert!(!dir.path().join("out").exists());

    let bad = hierlabel(&["train", "--config", cfg.to_str().unwrap(), "--mode", "sideways"]);
    assert_eq!(bad.status.code(), Some(1));
    let bad = hierlabel(&["train", "--config", cfg.to_str().unwrap(), "--policy", "maybe"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn out_of_range_theta_names_the_node() {
    let (dir, cfg) = small_project(&SMALL.replace("B = 0.7", "B = 1.5"));
    let out = hierlabel(&["gen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("`B`") && msg.contains("1.5"), "{msg}");
    assert!(!dir.path().join("out/data").exists());
}

#[test]
fn missing_hierarchy_leaves_no_checkpoints() {
    let (dir, cfg) = small_project(SMALL);
    run_ok("gen", &cfg, &[]);
    std::fs::remove_file(dir.path().join("tree.csv")).unwrap();
    let out = hierlabel(&["train", "--config", cfg.to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("tree.csv"), "{}", stderr(&out));
    assert!(!dir.path().join("out/model").exists());
    assert!(!dir.path().join("out/model.partial").exists());
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(hierlabel(&[]).status.code(), Some(1));
    assert_eq!(hierlabel(&["train"]).status.code(), Some(1));
    assert_eq!(hierlabel(&["bake", "--config", "x.toml"]).status.code(), Some(1));
    assert_eq!(hierlabel(&["--help"]).status.code(), Some(0));
    let missing = hierlabel(&["gen", "--config", "/nonexistent/run.toml"]);
    assert_eq!(missing.status.code(), Some(1));

    let (_dir, cfg) = small_project(&SMALL.replace("seed = 7\n", ""));
    let out = hierlabel(&["gen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("seed"));
}

#[test]
fn corrupt_features_are_a_data_error() {
    let (dir, cfg) = small_project(SMALL);
    run_ok("gen", &cfg, &[]);
    let f = dir.path().join("out/data/train_features.csv");
    let text = std::fs::read_to_string(&f).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    lines[3] = lines[3].replacen(',', ",oops", 1);
    std::fs::write(&f, lines.join("\n")).unwrap();
    let out = hierlabel(&["train", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

fn eval_only_project(preds: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("tree.csv"), TREE).unwrap();
    std::fs::write(
        p.join("truth.csv"),
        "id,A,B,C\nr0,1.0,1.0,1.0\nr1,1.0,1.0,0.0\nr2,1.0,0.0,0.0\nr3,0.0,0.0,0.0\n",
    )
    .unwrap();
    std::fs::write(p.join("preds.csv"), preds).unwrap();
    std::fs::write(
        p.join("readers.csv"),
        "label,reader,fpr,tpr\nB,r1,0.5,0.5\nC,r1,0.0,1.0\nC,r2,0.4,0.9\n",
    )
    .unwrap();
    let cfg = p.join("eval.toml");
    std::fs::write(
        &cfg,
        r#"
seed = 1
out = "out"
hierarchy = "tree.csv"
eval_subset = ["A", "B", "C"]
[data]
test_labels = "truth.csv"
predictions = "preds.csv"
readers = "readers.csv"
"#,
    )
    .unwrap();
    (dir, cfg)
}

#[test]
fn perfect_predictions_score_one() {
    let (dir, cfg) = eval_only_project("id,A,B,C\nr0,1,1,1\nr1,1,1,0\nr2,1,0,0\nr3,0,0,0\n");
    run_ok("eval", &cfg, &[]);
    let csv = std::fs::read_to_string(dir.path().join("out/report/report.csv")).unwrap();
    let mut rows = csv.lines();
    let header: Vec<&str> = rows.next().unwrap().split(',').collect();
    let auc_col = header.iter().position(|h| *h == "auc").unwrap();
    let mut seen = 0;
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        if ["A", "B", "C"].contains(&cells[0]) {
            assert_eq!(cells[auc_col].parse::<f64>().unwrap(), 1.0, "{row}");
            seen += 1;
        }
    }
    assert_eq!(seen, 3);
    let text = std::fs::read_to_string(dir.path().join("out/report/report.txt")).unwrap();
    assert!(text.contains("mean_auc_selected"), "{text}");
    // B's reader sits under the perfect curve, C's readers on it
    let roc = std::fs::read_to_string(dir.path().join("out/report/roc/b.csv")).unwrap();
    assert_eq!(roc, "fpr,tpr\n0,0\n0,1\n1,1\n");
}

#[test]
fn mismatched_prediction_columns_name_the_label() {
    let (_dir, cfg) = eval_only_project("id,A,Bee,C\nr0,1,1,1\nr1,1,1,0\nr2,1,0,0\nr3,0,0,0\n");
    let out = hierlabel(&["eval", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing label column `B`"), "{}", stderr(&out));
}

#[test]
fn flat_and_conditional_agree_on_independent_roots() {
    let config = SMALL
        .replace("tree.csv", "roots.csv")
        .replace("eval_subset = [\"B\", \"C\"]", "eval_subset = [\"A\"]");
    let (dir, cfg) = small_project(&config);
    std::fs::write(dir.path().join("roots.csv"), "name,parent,index\nA,,0\nB,,1\nC,,2\n").unwrap();
    run_ok("gen", &cfg, &[]);
    let cond = dir.path().join("cond");
    let flat = dir.path().join("flat");
    for (dir, mode) in [(&cond, "conditional"), (&flat, "flat")] {
        let d = dir.to_str().unwrap();
        std::fs::create_dir_all(dir.join("data")).unwrap();
        for entry in std::fs::read_dir(cfg.parent().unwrap().join("out/data")).unwrap() {
            let p = entry.unwrap().path();
            std::fs::copy(&p, dir.join("data").join(p.file_name().unwrap())).unwrap();
        }
        run_ok("train", &cfg, &["--out", d, "--mode", mode]);
        run_ok("predict", &cfg, &["--out", d]);
    }
    assert_eq!(
        std::fs::read(cond.join("predictions.csv")).unwrap(),
        std::fs::read(flat.join("predictions.csv")).unwrap()
    );
}

#[test]
fn reruns_are_byte_identical() {
    let (dir, cfg) = small_project(SMALL);
    let out = dir.path().join("out");
    let cycle = || {
        for cmd in ["gen", "train", "eval"] {
            run_ok(cmd, &cfg, &[]);
        }
        snapshot(&out)
    };
    let first = cycle();
    let second = cycle();
    assert_eq!(first.keys().collect::<Vec<_>>(), second.keys().collect::<Vec<_>>());
    for (k, v) in &first {
        assert!(v == &second[k], "{} differs", k.display());
    }
    assert_eq!(cycle_threads(&cfg, &out), first);
}

fn cycle_threads(cfg: &Path, out: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    // worker count must not change any artifact except the config snapshot
    run_ok("gen", cfg, &[]);
    run_ok("train", cfg, &["--threads", "2"]);
    run_ok("eval", cfg, &[]);
    let mut snap = snapshot(out);
    let plain = snap.get(Path::new("config.toml")).unwrap().clone();
    let text = String::from_utf8(plain).unwrap().replace("threads = 2", "threads = 1");
    snap.insert(PathBuf::from("config.toml"), text.into_bytes());
    snap
}

#[test]
fn shipped_benchmark_writes_six_members() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("benchmark.toml");
    let out = dir.path().to_str().unwrap();
    run_ok("gen", &cfg, &["--out", out]);
    run_ok("train", &cfg, &["--out", out]);
    let members: Vec<_> = std::fs::read_dir(dir.path().join("model"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("member-"))
        .collect();
    assert_eq!(members.len(), 6);
    for m in &members {
        assert!(dir.path().join("model").join(m).join("stage2.json").is_file());
    }
    let eval = run_ok("eval", &cfg, &["--out", out]);
    let text = String::from_utf8_lossy(&eval.stdout);
    assert!(text.contains("mean_auc_selected") && text.contains("mean_readers_below"), "{text}");
}
