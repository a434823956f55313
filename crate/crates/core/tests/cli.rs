use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polyhead::polytope::read_weights;

fn polyhead(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyhead"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const BLOBS: &str = r#"
experiment = "blobs"
classes = 4
seed = 11
epochs = 3
hidden = [16]
batch_size = 16
learning_rate = 0.01
out_dir = "out"
dataset = "blobs"
blob_train_per_class = 20
blob_test_per_class = 10
blob_input_dim = 6
blob_spread = 0.1
blob_seed = 5
"#;

fn write_config(dir: &Path, name: &str, extra: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, format!("{BLOBS}{extra}")).unwrap();
    path
}

#[test]
fn gen_weights_simplex_ten() {
    let dir = tempfile::tempdir().unwrap();
    let out = polyhead(dir.path(), &["gen-weights", "--kind", "simplex", "--k", "10"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let w = read_weights(&dir.path().join("simplex_K10.csv")).unwrap();
    assert_eq!((w.classes(), w.dim()), (10, 9));
    let angle = (-1.0f64 / 9.0).acos();
    assert!(stdout(&out).contains(&format!("{angle:.12}")), "{}", stdout(&out));
}

#[test]
fn gen_weights_cube_reports_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out = polyhead(
        dir.path(),
        &["gen-weights", "--kind", "cube", "--k", "100", "--out", "c.json"],
    );
    assert!(out.status.success());
    assert!(stdout(&out).contains("K=100 d=7"));
    assert!(fs::read_to_string(dir.path().join("c.json")).unwrap().starts_with('{'));
}

#[test]
fn gen_weights_rejects_one_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = polyhead(dir.path(), &["gen-weights", "--kind", "simplex", "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr(&out).is_empty());

    let out = polyhead(dir.path(), &["gen-weights", "--kind", "square", "--k", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(polyhead(p, &["gen-weights", "--kind", "orthoplex", "--k", "10", "--out", "o.csv"])
        .status
        .success());
    let ok = polyhead(p, &["verify", "o.csv"]);
    assert!(ok.status.success(), "{}", stdout(&ok));
    let err: f64 = stdout(&ok)
        .lines()
        .find_map(|l| l.split("max_angle_error=").nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!(err < 1e-12);

    let text = fs::read_to_string(p.join("o.csv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    lines[3] = lines[3].replacen("1.0000000000000000e0", "2.0000000000000000e0", 1);
    fs::write(p.join("bad.csv"), lines.join("\n") + "\n").unwrap();
    let bad = polyhead(p, &["verify", "bad.csv"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("norm_ok=FAIL"));

    fs::write(p.join("garbage.csv"), "not a matrix\n").unwrap();
    assert_eq!(polyhead(p, &["verify", "garbage.csv"]).status.code(), Some(1));
    assert_eq!(polyhead(p, &["verify", "absent.csv"]).status.code(), Some(2));
}

#[test]
fn train_writes_curves_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let cfg = write_config(p, "run.toml", "kind = \"simplex\"\n");
    let out = polyhead(p, &["train", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("final test accuracy"));

    let run = p.join("out/blobs");
    let csv = fs::read(run.join("simplex_K4_seed11.csv")).unwrap();
    assert_eq!(String::from_utf8_lossy(&csv).lines().count(), 4);
    assert!(run.join("simplex_K4_seed11.json").exists());
    assert!(run.join("simplex_K4_seed11.ckpt.json").exists());

    let config_before = fs::read(&cfg).unwrap();
    assert!(polyhead(p, &["train", "run.toml"]).status.success());
    assert_eq!(fs::read(run.join("simplex_K4_seed11.csv")).unwrap(), csv);
    assert_eq!(fs::read(&cfg).unwrap(), config_before);
}

#[test]
fn train_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let cfg = write_config(p, "bad.toml", "kind = \"simplex\"\ntrace_every = 0\n");
    let out = polyhead(p, &["train", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("trace_every"));

    fs::write(p.join("noseed.toml"), BLOBS.replace("seed = 11\n", "") + "kind = \"cube\"\n").unwrap();
    let out = polyhead(p, &["train", "noseed.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("`seed`"));

    let mnist = r#"
experiment = "m"
kind = "cube"
classes = 10
seed = 1
out_dir = "out"
dataset = "idx"
train_images = "missing/train-images-idx3-ubyte.gz"
train_labels = "missing/train-labels-idx1-ubyte.gz"
test_images = "missing/t10k-images-idx3-ubyte.gz"
test_labels = "missing/t10k-labels-idx1-ubyte.gz"
"#;
    fs::write(p.join("mnist.toml"), mnist).unwrap();
    let out = polyhead(p, &["train", "mnist.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("I/O error"));

    assert_eq!(polyhead(p, &["train", "nowhere.toml"]).status.code(), Some(2));
}

#[test]
fn permute_writes_runs_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write_config(p, "perm.toml", "kind = \"cube\"\nn_perms = 3\nbase_seed = 40\n");
    let out = polyhead(p, &["permute", "perm.toml", "--jobs", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));

    let run = p.join("out/blobs");
    let csvs = fs::read_dir(&run)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(csvs, 3);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    let stats = &summary["stats"];
    let mean = stats["mean"].as_f64().unwrap();
    assert!(stats["min"].as_f64().unwrap() <= mean && mean <= stats["max"].as_f64().unwrap());
    assert_eq!(summary["final_accuracies"].as_array().unwrap().len(), 3);
}

#[test]
fn permute_with_identical_runs_has_zero_spread() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write_config(
        p,
        "same.toml",
        "kind = \"orthoplex\"\nn_perms = 3\nbase_seed = 1\nfixed_permutation = true\n",
    );
    assert!(polyhead(p, &["permute", "same.toml"]).status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(p.join("out/blobs/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["stats"]["std"].as_f64().unwrap(), 0.0);
}

#[test]
fn compare_hadamard_checks_order_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write_config(p, "bad.toml", "d_had = 6\n");
    let out = polyhead(p, &["compare-hadamard", "bad.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("d_had"));

    write_config(p, "ok.toml", "d_had = 2\n");
    let out = polyhead(p, &["compare-hadamard", "ok.toml"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(p.join("out/blobs/comparison.json")).unwrap()).unwrap();
    assert_eq!(rep["hadamard_dim"], 2);
    assert_eq!(rep["orthoplex_dim"], 2);
    assert!(p.join("out/blobs/hadamard_K4_seed11.csv").exists());
}
