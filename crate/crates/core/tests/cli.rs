//! End-to-end runs of the command-line tool.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use trigger_tree::cli::load_split;
use trigger_tree::io::{load_tree, read_csv, save_tree, ColumnRoles};
use trigger_tree::report::{parse_key_values, parse_table};
use trigger_tree::{generate, train, PlantedModel, RunConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trigger-tree"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Self {
        Work { dir: tempfile::tempdir().unwrap() }
    }
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

const SMALL: [&str; 4] = ["--n-samples", "600", "--seed", "3"];

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|x| x.to_string()).collect()
}

fn ok_v(args: &[String]) -> String {
    let a: Vec<&str> = args.iter().map(String::as_str).collect();
    ok(&a)
}

#[test]
fn same_seed_gives_identical_tree_files() {
    let w = Work::new();
    let (a, b) = (w.path("a.json"), w.path("b.json"));
    ok_v(&with(&SMALL, &["train", "--out", s(&a)]));
    ok_v(&with(&SMALL, &["train", "--out", s(&b)]));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let c = w.path("c.json");
    ok(&["--n-samples", "600", "--seed", "4", "train", "--out", s(&c)]);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn cli_tree_matches_library_tree() {
    let w = Work::new();
    let path = w.path("t.json");
    ok_v(&with(&SMALL, &["--criterion", "honest_val", "--lambda", "0.25", "train", "--out", s(&path)]));
    let mut cfg = RunConfig::default();
    cfg.n_samples = 600;
    cfg.seed = 3;
    cfg.criterion = trigger_tree::CriterionKind::HonestVal;
    cfg.lambda = 0.25;
    let tree = train(&load_split(&cfg).unwrap(), &cfg.learner_config()).unwrap();
    assert_eq!(load_tree(&path).unwrap(), tree);
}

#[test]
fn predictions_round_trip_through_files() {
    let w = Work::new();
    let (tree_path, rows) = (w.path("t.json"), w.path("rows.csv"));
    ok_v(&with(&SMALL, &["train", "--out", s(&tree_path)]));
    ok(&["--n-samples", "1000", "--seed", "99", "generate", "--out", s(&rows)]);

    let text = ok(&["predict", "--tree", s(&tree_path), "--input", s(&rows)]);
    let tree = load_tree(&tree_path).unwrap();
    let data = read_csv(&rows, &ColumnRoles::default()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "row,leaf_id,ace,trigger");
    assert_eq!(lines.len(), 1001);
    for (line, sample) in lines[1..].iter().zip(data.samples()) {
        let f: Vec<&str> = line.split(',').collect();
        let p = tree.predict(&sample.features).unwrap();
        assert_eq!(f[1].parse::<usize>().unwrap(), tree.leaf_id(&sample.features).unwrap());
        assert_eq!(f[2].parse::<f64>().unwrap(), p.ace);
        assert_eq!(f[3].parse::<f64>().unwrap(), p.trigger.unwrap());
    }
}

#[test]
fn depth_zero_gives_a_single_leaf() {
    let w = Work::new();
    let out = ok_v(&with(&SMALL, &["--max-depth", "0", "train", "--out", s(&w.path("t.json"))]));
    let kv = parse_key_values(&out);
    assert_eq!(kv["leaf_count"], "1");
    assert_eq!(kv["depth"], "0");
}

#[test]
fn planted_tree_scores_zero_on_noiseless_data() {
    let w = Work::new();
    let (tree_path, test) = (w.path("planted.json"), w.path("test.csv"));
    save_tree(&tree_path, &common::benchmark_tree()).unwrap();
    let data = generate(&PlantedModel::benchmark().with_noise(0.0).with_seed(8), 2000).unwrap();
    trigger_tree::io::write_csv(&test, &data, &ColumnRoles::default()).unwrap();

    let out = ok(&["evaluate", "--tree", s(&tree_path), "--test", s(&test)]);
    let kv = parse_key_values(&out);
    assert!(kv["ace_error"].parse::<f64>().unwrap() < 1e-9);
    assert!(kv["unit_smape"].parse::<f64>().unwrap() < 1e-9);
    assert_eq!(kv["evaluated_leaves"], "2");
}

#[test]
fn unit_smape_needs_true_effects() {
    let w = Work::new();
    let (tree_path, full, bare) = (w.path("t.json"), w.path("full.csv"), w.path("bare.csv"));
    ok_v(&with(&SMALL, &["train", "--out", s(&tree_path), "--test-out", s(&full)]));
    let text = std::fs::read_to_string(&full).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let keep: Vec<usize> = (0..header.len()).filter(|&i| header[i] != "true_effect").collect();
    assert!(keep.len() < header.len(), "test split carries true effects");
    let stripped: String = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            keep.iter().map(|&i| f[i]).collect::<Vec<_>>().join(",") + "\n"
        })
        .collect();
    std::fs::write(&bare, stripped).unwrap();

    let with_truth = parse_key_values(&ok(&["evaluate", "--tree", s(&tree_path), "--test", s(&full)]));
    let without = parse_key_values(&ok(&["evaluate", "--tree", s(&tree_path), "--test", s(&bare)]));
    assert!(with_truth.contains_key("unit_smape"));
    assert!(!without.contains_key("unit_smape"));
    assert_eq!(with_truth["ace_error"], without["ace_error"]);
}

#[test]
fn alpha_adds_pruned_metrics() {
    let w = Work::new();
    let tree_path = w.path("t.json");
    ok_v(&with(&SMALL, &["--estimation-fraction", "0.25", "train", "--out", s(&tree_path)]));
    let plain = parse_key_values(&ok_v(&with(&SMALL, &["--estimation-fraction", "0.25", "evaluate", "--tree", s(&tree_path)])));
    assert!(!plain.contains_key("alpha"));
    let out = ok_v(&with(&SMALL, &["--estimation-fraction", "0.25", "--alpha", "0.05", "evaluate", "--tree", s(&tree_path)]));
    let kv = parse_key_values(&out);
    assert_eq!(kv["alpha"], "0.05");
    assert!(kv.contains_key("pruned_evaluated_leaves"));
    let table = parse_table(&out);
    assert_eq!(table[0].join(","), "variant,leaf_id,n,ace_predicted,ace_test,trigger,p_value");
}

#[test]
fn prune_then_export_dot() {
    let w = Work::new();
    let (tree_path, pruned) = (w.path("t.json"), w.path("p.json"));
    ok_v(&with(&SMALL, &["--estimation-fraction", "0.25", "train", "--out", s(&tree_path)]));
    ok_v(&with(&SMALL, &["--estimation-fraction", "0.25", "prune", "--tree", s(&tree_path), "--out", s(&pruned)]));
    let tree = load_tree(&pruned).unwrap();
    assert!(tree.root.node_count() <= load_tree(&tree_path).unwrap().root.node_count());
    let dot = ok(&["export-dot", "--tree", s(&pruned)]);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("->").count(), tree.root.node_count() - 1);
    assert_eq!(dot.matches("ACE ").count(), tree.leaf_count());
}

#[test]
fn config_file_and_flags_combine() {
    let w = Work::new();
    let cfg = w.path("run.toml");
    std::fs::write(
        &cfg,
        "n_samples = 500\nseed = 5\nmax_depth = 1\n\n[synthetic]\ndimension = 1\nnoise_sd = 0.0\ntreatment_range = [0.0, 4.0]\n\n[[synthetic.subgroups]]\ntrigger = 2.0\neffect = 1.5\n",
    )
    .unwrap();
    let tree_path = w.path("t.json");
    ok(&["--config", s(&cfg), "--max-depth", "0", "train", "--out", s(&tree_path)]);
    let tree = load_tree(&tree_path).unwrap();
    assert_eq!(tree.dimension(), 1);
    assert_eq!(tree.leaf_count(), 1);
    // noiseless single region: the root recovers the planted effect
    assert!((tree.root.ace - 1.5).abs() < 0.2, "{}", tree.root.ace);
}

#[test]
fn tune_prints_the_grid() {
    let out = ok(&["--n-samples", "400", "--folds", "2", "tune", "--lambdas", "0.5,1", "--rhos", "0.1"]);
    let kv = parse_key_values(&out);
    assert!(kv.contains_key("best_lambda") && kv["best_rho"] == "0.1");
    let table = parse_table(&out);
    assert_eq!(table.len(), 3);
}

#[test]
fn exit_codes() {
    let w = Work::new();
    let out = w.path("x.json");
    assert_eq!(run(&["--lambda", "2", "train", "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(run(&["--no-such-flag", "train"]).status.code(), Some(2));
    assert_eq!(run(&["train"]).status.code(), Some(2));
    assert_eq!(run(&["--validation-fraction", "0.7", "--test-fraction", "0.5", "train", "--out", s(&out)]).status.code(), Some(2));

    let junk = w.path("junk.json");
    std::fs::write(&junk, "{ not a tree").unwrap();
    assert_eq!(run(&["export-dot", "--tree", s(&junk)]).status.code(), Some(2));
    assert_eq!(run(&["export-dot", "--tree", s(&w.path("missing.json"))]).status.code(), Some(1));

    let bad_csv = w.path("bad.csv");
    std::fs::write(&bad_csv, "x0,x1,treatment,outcome\n0.1,abc,1,2\n").unwrap();
    assert_eq!(run(&["--data", s(&bad_csv), "train", "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
