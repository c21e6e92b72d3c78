use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn inmaca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inmaca")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn predict_without_model_is_a_usage_error() {
    let o = inmaca(&["predict", "--fasta", "x.fa", "--out", "out"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("--model"));
}

#[test]
fn window_length_55_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for extra in [&[][..], &["--allow-custom"][..]] {
        let mut args = vec!["--window-length", "55"];
        args.extend_from_slice(extra);
        args.extend(["synth", "--out", s(dir.path())]);
        let o = inmaca(&args);
        assert_eq!(o.status.code(), Some(1));
        assert!(
            stderr(&o).starts_with("error: invalid-parameter: window length 55"),
            "{}",
            stderr(&o)
        );
    }
}

#[test]
fn custom_length_needs_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--window-length",
        "57",
        "synth",
        "--sequences",
        "0",
        "--out",
        s(dir.path()),
    ];
    assert_eq!(inmaca(&args).status.code(), Some(1));
    let mut with = vec!["--allow-custom"];
    with.extend(args);
    let o = inmaca(&with);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn bad_fasta_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let fa = dir.path().join("bad.fa");
    fs::write(&fa, ">s1\nACGX\n").unwrap();
    let o = inmaca(&[
        "train",
        "--fasta",
        s(&fa),
        "--truth",
        s(&fa),
        "--out",
        s(&dir.path().join("m.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(
        e.starts_with("error: fasta:") && e.contains("line 2") && e.contains("column 4"),
        "{e}"
    );
}

#[test]
fn synth_is_deterministic_and_seed_dependent() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = inmaca(&["--seed", seed, "synth", "--sequences", "3", "--out", s(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out.join("sequences.fa")).unwrap()
    };
    let a = run("a", "4");
    assert_eq!(a, run("b", "4"));
    assert_ne!(a, run("c", "5"));
}

#[test]
fn windows_train_evaluate_and_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = d.join("c.toml");
    fs::write(
        &cfg,
        "[train.tree.clonal]\npopulation_size = 40\nstop_count = 10\ng_max = 5\n",
    )
    .unwrap();
    let data = d.join("data");
    let ok = |args: &[&str]| {
        let o = inmaca(args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        String::from_utf8(o.stdout).unwrap()
    };
    ok(&[
        "--seed",
        "3",
        "synth",
        "--sequences",
        "0",
        "--coding-windows",
        "60",
        "--noncoding-windows",
        "60",
        "--out",
        s(&data),
    ]);
    let model = d.join("m.json");
    let windows = data.join("windows.fa");
    let labels = data.join("windows.tsv");
    let common = ["--config", s(&cfg), "--seed", "3"];
    let mut train = common.to_vec();
    train.extend([
        "train",
        "--windows",
        s(&windows),
        "--labels",
        s(&labels),
        "--encoding",
        "features",
        "--out",
        s(&model),
    ]);
    let out = ok(&train);
    assert!(out.contains("classes\tcoding,noncoding"), "{out}");

    let report = d.join("eval.json");
    let text = ok(&[
        "evaluate",
        "--model",
        s(&model),
        "--windows",
        s(&windows),
        "--labels",
        s(&labels),
        "--timing",
        "100,200",
        "--out",
        s(&report),
    ]);
    assert!(text.contains("accuracy"), "{text}");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["total"], 120);
    assert_eq!(json["timing"].as_array().unwrap().len(), 2);

    let basins = ok(&["inspect-basins", "--model", s(&model)]);
    assert!(basins.contains("rules"), "{basins}");
    let o = inmaca(&["inspect-basins", "--model", s(&model), "--which", "promoter"]);
    assert_eq!(o.status.code(), Some(1));
}
