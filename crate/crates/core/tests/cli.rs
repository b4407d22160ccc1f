use std::path::Path;

use mclda::cli::cli_main;

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn synth(dir: &Path, seed: &str, codes: &str, ali: &str) -> i32 {
    cli_main([
        "mclda", "synth", "--M", "6", "--N", "40", "--K", "4", "--V", "30", "--seed", seed, "--codes-out",
        &path(dir, codes), "--alignments-out", &path(dir, ali),
    ])
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(synth(d, "7", "c1", "a1"), 0);
    assert_eq!(synth(d, "7", "c2", "a2"), 0);
    assert_eq!(synth(d, "8", "c3", "a3"), 0);
    let read = |n: &str| std::fs::read(d.join(n)).unwrap();
    assert_eq!(read("c1"), read("c2"));
    assert_eq!(read("a1"), read("a2"));
    assert_ne!(read("c1"), read("c3"));
    let first = String::from_utf8(read("c1")).unwrap();
    assert_eq!(first.lines().count(), 6);
    assert_eq!(first.lines().next().unwrap().split(' ').count(), 41);
}

#[test]
fn eval_of_reference_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("ali"), "u1 0 60 a\nu1 60 100 b\nu2 0 40 c\n").unwrap();
    std::fs::write(d.join("units"), "u1 0 0 0 1 1\nu2 2 2\n").unwrap();
    let code = cli_main([
        "mclda", "eval", "--units", &path(d, "units"), "--alignments", &path(d, "ali"), "--report", &path(d, "r.json"),
    ]);
    assert_eq!(code, 0);
    let r = json(d, "r.json");
    for key in ["precision", "recall", "f1", "r_value", "purity", "nmi"] {
        assert_eq!(r["metrics"][key]["display"], "100.0", "{key}");
    }
    assert_eq!(r["evaluation"]["tolerance_ms"], 20);
}

#[test]
fn train_then_eval_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(synth(d, "3", "codes", "ali"), 0);
    let model = ["--K", "4", "--V", "30", "--seed", "1"];
    let mut train = vec![
        "mclda".to_string(),
        "train".into(),
        "--codes".into(),
        path(d, "codes"),
        "--units-out".into(),
        path(d, "units"),
        "--posteriors-out".into(),
        path(d, "post"),
        "--report".into(),
        path(d, "train.json"),
    ];
    train.extend(model.iter().map(|s| s.to_string()));
    assert_eq!(cli_main(train), 0);
    let eval = [
        "mclda", "eval", "--units", &path(d, "units"), "--alignments", &path(d, "ali"), "--report", &path(d, "eval.json"),
    ];
    assert_eq!(cli_main(eval), 0);
    let mut run = vec![
        "mclda".to_string(),
        "run".into(),
        "--codes".into(),
        path(d, "codes"),
        "--alignments".into(),
        path(d, "ali"),
        "--report".into(),
        path(d, "run.json"),
        "--units-out".into(),
        path(d, "units2"),
    ];
    run.extend(model.iter().map(|s| s.to_string()));
    assert_eq!(cli_main(run), 0);

    let run = json(d, "run.json");
    assert_eq!(run["metrics"], json(d, "eval.json")["metrics"]);
    assert_eq!(run["convergence"], json(d, "train.json")["convergence"]);
    assert_eq!(run["config"]["k"], 4);
    assert_eq!(run["config"]["model"], "mc-lda");
    assert_eq!(run["corpus"]["total_frames"], 240);
    assert_eq!(
        std::fs::read(d.join("units")).unwrap(),
        std::fs::read(d.join("units2")).unwrap()
    );
    let post = std::fs::read_to_string(d.join("post")).unwrap();
    assert_eq!(post.lines().count(), 6 * 41);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("codes"), "u1 0 1 99\n").unwrap();
    let bad_code = cli_main([
        "mclda", "train", "--codes", &path(d, "codes"), "--V", "10", "--K", "2", "--units-out", &path(d, "u"),
    ]);
    assert_eq!(bad_code, 1);
    let bad_config = cli_main([
        "mclda", "train", "--codes", &path(d, "codes"), "--K", "0", "--units-out", &path(d, "u"),
    ]);
    assert_eq!(bad_config, 1);
    let missing = cli_main([
        "mclda", "eval", "--units", &path(d, "nope"), "--alignments", &path(d, "nope"), "--report", &path(d, "r"),
    ]);
    assert_eq!(missing, 2);
    std::fs::write(d.join("units"), "u1 0 0\n").unwrap();
    std::fs::write(d.join("ali"), "u9 0 40 a\n").unwrap();
    let mismatch = cli_main([
        "mclda", "eval", "--units", &path(d, "units"), "--alignments", &path(d, "ali"), "--report", &path(d, "r"),
    ]);
    assert_eq!(mismatch, 1);
    assert_eq!(cli_main(["mclda", "frobnicate"]), 1);
}
