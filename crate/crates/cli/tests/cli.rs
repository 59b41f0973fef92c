use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "seed = 4\n[iterations]\ngaze = 120\narm = 60\neyehand = 60\nenvchange = 40\n[eval]\ntrials = 20\nrepeats = 2\ncompare_trials = 20\n";

fn bin(dir: &Path, args: &[&str]) -> Output {
    let cfg = dir.join("small.toml");
    if !cfg.exists() {
        std::fs::write(&cfg, SMALL).unwrap();
    }
    Command::new(env!("CARGO_BIN_EXE_visuomotor"))
        .arg("--config")
        .arg(&cfg)
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn last_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.lines().last().expect("no output")).unwrap()
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn train_then_eval_gaze_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = last_json(&ok(bin(d, &["gen-data", "--kind", "gaze", "--data", "data"])));
    assert!(gen["count"].as_u64().unwrap() > 0);
    ok(bin(d, &["train", "--stage", "gaze", "--data", "data", "--models", "models"]));
    let eval = last_json(&ok(bin(d, &["eval", "--stage", "gaze", "--models", "models", "--out", "reports"])));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join(eval["report"].as_str().unwrap())).unwrap()).unwrap();
    assert_eq!(report["stage"], "gaze");
    assert_eq!(report["trials"], 20);
    assert!(d.join(eval["metrics"].as_str().unwrap()).exists());
}

#[test]
fn eval_without_a_model_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(dir.path(), &["eval", "--stage", "arm", "--models", "nowhere", "--out", "r"]);
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "missing_model");
    assert!(err["message"].as_str().unwrap().contains("missing model"));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(dir.path(), &["fly"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn bad_config_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.toml"), "seed = \"x\"\n").unwrap();
    let out = bin(dir.path(), &["init-config", "--out", "c.toml"]);
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "parse");
}

#[test]
fn comparing_a_bundle_with_itself_is_a_draw() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(bin(d, &["gen-data", "--kind", "gaze", "--data", "data"]));
    ok(bin(d, &["gen-data", "--kind", "arm", "--data", "data"]));
    ok(bin(d, &["train", "--stage", "gaze", "--data", "data", "--models", "m"]));
    ok(bin(d, &["train", "--stage", "arm", "--data", "data", "--models", "m"]));
    ok(bin(d, &["gen-data", "--kind", "eyehand", "--data", "data", "--models", "m"]));
    ok(bin(d, &["train", "--stage", "eyehand", "--data", "data", "--models", "m"]));
    let cmp = last_json(&ok(bin(d, &["compare", "--original", "m", "--adapted", "m", "--out", "r"])));
    assert_eq!(cmp["verdict"], 0.0);
    assert_eq!(cmp["original_success"], cmp["adapted_success"]);
}
