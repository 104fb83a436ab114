use std::fs;
use std::path::Path;
use std::process::Command;

fn hyperbp(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_hyperbp")).args(args).output().expect("run hyperbp");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn ber_csv(dir: &Path, name: &str, workers: &str) -> String {
    let path = dir.join(name);
    hyperbp(&[
        "ber", "--code", "BCH_31_16", "--snr", "3,4", "--seed", "42", "--min-errors", "200",
        "--workers", workers, "--out", path.to_str().unwrap(),
    ]);
    assert!(path.with_extension("json").exists());
    fs::read_to_string(path).unwrap()
}

#[test]
fn repeated_ber_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = ber_csv(dir.path(), "a.csv", "1");
    let b = ber_csv(dir.path(), "b.csv", "1");
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 3);
    let c = ber_csv(dir.path(), "c.csv", "2");
    let d = ber_csv(dir.path(), "d.csv", "2");
    assert_eq!(c, d);
}

#[test]
fn cost_and_symcheck_verbs() {
    let out = hyperbp(&["cost", "--code", "BCH_63_51", "--iters", "5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let ratio: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((ratio - 0.05).abs() <= 0.03);

    let out = hyperbp(&["symcheck", "--code", "HAMMING_7_4", "--trials", "5"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("\"violated\":false"));
}

#[test]
fn train_resume_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    let curve = dir.path().join("loss.csv");
    let common = ["train", "--code", "HAMMING_7_4", "--iters", "2", "--seed", "1"];
    let mut args: Vec<&str> = common.to_vec();
    args.extend(["--steps", "2", "--checkpoint", ck.to_str().unwrap(), "--out", curve.to_str().unwrap()]);
    hyperbp(&args);
    let mut args: Vec<&str> = common.to_vec();
    args.extend(["--steps", "3", "--resume", "--checkpoint", ck.to_str().unwrap(), "--out", curve.to_str().unwrap()]);
    hyperbp(&args);
    let text = fs::read_to_string(&curve).unwrap();
    let steps: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(steps, ["0", "1", "2"]);

    let out = hyperbp(&[
        "ber", "--code", "HAMMING_7_4", "--decoder", "ar-hyper", "--checkpoint", ck.to_str().unwrap(),
        "--snr", "3", "--min-errors", "20",
    ]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("ar-hyper,HAMMING_7_4"));
}

#[test]
fn mismatched_checkpoint_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    hyperbp(&["train", "--code", "HAMMING_7_4", "--iters", "1", "--steps", "1", "--checkpoint", ck.to_str().unwrap()]);
    let out = Command::new(env!("CARGO_BIN_EXE_hyperbp"))
        .args(["ber", "--code", "BCH_31_16", "--decoder", "ar-hyper", "--checkpoint", ck.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
