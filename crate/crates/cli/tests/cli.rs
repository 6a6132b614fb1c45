use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn antisym(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_antisym"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn basis_prints_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let o = antisym(tmp.path(), &["basis", "--out", "a"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("p=1 q=2 m=3\n"));
    assert!(tmp.path().join("a/spec.json").exists());

    let o = antisym(tmp.path(), &["basis", "-n", "3", "-d", "2", "--out", "b"]);
    assert!(stdout(&o).starts_with("p=4 q=9 m=40\n"));
    let o = antisym(tmp.path(), &["basis", "-n", "3", "-d", "2", "--mode", "improved", "--out", "c"]);
    assert!(stdout(&o).starts_with("p=7 q=9 m=70\n"));
}

#[test]
fn basis_evaluates_a_csv() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("x.csv"), "x0_0,x1_0\n0.2,0\n0.1,-0.1\n").unwrap();
    let o = antisym(tmp.path(), &["basis", "--eval", "x.csv", "--out", "o"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("o/features.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let expect = [[0.2, 0.04, 0.008], [0.2, 0.0, 0.004]];
    for (row, e) in rows.iter().zip(expect) {
        for (a, b) in row[2..].iter().zip(e) {
            assert!((a - b).abs() <= 1e-15 * b.abs(), "{a} vs {b}");
        }
    }
}

#[test]
fn verify_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = antisym(tmp.path(), &["verify", "--out", "ok"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(tmp.path().join("ok/verify-anti-symmetry.json").exists());

    let o = antisym(tmp.path(), &["verify", "--mutate", "sign-flip", "--trials", "50", "--out", "bad"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness anti-symmetry"));

    let o = antisym(tmp.path(), &["verify", "--trials", "0", "--out", "zero"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("zero").exists());

    let o = antisym(tmp.path(), &["verify", "--mutate", "no-such-thing"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("run.json"),
        r#"{"n": 3, "d": 2, "seed": 5, "verify": {"trials": 20}, "output_dir": "from-config"}"#,
    )
    .unwrap();
    let o = antisym(tmp.path(), &["--config", "run.json", "verify", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.starts_with("n=3 d=2 m=40 seed=7"), "{out}");
    assert!(out.contains("    20 trials"));
    assert!(tmp.path().join("from-config/verify.json").exists());

    fs::write(tmp.path().join("typo.json"), r#"{"verfy": {"trials": 20}}"#).unwrap();
    assert_eq!(antisym(tmp.path(), &["--config", "typo.json", "verify"]).status.code(), Some(2));
    fs::write(tmp.path().join("neg.json"), r#"{"tolerances": {"zero": -1}}"#).unwrap();
    assert_eq!(antisym(tmp.path(), &["--config", "neg.json", "verify"]).status.code(), Some(2));
    assert_eq!(antisym(tmp.path(), &["--config", "missing.json", "basis"]).status.code(), Some(2));
}

#[test]
fn jacobian_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let o = antisym(tmp.path(), &["jacobian", "--point", "1,1", "--point", "1,2", "--out", "j"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("rank 1 of 2 — column-rank-deficient on the collision locus"));
    assert!(out.contains("rank 2 of 2 — full column rank"));

    let o = antisym(tmp.path(), &["demo", "jacobian", "-n", "3", "-d", "2", "--out", "dj"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("rank 6 of 6 — full column rank"));

    assert_eq!(antisym(tmp.path(), &["jacobian", "--out", "none"]).status.code(), Some(2));
}

#[test]
fn lipschitz_demo_row() {
    let tmp = tempfile::tempdir().unwrap();
    let o = antisym(tmp.path(), &["demo", "lipschitz", "--eps", "0.1", "--out", "d"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("d/demo-lipschitz.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[1] - 4.97519).abs() < 1e-5);
    assert!(row[3] <= 1e-12);
    assert_eq!(antisym(tmp.path(), &["demo", "c1", "--eps", "-1"]).status.code(), Some(2));
}

#[test]
fn fit_then_predict() {
    let tmp = tempfile::tempdir().unwrap();
    let o = antisym(
        tmp.path(),
        &["fit", "--samples", "300", "--features", "60", "--ridge", "1e-6", "--holdout", "50", "--out", "f"],
    );
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stdout(&o));
    assert!(tmp.path().join("f/model.json").exists());
    assert!(tmp.path().join("f/fit-diagnostics.csv").exists());

    fs::write(tmp.path().join("x.csv"), "0.5,0.25\n0.25,0.5\n0.3,0.3\n").unwrap();
    let o = antisym(tmp.path(), &["predict", "--model", "f/model.json", "--input", "x.csv", "--out", "p"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("p/predictions.csv")).unwrap();
    let preds: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(preds[0], -preds[1]);
    assert_eq!(preds[2], 0.0);

    let o = antisym(tmp.path(), &["fit", "--samples", "10", "--features", "60", "--out", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("nope").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("x.csv"), "0.2,0\n0.1,-0.1\n").unwrap();
    for out in ["r1", "r2"] {
        let runs: [&[&str]; 5] = [
            &["basis", "--eval", "x.csv", "--seed", "11", "--out", out],
            &["verify", "--trials", "100", "-n", "3", "-d", "2", "--seed", "11", "--out", out],
            &["demo", "jacobian", "--seed", "11", "--out", out],
            &["demo", "c1", "--out", out],
            &["fit", "--samples", "200", "--features", "40", "--ridge", "1e-6", "--seed", "11", "--out", out],
        ];
        for args in runs {
            assert!(matches!(antisym(tmp.path(), args).status.code(), Some(0 | 1)));
        }
    }
    let a = read_dir_sorted(&tmp.path().join("r1"));
    let b = read_dir_sorted(&tmp.path().join("r2"));
    assert_eq!(a.len(), b.len());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}
