use std::path::Path;
use std::process::{Command, Output};

fn pvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvlab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inst.csv");
    let o = pvlab(&[
        "gen",
        "--N",
        "30",
        "--n",
        "3",
        "--rho",
        "0.2",
        "--model",
        "orth",
        "--seed",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,n,rho,kind,seed,stream"));
    assert_eq!(lines.next(), Some("30,3,0.2,orthonormal,4,0"));
    assert_eq!(lines.clone().count(), 30);
    assert!(lines.all(|l| l.split(',').count() == 3));
}

#[test]
fn estimate_prints_summary_and_dumps_raw() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    let o = pvlab(&[
        "estimate",
        "--N",
        "2000",
        "--n",
        "8",
        "--rho",
        "0.05",
        "--seed",
        "1",
        "--dump-raw",
        raw.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let line = stdout(&o);
    for key in [
        "lambda=",
        "gap=",
        "l2_error=",
        "entrywise_max_weighted=",
        "exact_match=",
    ] {
        assert!(line.contains(key), "{line}");
    }
    let dump = std::fs::read_to_string(raw).unwrap();
    assert_eq!(dump.lines().next(), Some("j,raw_estimate"));
    assert_eq!(dump.lines().count(), 2001);
}

#[test]
fn detect_appends_csv_with_single_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rates.csv");
    let args = [
        "detect",
        "--N",
        "300",
        "--n",
        "4",
        "--rho",
        "0.1",
        "--trials",
        "4",
        "--test",
        "reduction",
        "--csv",
        csv.to_str().unwrap(),
    ];
    assert!(pvlab(&args).status.success());
    assert!(pvlab(&args).status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "N,n,rho,c1,test,trials,type1,type2");
    assert_eq!(lines[1], lines[2]);
}

#[test]
fn advantage_hand_value_and_breakdown() {
    let o = pvlab(&[
        "advantage",
        "--N",
        "2",
        "--n",
        "2",
        "--rho",
        "1",
        "--D",
        "4",
        "--breakdown",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("adv_squared=1.125"), "{text}");
    assert!(text.contains("d,sphere_moment,alpha_sum,contribution"));
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn sweep_runs_and_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let cfg = format!(
        r#"{{"Ns": [200], "ns": [3], "rhos": [0.2], "trials": 2, "model": "gaussian", "tasks": ["recover", "advantage"], "D": 8, "seed": 1, "out": {:?}}}"#,
        out.to_str().unwrap()
    );
    let good = write(dir.path(), "good.json", &cfg);
    let o = pvlab(&["sweep", &good]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 5);

    let bad = write(dir.path(), "bad.json", r#"{"Ns": [200], "trials": 2}"#);
    assert_eq!(pvlab(&["sweep", &bad]).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(pvlab(&["sweep", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn invalid_parameters_fail_cleanly() {
    let o = pvlab(&["estimate", "--N", "5", "--n", "9", "--rho", "0.5"]);
    assert!(!o.status.success());
    assert!(!o.stderr.is_empty());
}
