use std::path::Path;
use std::process::{Command, Output};

fn phaselab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phaselab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn simulate_examples() {
    let dir = tempfile::tempdir().unwrap();
    let pi = "3.141592653589793";
    let out = phaselab(
        &[
            "simulate",
            "--n",
            "4",
            "--m",
            "1",
            "--schedule",
            "oph",
            "--phi",
            pi,
            "--omega",
            pi,
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(stdout(&out), "1.000000000000\n");
    let out = phaselab(
        &[
            "simulate", "--n", "9", "--m", "1", "--phi", "0", "--omega", "0",
        ],
        dir.path(),
    );
    assert_eq!(stdout(&out), "0.111111111111\n");
    let out = phaselab(
        &["simulate", "--n", "9", "--phi", "pi", "--omega", "pi"],
        dir.path(),
    );
    assert!(stdout(&out).starts_with("0.98360"), "{}", stdout(&out));
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["simulate", "--n", "1"],
        vec!["simulate", "--n", "9", "--m", "5"],
        vec!["simulate", "--n", "9", "--phi", "tau"],
        vec!["simulate", "--n", "9", "--bogus", "1"],
        vec!["simulate", "--n", "9", "--schedule", "custom"],
        vec!["sweep", "--n", "9", "--samples", "2", "--out", "x.csv"],
    ] {
        let out = phaselab(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn missing_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = phaselab(&["fit", "--in", "nope.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));
}

#[test]
fn sweep_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = phaselab(
        &[
            "sweep",
            "--n",
            "36",
            "--schedule",
            "oph",
            "--dependence",
            "omega-eq-phi",
            "--samples",
            "1001",
            "--out",
            "cs.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("cs.csv")).unwrap();
    assert_eq!(text.lines().count(), 1002);
    assert_eq!(text.lines().next(), Some("phi,omega,p"));

    let out = phaselab(
        &[
            "fit", "--in", "cs.csv", "--model", "hill", "--out", "fit.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fit.json")).unwrap())
            .unwrap();
    for key in ["b", "k", "n", "c", "sigma"] {
        assert!(doc[key].is_f64(), "{key}");
    }
    assert!((doc["k"].as_f64().unwrap() - 2.03089).abs() < 0.01);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = phaselab(
            &[
                "grid",
                "--n",
                "9",
                "--schedule",
                "hidp",
                "--rows",
                "21",
                "--cols",
                "17",
                "--out",
                name,
            ],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 21 * 17);
}

#[test]
fn custom_pairs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("pairs.csv"),
        "phi,omega\n3.141592653589793,3.141592653589793\n3.141592653589793,3.141592653589793\n",
    )
    .unwrap();
    let out = phaselab(
        &[
            "simulate",
            "--n",
            "9",
            "--schedule",
            "custom",
            "--pairs",
            "pairs.csv",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).starts_with("0.98360"));
    // Two pairs for a four-iteration register.
    let out = phaselab(
        &[
            "simulate",
            "--n",
            "36",
            "--schedule",
            "custom",
            "--pairs",
            "pairs.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = phaselab(
        &[
            "scan",
            "--schedule",
            "oph",
            "--n-min",
            "2",
            "--n-max",
            "40",
            "--samples",
            "201",
            "--out",
            "oph.csv",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("[7, 15, 26]"), "{}", stdout(&out));
    let out = phaselab(
        &[
            "report",
            "--in",
            "oph.csv",
            "--extrapolate",
            "1000",
            "--out",
            "report.json",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(doc["target_n"], 1000);
    assert_eq!(doc["cases"].as_array().unwrap().len(), 2);
    assert_eq!(doc["cases"][0]["dependence"], "omega-eq-phi");
}

#[test]
fn verify_single_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = phaselab(&["verify", "--suite", "analytic-n9"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("analytic-n9"));
    assert!(text.contains("256/256"));
}

#[test]
fn help_lists_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = phaselab(&["scan", "--help"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    for flag in [
        "--schedule",
        "--n-min",
        "--n-max",
        "--samples",
        "[default: 110]",
    ] {
        assert!(text.contains(flag), "{flag}");
    }
}
