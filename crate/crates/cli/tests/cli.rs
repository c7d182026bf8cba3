use std::path::Path;
use std::process::{Command, Output};

fn dwell(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dwell"));
    cmd.args(args).env_remove("DWELL_OUT_DIR");
    if let Some(dir) = out_env {
        cmd.env("DWELL_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value_of(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` line in:\n{text}"));
    line.split(" = ").nth(1).unwrap().parse().unwrap()
}

#[test]
fn solve_prints_summary_with_round_trip_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("base.toml");
    std::fs::write(&cfg, "lambda = 0.2\nL = 5.0\n").unwrap();
    let o = dwell(
        &["solve", "--config", cfg.to_str().unwrap(), "--set", "L=6"],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for key in ["mu_plus", "mu_minus", "mu_ex", "gap1", "gap2", "T"] {
        let line = text
            .lines()
            .find(|l| l.starts_with(&format!("{key} = ")))
            .unwrap();
        let mantissa = line.split(" = ").nth(1).unwrap().split('e').next().unwrap();
        assert_eq!(
            mantissa.trim_start_matches('-').replace('.', "").len(),
            17,
            "{line}"
        );
    }
    assert_eq!(value_of(&text, "L"), 6.0);
    assert!((value_of(&text, "T") - (-9.0f64).exp()).abs() < 1e-15);
    assert!(value_of(&text, "gap1") > 0.0);
}

#[test]
fn usage_errors_exit_one_with_synopsis() {
    let o = dwell(&["bogus"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
    let o = dwell(&[], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn configuration_errors_exit_one_and_name_the_problem() {
    let o = dwell(&["solve", "--set", "lamda=0.2"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lamda"), "{}", stderr(&o));
    let o = dwell(&["solve", "--config", "/nonexistent/dwell.toml"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/dwell.toml"));
    let o = dwell(&["solve", "--set", "scf.tol=\"tight\""], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("scf.tol"), "{}", stderr(&o));
}

fn exit_matches_report(o: &Output, dir: &Path) {
    let report = std::fs::read_to_string(dir.join("report.toml")).unwrap();
    let all_passed = report.contains("all_passed = true");
    let expected = if all_passed { 0 } else { 2 };
    assert_eq!(o.status.code(), Some(expected), "{}", stderr(o));
    let failing = stdout(o).lines().filter(|l| l.starts_with("FAIL")).count();
    assert_eq!(failing == 0, all_passed);
}

#[test]
fn sweep_then_report_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = dwell(
        &["sweep", "--out", out.to_str().unwrap(), "--jobs", "2"],
        None,
    );
    exit_matches_report(&o, &out);
    for lambda in ["0", "0.2"] {
        assert!(out.join(format!("sweep_lambda_{lambda}.csv")).is_file());
        assert!(out
            .join(format!("plots/lambda_{lambda}/gap1_vs_lnT.dat"))
            .is_file());
    }
    let csv = std::fs::read_to_string(out.join("sweep_lambda_0.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);

    let o = dwell(&["report", "--out", out.to_str().unwrap()], None);
    exit_matches_report(&o, &out);
    let again = std::fs::read_to_string(out.join("sweep_lambda_0.csv")).unwrap();
    assert_eq!(csv, again);
}

#[test]
fn environment_sets_the_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("from-env");
    let o = dwell(
        &[
            "sweep",
            "--set",
            "lambda_list=[0.0]",
            "--set",
            "L_list=[4.0, 5.0, 6.0]",
        ],
        Some(&env_dir),
    );
    assert!(matches!(o.status.code(), Some(0 | 2)), "{}", stderr(&o));
    assert!(env_dir.join("report.toml").is_file());

    let flag_dir = dir.path().join("from-flag");
    let o = dwell(
        &[
            "sweep",
            "--set",
            "lambda_list=[0.0]",
            "--set",
            "L_list=[4.0, 5.0, 6.0]",
            "--out",
            flag_dir.to_str().unwrap(),
        ],
        Some(&env_dir),
    );
    assert!(matches!(o.status.code(), Some(0 | 2)));
    assert!(flag_dir.join("report.toml").is_file());
}

#[test]
fn report_without_csv_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = dwell(&["report", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sweep_lambda_0.csv"), "{}", stderr(&o));
}
