use std::path::PathBuf;
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"))
}

fn coopsense(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_coopsense"));
    cmd.args(args);
    for var in ["TRIALS", "SEED", "WORKERS", "OUT", "SCENARIO", "TARGET_PFA"] {
        cmd.env_remove(format!("COOPSENSE_{var}"));
    }
    cmd.envs(envs.iter().copied());
    cmd.output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zero_trials_is_a_usage_error() {
    let path = scenario("table4-g15-b30");
    let o = coopsense(
        &["simulate", "--scenario", path.to_str().unwrap(), "--trials", "0"],
        &[],
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--trials"), "{}", stderr(&o));
}

#[test]
fn analyze_defaults_to_three_published_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("analysis.csv");
    let o = coopsense(&["analyze", "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 4, "{csv}");
    assert!(csv.lines().skip(1).all(|l| l.contains("analysis")), "{csv}");
}

#[test]
fn bad_config_reports_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(scenario("table4-g15-b30"))
        .unwrap()
        .replace("noise_variance = 1.0", "noise_variance = -2.0");
    std::fs::write(&path, text).unwrap();
    let o = coopsense(&["simulate", "--scenario", path.to_str().unwrap(), "--trials", "10"], &[]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("bad.toml") && err.contains("noise_variance"), "{err}");

    let o = coopsense(&["simulate", "--scenario", "/nonexistent/x.toml"], &[]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("table1-sprt-csprt");
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let o = coopsense(
            &[
                "simulate",
                "--scenario",
                path.to_str().unwrap(),
                "--trials",
                "2000",
                "--seed",
                "9",
                "--workers",
                workers,
                "--out",
                out.to_str().unwrap(),
            ],
            &[],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", "1");
    assert_eq!(a, run("b.csv", "1"));
    assert_eq!(a, run("c.csv", "4"));
}

#[test]
fn environment_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env.csv");
    let path = scenario("table4-g12-b27");
    let o = coopsense(
        &["simulate", "--hypothesis", "h0"],
        &[
            ("COOPSENSE_SCENARIO", path.to_str().unwrap()),
            ("COOPSENSE_TRIALS", "500"),
            ("COOPSENSE_SEED", "1234"),
            ("COOPSENSE_OUT", out.to_str().unwrap()),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.contains(",500,") && row.contains(",1234,") && row.contains("H0"), "{csv}");

    let o = coopsense(&["simulate"], &[("COOPSENSE_SCENARIO", path.to_str().unwrap()), ("COOPSENSE_TRIALS", "0")]);
    assert!(!o.status.success());
}
