use std::path::PathBuf;

use coopsense::golden::TABLE4;
use coopsense::model::{Algorithm, Hypothesis, ScenarioConfig};
use coopsense::scenarios;

fn scenario(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"));
    ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn table1_files_match_builtins() {
    for (file, alg) in [
        ("table1-dualsprt", Algorithm::DualSprt),
        ("table1-sprt-csprt", Algorithm::SprtCsprt),
        ("table1-dualcsprt", Algorithm::DualCsprt),
    ] {
        assert_eq!(scenario(file), scenarios::table1(alg), "{file}");
    }
}

#[test]
fn table4_files_match_builtins() {
    for row in &TABLE4 {
        let name = format!("table4-g{}-b{}", row.gamma, row.beta);
        assert_eq!(scenario(&name), scenarios::table4(row), "{name}");
    }
}

#[test]
fn glr_files_match_builtins() {
    let t2 = scenarios::table2(Algorithm::GlrCsprt).with_thresholds(1.0, 1.25);
    assert_eq!(scenario("table2-glr-csprt"), t2);
    let t3 = scenarios::table3(Algorithm::GlrCsprt)
        .with_thresholds(1.0, 18.5)
        .with_truth(Hypothesis::H0);
    assert_eq!(scenario("table3-glr-csprt"), t3);
}

#[test]
fn builtins_round_trip_through_toml() {
    let mut all: Vec<ScenarioConfig> = Algorithm::ALL
        .iter()
        .flat_map(|&a| [scenarios::table2(a), scenarios::table3(a)])
        .collect();
    all.extend(TABLE4.iter().map(scenarios::table4));
    for cfg in all {
        let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg, "{}", cfg.id);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let good = scenarios::table1(Algorithm::SprtCsprt).to_toml_string();
    for (from, to) in [
        ("local_threshold = 8.0", "local_threshold = -1.0"),
        ("noise_variance = 5.0", "noise_variance = 0.0"),
        ("algorithm = \"sprt-csprt\"", "algorithm = \"glr-csprt\""),
        ("algorithm = \"sprt-csprt\"", "algorithm = \"cusum\""),
    ] {
        assert!(good.contains(from), "{from} missing from\n{good}");
        let bad = good.replace(from, to);
        assert!(ScenarioConfig::from_toml_str(&bad).is_err(), "{to} accepted");
    }
    let unknown = format!("surprise = 1\n{good}");
    assert!(ScenarioConfig::from_toml_str(&unknown).is_err());
}
