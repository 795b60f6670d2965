use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fsa_scr::config::PipelineConfig;
use fsa_scr::pipeline::{cmd_scr, ScrSelection};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn fsa_scr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsa-scr"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("pipeline.toml");
    fs::write(&path, body).unwrap();
    path
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("run_summary.json")).unwrap()).unwrap()
}

#[test]
fn missing_report_file_is_a_validation_error_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "[input]\nreports = \"no_such_reports.csv\"\n");
    let out = tmp.path().join("out");
    let o = fsa_scr(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "losses",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("no_such_reports.csv"), "{stderr}");
    let doc: serde_json::Value = serde_json::from_str(stderr.lines().next().unwrap()).unwrap();
    assert_eq!(doc["errors"][0]["kind"], "io");
    let s = summary(&out);
    assert_eq!(s["status"], "error");
    assert_eq!(s["exit_code"], 2);
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "[losses]\nloss_ratio_yrs = 3\n");
    let o = fsa_scr(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
        "scr",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("loss_ratio_yrs"));
}

#[test]
fn unknown_selection_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fsa_scr(&[
        "--out",
        tmp.path().to_str().unwrap(),
        "scr",
        "--which",
        "model3",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(summary(tmp.path())["errors"][0]["kind"], "usage");
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(fsa_scr(&["scr", "--bogus"]).status.code(), Some(2));
}

#[test]
fn zero_profile_has_zero_standard_formula_scr() {
    let tmp = tempfile::tempdir().unwrap();
    let mut body = String::from("[[scr.profiles]]\ncompany = \"Empty\"\n");
    for lob in ["IA", "H", "BLP", "ML", "MO"] {
        body.push_str(&format!(
            "[scr.profiles.lobs.{lob}]\npremium = 0.0\nr0 = 0.0\np0 = 0.0\n"
        ));
    }
    let config = write_config(tmp.path(), &body);
    let out = tmp.path().join("out");
    let o = fsa_scr(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "scr",
        "--which",
        "standard",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("scr.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("Empty,"), "{csv}");
    for field in row.split(',').skip(1).filter(|f| !f.is_empty()) {
        assert_eq!(field.parse::<f64>().unwrap(), 0.0, "{csv}");
    }
}

#[test]
fn printed_defaults_round_trip() {
    let o = fsa_scr(&["print-defaults"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let parsed: PipelineConfig = toml::from_str(&text).unwrap();
    assert_eq!(parsed, PipelineConfig::default());
}

#[test]
fn cli_scr_matches_the_library() {
    let tmp = tempfile::tempdir().unwrap();
    let config = data_dir().join("pipeline.toml");
    let o = fsa_scr(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
        "scr",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&config).unwrap();
    let mut lib_config: PipelineConfig = toml::from_str(&text).unwrap();
    lib_config.input.reports = Some(data_dir().join("synthetic_reports.csv"));
    let report = cmd_scr(&lib_config, ScrSelection::All).unwrap();
    assert_eq!(
        fs::read_to_string(tmp.path().join("scr.csv")).unwrap(),
        report.to_csv()
    );
    assert_eq!(
        fs::read_to_string(tmp.path().join("sigma_table.csv")).unwrap(),
        report.sigma_table_csv()
    );
}

#[test]
fn seed_override_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let config = data_dir().join("pipeline.toml");
    let o = fsa_scr(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
        "--seed",
        "7",
        "losses",
    ]);
    assert!(o.status.success());
    let s = summary(tmp.path());
    assert_eq!(s["seed"], 7);
    assert_eq!(s["status"], "ok");
    assert!(s["counts"]["loss_records"].as_u64().unwrap() > 0);
}
