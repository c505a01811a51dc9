use std::collections::BTreeSet;
use std::process::{Command, Output};

use slicewatch::config::CONFIG_KEYS;

fn slicewatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slicewatch")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_lists_exactly_the_documented_keys() {
    let o = slicewatch(&["--help"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let section = text.split("Config keys (file or --set):").nth(1).unwrap();
    let listed: BTreeSet<&str> = section.lines().filter_map(|l| l.split_whitespace().next()).collect();
    let documented: BTreeSet<&str> = CONFIG_KEYS.iter().map(|(k, _)| *k).collect();
    assert_eq!(listed, documented);
}

#[test]
fn error_categories_have_distinct_statuses() {
    let unknown_command = slicewatch(&["frobnicate"]);
    let parse = slicewatch(&["simulate", "--set", "num_pns=lots"]);
    let unknown_key = slicewatch(&["simulate", "--set", "no_such_key=1"]);
    let codes: Vec<i32> = [&unknown_command, &parse, &unknown_key].iter().map(|o| o.status.code().unwrap()).collect();
    assert!(codes.iter().all(|&c| c != 0));
    assert_eq!(codes.iter().collect::<BTreeSet<_>>().len(), 3, "{codes:?}");
    assert!(stderr(&unknown_key).contains("no_such_key"));
}

#[test]
fn unknown_flag_is_named() {
    let o = slicewatch(&["bench", "--turbo"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--turbo"));
}

#[test]
fn bad_config_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.toml");
    std::fs::write(&path, "horizon = [\n").unwrap();
    let o = slicewatch(&["simulate", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), slicewatch(&["simulate", "--set", "num_pns=lots"]).status.code());
}

#[test]
fn simulate_writes_documented_header_then_ingests() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = slicewatch(&["simulate", "--set", "horizon=300", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(
        trace.lines().next().unwrap(),
        "time,slice_id,sfc_id,vn_id,pn_id,feature_1,feature_2,feature_3,feature_4,feature_5,feature_6"
    );
    assert!(dir.path().join("anomalies.csv").exists());

    let path = dir.path().join("trace.csv");
    let o = slicewatch(&["ingest", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().contains("entries:"));

    let report_dir = dir.path().join("pn");
    let o = slicewatch(&["detect-pn", "--trace", path.to_str().unwrap(), "--out", report_dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(report_dir.join("report.json").exists());
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_slicewatch"))
        .args(["simulate", "--set", "horizon=250"])
        .env("SLICEWATCH_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("trace.csv").exists());
}

#[test]
fn ingest_rejects_missing_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "time,slice_id,sfc_id,vn_id,feature_1\n0,1,0,0,2.5\n").unwrap();
    let o = slicewatch(&["ingest", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("pn_id"));
}
