use slicewatch::config::Config;
use slicewatch::harness::{
    emit_results, ingest_csv, read_report, run_experiment, write_csv, ColumnMapping, Dataset, Mode, Variant,
    REPORT_FILE,
};
use slicewatch::slicing_sim::{AnomalyTargets, Scenario};

#[test]
fn exported_trace_ingests_to_identical_streams() {
    let mut cfg = Config::default();
    cfg.scenario.horizon = 250;
    let sc = Scenario::build(&cfg.scenario, &cfg.seeds, AnomalyTargets::Both).unwrap();
    let ds = Dataset::from_trace(&sc.trace(), &sc.embeddings);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    write_csv(&ds, &path).unwrap();

    let ingested = ingest_csv(&path, &ColumnMapping::standard(ds.num_features())).unwrap();
    let exported = ds.to_streams();
    assert_eq!(ingested.streams, exported.streams);
    assert_eq!(ingested.total_entries(), 250 * ds.vns.len());

    let back = Dataset::from_streams(&ingested).unwrap();
    assert_eq!(back.features, ds.features);
    assert_eq!(back.links, ds.links);
}

#[test]
fn emitted_report_parses_back_equal() {
    let mut cfg = Config::default();
    cfg.scenario.horizon = 400;
    cfg.harness.num_runs = 2;
    let res = run_experiment(&cfg, Mode::PlCca, Variant::Baseline, 0.1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_results(&res.report, &res.series, dir.path()).unwrap();
    assert_eq!(read_report(&dir.path().join(REPORT_FILE)).unwrap(), res.report);
    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("step,accuracy,precision,recall,f1,false_positive_rate\n"));
}

#[test]
fn identical_config_gives_identical_reports() {
    let mut cfg = Config::default();
    cfg.scenario.horizon = 400;
    cfg.harness.num_runs = 3;
    let a = run_experiment(&cfg, Mode::PnOcsvm, Variant::Distributed, 0.0).unwrap();
    let b = run_experiment(&cfg, Mode::PnOcsvm, Variant::Distributed, 0.0).unwrap();
    assert_eq!(serde_json::to_string(&a.report).unwrap(), serde_json::to_string(&b.report).unwrap());
    assert_eq!(a.series, b.series);
}
