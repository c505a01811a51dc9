//! Config from TOML plus overrides, then a report written to disk and read back.

use slicewatch::config::Config;
use slicewatch::harness::{
    compute_metrics, emit_results, read_report, run_experiment, ConfusionMatrix, Mode, Variant, REPORT_FILE,
};

fn main() -> slicewatch::error::Result<()> {
    let text = "horizon = 600\n[harness]\nnum_runs = 2\n";
    let cfg = Config::from_toml_str(text, &["ocsvm.eta=300".to_string(), "harness.series_stride=50".to_string()])?;
    println!("config hash {}", cfg.hash());

    let res = run_experiment(&cfg, Mode::PnOcsvm, Variant::Distributed, 0.0)?;
    let dir = std::env::temp_dir().join("slicewatch-report");
    emit_results(&res.report, &res.series, &dir)?;
    let back = read_report(&dir.join(REPORT_FILE))?;
    assert_eq!(back, res.report);
    println!("wrote and re-read {}", dir.display());

    let m = compute_metrics(&ConfusionMatrix { tp: 0, tn: 40, fp: 0, fn_: 0 });
    println!("no positives: precision {:?}, recall {:?}, accuracy {:?}", m.precision, m.recall, m.accuracy);
    Ok(())
}
