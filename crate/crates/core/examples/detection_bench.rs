//! DO detectors against their single-agent and no-rollback baselines over a few runs.
//!
//! `cargo run --release --example detection_bench`

use slicewatch::config::Config;
use slicewatch::harness::{run_experiment, Mode, Variant};

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "  -  ".into(), |x| format!("{x:.3}"))
}

fn main() -> slicewatch::error::Result<()> {
    let mut cfg = Config::default();
    cfg.harness.num_runs = 4;
    println!("{:<9} {:<12} {:>5} {:>7} {:>7} {:>7}", "mode", "variant", "artd", "recall", "f1", "fpr");
    for mode in [Mode::PnOcsvm, Mode::PlCca] {
        for (variant, artd) in [(Variant::Distributed, 0.0), (Variant::Baseline, 0.0), (Variant::Baseline, 0.1)] {
            let res = run_experiment(&cfg, mode, variant, artd)?;
            let m = res.report.mean_over_runs.unwrap_or_default();
            println!(
                "{:<9} {:<12} {:>5} {:>7} {:>7} {:>7}",
                mode.to_string(),
                variant.to_string(),
                artd,
                fmt(m.recall),
                fmt(m.f1),
                fmt(m.false_positive_rate)
            );
        }
    }
    Ok(())
}
