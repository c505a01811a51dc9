//! Reads a measurement CSV with a label column and runs both detectors on it.
//!
//! `cargo run --example ingest_measurements -- path/to/file.csv`
//! Without an argument a labelled file is generated from a simulated run first.

use std::fmt::Write as _;
use std::path::PathBuf;

use slicewatch::config::Config;
use slicewatch::error::{Error, Result};
use slicewatch::harness::{evaluate_dataset, ingest_csv, ColumnMapping, Dataset, Mode, Variant};
use slicewatch::slicing_sim::{AnomalyTargets, Scenario};

fn labelled_file() -> Result<PathBuf> {
    let cfg = Config::default();
    let sc = Scenario::build(&cfg.scenario, &cfg.seeds, AnomalyTargets::Pn)?;
    let trace = sc.trace();
    let mut text = String::from(
        "time,slice_id,sfc_id,vn_id,pn_id,feature_1,feature_2,feature_3,feature_4,feature_5,feature_6,label\n",
    );
    for row in &trace.rows {
        for (v, f) in trace.vns.iter().zip(&row.features) {
            let label = row.anomalous_pns.contains(&v.pn_id) as u8;
            let _ = write!(text, "{},{},{},{},{}", row.time, v.slice_id, v.sfc_id, v.vn_id, v.pn_id);
            for x in f {
                let _ = write!(text, ",{x}");
            }
            let _ = writeln!(text, ",{label}");
        }
    }
    let path = std::env::temp_dir().join("slicewatch-labelled.csv");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn main() -> Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => labelled_file()?,
    };
    let mapping = ColumnMapping::detect(&path)?;
    let streams = ingest_csv(&path, &mapping)?;
    println!(
        "{} streams, {} entries, features {:?}",
        streams.streams.len(),
        streams.total_entries(),
        streams.feature_names
    );

    let ds = Dataset::from_streams(&streams)?;
    let cfg = Config::default();
    let res = evaluate_dataset(&ds, &cfg, Mode::PnOcsvm, Variant::Distributed, &path.display().to_string())?;
    match res.report.aggregate {
        Some(a) => println!("pn-ocsvm: recall {:?} precision {:?}", a.metrics.recall, a.metrics.precision),
        None => println!("pn-ocsvm: no labels"),
    }
    let res = evaluate_dataset(&ds, &cfg, Mode::PlCca, Variant::Distributed, &path.display().to_string())?;
    let alarms: u64 = res.report.runs[0].targets.iter().map(|t| t.alarms).sum();
    println!("pl-cca: {alarms} alarms over {} links", res.report.runs[0].targets.len());
    Ok(())
}
