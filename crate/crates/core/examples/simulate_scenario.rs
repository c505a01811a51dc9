//! Builds the default substrate, embeds SFCs, schedules anomalies and exports the trace.

use slicewatch::config::Config;
use slicewatch::harness::{write_csv, write_schedule_csv, Dataset};
use slicewatch::slicing_sim::{AnomalyTargets, Scenario};

fn main() -> slicewatch::error::Result<()> {
    let cfg = Config::default();
    let sc = Scenario::build(&cfg.scenario, &cfg.seeds, AnomalyTargets::Both)?;
    println!("{} PNs, {} PLs", sc.network.num_pns(), sc.network.links.len());
    for s in &sc.embeddings {
        println!("sfc {} service {} on PNs {:?}", s.sfc_id, s.service_type, s.vn_to_pn);
    }
    for e in sc.schedule.events.iter().take(5) {
        println!("{} loses {:.2} over [{}, {})", e.target, e.loss_fraction, e.start, e.end);
    }

    let ds = Dataset::from_trace(&sc.trace(), &sc.embeddings);
    let dir = std::env::temp_dir().join("slicewatch-simulate");
    std::fs::create_dir_all(&dir).map_err(|e| slicewatch::error::Error::io(&dir, e))?;
    write_csv(&ds, &dir.join("trace.csv"))?;
    write_schedule_csv(&sc.schedule, &dir.join("anomalies.csv"))?;
    println!("wrote {}", dir.display());
    Ok(())
}
