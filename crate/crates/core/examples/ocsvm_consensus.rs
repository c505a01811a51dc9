//! Three VN agents on one PN learning a shared OCSVM boundary by consensus.
//!
//! `cargo run --example ocsvm_consensus`

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use slicewatch::ocsvm_admm::{consensus_gap, PnDetector, PnDetectorConfig};
use slicewatch::rff::RffParams;

fn main() -> slicewatch::error::Result<()> {
    let rff = Arc::new(RffParams::sample(2, 100, 4.0, 5)?);
    let mut det = PnDetector::new(PnDetectorConfig::new(600.0, 4.0, 3, rff)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let mut draw = |shift: f64| -> Vec<f64> { (0..2).map(|_| shift + noise.sample(&mut rng)).collect() };

    let mut rollbacks = [0usize; 2];
    for t in 0..1200 {
        // Agent 1 drifts far from normal operation for a few steps.
        let drifting = (1000..1010).contains(&t);
        let xs = [draw(0.0), draw(if drifting { 3.0 } else { 0.0 }), draw(0.0)];
        let samples: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
        let v = det.step(t, &samples)?;
        if !v.committed {
            rollbacks[drifting as usize] += 1;
        }
        if t % 200 == 0 || drifting {
            println!(
                "t={t:4} gap={:.2e} rho={:+.4} signs={:?}",
                consensus_gap(&det.agents),
                det.agents[0].rho,
                v.per_agent_signs
            );
        }
    }
    println!("rolled back on {} of 1190 normal steps and {} of 10 drifting steps", rollbacks[0], rollbacks[1]);
    Ok(())
}
