//! One virtual link watched by the rollback CCA detector. The upstream and downstream
//! measurements share a latent load until the link starts dropping traffic.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use slicewatch::cca_online::{residual, t2_score, CovarianceTracker, PlDetector};
use slicewatch::harness::quantile;

fn pair(rng: &mut ChaCha8Rng, broken: bool) -> (Vec<f64>, Vec<f64>) {
    let mut g = || -> f64 { StandardNormal.sample(rng) };
    let load = g();
    let u = vec![load + 0.1 * g(), 0.5 * load + 0.1 * g()];
    let carried = if broken { g() } else { load };
    let y = vec![carried + 0.1 * g(), -0.7 * carried + 0.1 * g()];
    (u, y)
}

fn main() -> slicewatch::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (us, ys): (Vec<_>, Vec<_>) = (0..10).map(|_| pair(&mut rng, false)).unzip();
    let mut det = PlDetector::new(vec![CovarianceTracker::init(&us, &ys)?]);
    let mut training = Vec::new();
    for _ in 10..200 {
        let (u, y) = pair(&mut rng, false);
        det.absorb(&[(&u, &y)])?;
        training.push((u, y));
    }
    let model = &det.models()?[0];
    println!("canonical correlations after training: {:.3?}", model.sigma_k.as_slice());
    let scores = training
        .iter()
        .map(|(u, y)| t2_score(model, &residual(model, u, y)?))
        .collect::<slicewatch::error::Result<Vec<_>>>()?;
    let threshold = quantile(&scores, 0.99).unwrap();
    println!("control limit from the 0.99 in-sample quantile: {threshold:.2}");

    let mut alarms = [0usize; 2];
    for t in 200..600 {
        let broken = (400..440).contains(&t);
        let (u, y) = pair(&mut rng, broken);
        let v = det.step(t, &[(&u, &y)], threshold)?;
        if v.is_anomalous {
            alarms[broken as usize] += 1;
        }
    }
    println!("alarms on healthy steps: {} of 360", alarms[0]);
    println!("alarms while degraded:   {} of 40", alarms[1]);
    Ok(())
}
