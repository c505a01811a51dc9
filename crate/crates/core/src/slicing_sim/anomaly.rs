use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Normal};
use serde::{Deserialize, Serialize};

use super::network::PlId;
use crate::error::{Error, Result};

pub const LOSS_MIN: f64 = 1e-3;
pub const LOSS_MAX: f64 = 1.0 - 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Target {
    Pn(usize),
    Pl(PlId),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Pn(q) => write!(f, "pn{q}"),
            Target::Pl(r) => write!(f, "pl{r}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyEvent {
    pub target: Target,
    pub start: usize,
    /// exclusive
    pub end: usize,
    pub loss_fraction: f64,
}

impl AnomalyEvent {
    pub fn covers(&self, t: usize) -> bool {
        self.start <= t && t < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnomalySchedule {
    pub events: Vec<AnomalyEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyParams {
    pub rate: f64,
    pub start: usize,
    pub mean_duration: f64,
    pub loss_mean: f64,
    pub loss_var: f64,
}

impl Default for AnomalyParams {
    fn default() -> Self {
        Self { rate: 0.005, start: 200, mean_duration: 20.0, loss_mean: 0.5, loss_var: 0.01 }
    }
}

impl AnomalyParams {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(Error::InvalidConfig(format!("anomaly_rate must lie in [0, 1], got {}", self.rate)));
        }
        if !(self.mean_duration >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "anomaly_mean_duration must be at least 1, got {}",
                self.mean_duration
            )));
        }
        if !(self.loss_var >= 0.0) || !self.loss_mean.is_finite() {
            return Err(Error::InvalidConfig("loss_var must be non-negative and loss_mean finite".into()));
        }
        Ok(())
    }
}

/// Loss fraction drawn from N(mean, var), clamped into (0, 1).
pub fn draw_loss<R: Rng>(rng: &mut R, mean: f64, var: f64) -> f64 {
    let normal = Normal::new(mean, var.sqrt()).expect("validated variance");
    normal.sample(rng).clamp(LOSS_MIN, LOSS_MAX)
}

fn target_stream(index: usize) -> u64 {
    index as u64
}

/// Independent windows per target. Every target draws from its own stream, so enabling
/// link anomalies does not move the node anomalies.
pub fn schedule_anomalies(
    horizon: usize,
    targets: &[Target],
    params: &AnomalyParams,
    seed: u64,
) -> Result<AnomalySchedule> {
    if horizon < 1 {
        return Err(Error::InvalidConfig("horizon must be at least 1".into()));
    }
    params.validate()?;
    let mut events = Vec::new();
    if params.rate == 0.0 {
        return Ok(AnomalySchedule { events });
    }
    let geo = Geometric::new(1.0 / params.mean_duration).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    for (k, &target) in targets.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(target_stream(k));
        let mut t = params.start;
        while t < horizon {
            if rng.random::<f64>() < params.rate {
                let len = 1 + geo.sample(&mut rng) as usize;
                let loss_fraction = draw_loss(&mut rng, params.loss_mean, params.loss_var);
                let end = (t + len).min(horizon);
                events.push(AnomalyEvent { target, start: t, end, loss_fraction });
                t = end;
            } else {
                t += 1;
            }
        }
    }
    events.sort_by(|a, b| (a.target, a.start).cmp(&(b.target, b.start)));
    Ok(AnomalySchedule { events })
}

impl AnomalySchedule {
    pub fn is_active(&self, target: Target, t: usize) -> bool {
        self.events.iter().any(|e| e.target == target && e.covers(t))
    }

    pub fn loss_at(&self, target: Target, t: usize) -> f64 {
        self.events.iter().find(|e| e.target == target && e.covers(t)).map_or(0.0, |e| e.loss_fraction)
    }

    /// Adds one-step events on `[0, until)` with probability `ratio` per target and step,
    /// skipping steps already covered.
    pub fn polluted(
        &self,
        targets: &[Target],
        ratio: f64,
        until: usize,
        loss_mean: f64,
        loss_var: f64,
        seed: u64,
    ) -> Self {
        let mut events = self.events.clone();
        if ratio > 0.0 {
            for (k, &target) in targets.iter().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(target_stream(k));
                for t in 0..until {
                    let hit = rng.random::<f64>() < ratio;
                    let loss_fraction = draw_loss(&mut rng, loss_mean, loss_var);
                    if hit && !self.is_active(target, t) {
                        events.push(AnomalyEvent { target, start: t, end: t + 1, loss_fraction });
                    }
                }
            }
        }
        events.sort_by(|a, b| (a.target, a.start).cmp(&(b.target, b.start)));
        Self { events }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn targets() -> Vec<Target> {
        (0..10).map(Target::Pn).chain([Target::Pl(PlId(0, 1)), Target::Pl(PlId(2, 5))]).collect()
    }

    #[test]
    fn zero_rate_is_empty() {
        let p = AnomalyParams { rate: 0.0, ..AnomalyParams::default() };
        assert!(schedule_anomalies(1000, &targets(), &p, 1).unwrap().events.is_empty());
    }

    #[test]
    fn deterministic_and_within_horizon() {
        let p = AnomalyParams { rate: 0.02, start: 0, ..AnomalyParams::default() };
        let a = schedule_anomalies(500, &targets(), &p, 4).unwrap();
        assert_eq!(a, schedule_anomalies(500, &targets(), &p, 4).unwrap());
        assert!(!a.events.is_empty());
        for e in &a.events {
            assert!(e.start < e.end && e.end <= 500);
            assert!(e.loss_fraction > 0.0 && e.loss_fraction < 1.0);
        }
        for w in a.events.windows(2) {
            if w[0].target == w[1].target {
                assert!(w[0].end <= w[1].start);
            }
        }
    }

    #[test]
    fn starts_after_training() {
        let p = AnomalyParams { rate: 0.5, ..AnomalyParams::default() };
        let s = schedule_anomalies(400, &targets(), &p, 2).unwrap();
        assert!(s.events.iter().all(|e| e.start >= 200));
    }

    #[test]
    fn node_events_ignore_link_targets() {
        let p = AnomalyParams { rate: 0.05, ..AnomalyParams::default() };
        let pns: Vec<Target> = (0..10).map(Target::Pn).collect();
        let only = schedule_anomalies(800, &pns, &p, 3).unwrap();
        let both = schedule_anomalies(800, &targets(), &p, 3).unwrap();
        let filtered: Vec<_> = both.events.into_iter().filter(|e| matches!(e.target, Target::Pn(_))).collect();
        assert_eq!(only.events, filtered);
    }

    #[test]
    fn loss_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let xs: Vec<f64> = (0..10_000).map(|_| draw_loss(&mut rng, 0.5, 0.01)).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((mean - 0.51).abs() <= 0.02, "mean {mean}");
        assert!((var - 0.01).abs() <= 0.003, "var {var}");
    }

    #[test]
    fn pollution_rate() {
        let base = AnomalySchedule::default();
        let t: Vec<Target> = (0..10).map(Target::Pn).collect();
        let p = base.polluted(&t, 0.1, 200, 0.5, 0.01, 7);
        let frac = p.events.len() as f64 / 2000.0;
        assert!((frac - 0.1).abs() < 0.02, "{frac}");
        assert!(p.events.iter().all(|e| e.end == e.start + 1 && e.end <= 200));
    }
}
