//! Runs the per-PN and per-PL detectors over a dataset and collects per-step alarms.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, FeatureScaler};
use super::metrics::ConfusionMatrix;
use crate::cca_online::{fit_cca, residual, t2_score, CovarianceTracker, PlDetector};
use crate::config::{Config, ThresholdMode};
use crate::error::{Error, Result};
use crate::ocsvm_admm::{consensus_gap, PnDetector, PnDetectorConfig};
use crate::rff::RffParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PnOcsvm,
    PlCca,
}

/// `Baseline` is one OCSVM agent per PN on the concatenated VN vector, or CCA without rollback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Distributed,
    Baseline,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::PnOcsvm => "pn-ocsvm",
            Mode::PlCca => "pl-cca",
        })
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Distributed => "distributed",
            Variant::Baseline => "baseline",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetAlarms {
    /// `pn3` or `pl0-1`.
    pub name: String,
    /// One entry per dataset step. Steps before `Detection::scored_from` are never scored.
    pub alarms: Vec<bool>,
    pub labels: Option<Vec<bool>>,
}

impl TargetAlarms {
    pub fn confusion(&self, from: usize, to: usize) -> Option<ConfusionMatrix> {
        let labels = self.labels.as_ref()?;
        let mut cm = ConfusionMatrix::default();
        for t in from..to.min(self.alarms.len()) {
            cm.score(self.alarms[t], labels[t]);
        }
        Some(cm)
    }
}

/// Agent 0 of the designated PN, one entry per step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTrace {
    pub pn: usize,
    pub gap: Vec<f64>,
    pub rho: Vec<f64>,
    /// `[step][component]`
    pub w: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub scored_from: usize,
    pub targets: Vec<TargetAlarms>,
    pub convergence: Option<ConvergenceTrace>,
}

impl Detection {
    pub fn num_steps(&self) -> usize {
        self.targets.first().map_or(0, |t| t.alarms.len())
    }

    /// Pooled over targets, one matrix per step from `scored_from`. `None` without labels.
    pub fn per_step_confusion(&self) -> Option<Vec<ConfusionMatrix>> {
        let mut out = vec![ConfusionMatrix::default(); self.num_steps().saturating_sub(self.scored_from)];
        for tg in &self.targets {
            let labels = tg.labels.as_ref()?;
            for (k, cm) in out.iter_mut().enumerate() {
                let t = self.scored_from + k;
                cm.score(tg.alarms[t], labels[t]);
            }
        }
        Some(out)
    }
}

/// Type-7 (linear interpolation) sample quantile.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let h = (xs.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(xs.len() - 1);
    Some(xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo]))
}

fn training_window(ds: &Dataset, cfg: &Config) -> Result<usize> {
    let w = cfg.harness.training_steps;
    if ds.num_steps() <= w {
        return Err(Error::TooFewSamples { need: w + 1, got: ds.num_steps() });
    }
    Ok(w)
}

/// `convergence_pn < 0` selects the PN with the most VNs, lowest id first.
fn designated_pn(ds: &Dataset, cfg: &Config) -> Option<usize> {
    let groups = ds.pn_groups();
    if cfg.harness.convergence_pn >= 0 {
        let q = cfg.harness.convergence_pn as usize;
        return groups.contains_key(&q).then_some(q);
    }
    let mut best: Option<(usize, usize)> = None;
    for (&q, members) in &groups {
        if best.is_none_or(|(_, n)| members.len() > n) {
            best = Some((q, members.len()));
        }
    }
    best.map(|(q, _)| q)
}

pub fn detect_pn(ds: &Dataset, cfg: &Config, variant: Variant) -> Result<Detection> {
    let w = training_window(ds, cfg)?;
    let x = FeatureScaler::fit(ds, w)?.transform(ds);
    let oc = &cfg.ocsvm;
    let p = ds.num_features();
    let shared = Arc::new(RffParams::sample(p, oc.feature_dim, oc.kernel_width, cfg.seeds.rff)?);
    let designated = designated_pn(ds, cfg);
    let groups: Vec<(usize, Vec<usize>)> = ds.pn_groups().into_iter().collect();

    let results: Vec<Result<(TargetAlarms, Option<ConvergenceTrace>)>> = groups
        .par_iter()
        .map(|(q, members)| {
            let (agents, rff, rollback) = match variant {
                Variant::Distributed => (members.len(), shared.clone(), true),
                Variant::Baseline => (
                    1,
                    Arc::new(RffParams::sample(p * members.len(), oc.feature_dim, oc.kernel_width, cfg.seeds.rff)?),
                    false,
                ),
            };
            let mut pc = PnDetectorConfig::new(oc.eta, oc.penalty, agents, rff)?;
            pc.dual = oc.dual;
            pc.rollback = rollback;
            let mut det = PnDetector::new(pc)?;
            let track = designated == Some(*q);
            let mut conv = track.then(|| ConvergenceTrace { pn: *q, ..Default::default() });
            let k = cfg.harness.convergence_components.min(oc.feature_dim);
            let mut alarms = Vec::with_capacity(ds.num_steps());
            let mut joined = Vec::new();
            for (t, row) in x.iter().enumerate() {
                let verdict = match variant {
                    Variant::Distributed => {
                        let samples: Vec<&[f64]> = members.iter().map(|&v| row[v].as_slice()).collect();
                        det.step(t, &samples)?
                    }
                    Variant::Baseline => {
                        joined.clear();
                        for &v in members {
                            joined.extend_from_slice(&row[v]);
                        }
                        det.step(t, &[joined.as_slice()])?
                    }
                };
                alarms.push(verdict.is_anomalous);
                if let Some(c) = conv.as_mut() {
                    let a0 = &det.agents[0];
                    c.gap.push(consensus_gap(&det.agents));
                    c.rho.push(a0.rho);
                    c.w.push(a0.w.iter().take(k).copied().collect());
                }
            }
            let labels = ds.pn_labels.as_ref().map(|l| l.iter().map(|s| s.contains(q)).collect());
            Ok((TargetAlarms { name: format!("pn{q}"), alarms, labels }, conv))
        })
        .collect();

    let mut targets = Vec::with_capacity(results.len());
    let mut convergence = None;
    for r in results {
        let (t, c) = r?;
        targets.push(t);
        convergence = convergence.or(c);
    }
    Ok(Detection { scored_from: w, targets, convergence })
}

pub fn detect_pl(ds: &Dataset, cfg: &Config, variant: Variant) -> Result<Detection> {
    let w = training_window(ds, cfg)?;
    let t0 = cfg.cca.init_samples;
    if t0 < 2 || t0 >= w {
        return Err(Error::InvalidConfig(format!("cca.init_samples must lie in [2, {w})")));
    }
    let x = FeatureScaler::fit(ds, w)?.transform(ds);
    let groups: Vec<_> = ds.pl_groups().into_iter().collect();
    let pair = |t: usize, k: usize| -> (&[f64], &[f64]) {
        let l = &ds.links[k];
        (x[t][l.up].as_slice(), x[t][l.down].as_slice())
    };

    let targets: Result<Vec<TargetAlarms>> = groups
        .par_iter()
        .map(|(pl, vls)| {
            let trackers = vls
                .iter()
                .map(|&k| {
                    let (u, y): (Vec<&[f64]>, Vec<&[f64]>) = (0..t0).map(|t| pair(t, k)).unzip();
                    CovarianceTracker::init(&u, &y)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut det = PlDetector::new(trackers);
            det.floor = cfg.cca.floor;
            det.rollback = variant == Variant::Distributed;
            for t in t0..w {
                let pairs: Vec<_> = vls.iter().map(|&k| pair(t, k)).collect();
                det.absorb(&pairs)?;
            }
            let threshold = match cfg.cca.threshold_mode {
                ThresholdMode::Fixed => cfg.cca.threshold,
                ThresholdMode::Quantile => {
                    let mut scores = Vec::with_capacity(vls.len() * (w - t0));
                    for (tr, &k) in det.trackers.iter().zip(vls) {
                        let model = fit_cca(tr, det.floor)?;
                        for t in t0..w {
                            let (u, y) = pair(t, k);
                            scores.push(t2_score(&model, &residual(&model, u, y)?)?);
                        }
                    }
                    quantile(&scores, cfg.cca.quantile).unwrap_or(cfg.cca.threshold)
                }
            };
            let mut alarms = vec![false; w];
            for t in w..ds.num_steps() {
                let pairs: Vec<_> = vls.iter().map(|&k| pair(t, k)).collect();
                alarms.push(det.step(t, &pairs, threshold)?.is_anomalous);
            }
            let labels = ds.pl_labels.as_ref().map(|l| l.iter().map(|s| s.contains(pl)).collect());
            Ok(TargetAlarms { name: format!("pl{pl}"), alarms, labels })
        })
        .collect();
    Ok(Detection { scored_from: w, targets: targets?, convergence: None })
}

pub fn detect(ds: &Dataset, cfg: &Config, mode: Mode, variant: Variant) -> Result<Detection> {
    match mode {
        Mode::PnOcsvm => detect_pn(ds, cfg, variant),
        Mode::PlCca => detect_pl(ds, cfg, variant),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slicing_sim::{AnomalyTargets, Scenario};

    fn dataset(cfg: &Config, targets: AnomalyTargets) -> Dataset {
        let sc = Scenario::build(&cfg.scenario, &cfg.seeds, targets).unwrap();
        Dataset::from_trace(&sc.trace(), &sc.embeddings)
    }

    fn small() -> Config {
        let mut cfg = Config::default();
        cfg.scenario.horizon = 500;
        cfg
    }

    #[test]
    fn type7_quantile() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0, 4.0], 0.5), Some(2.5));
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.9), Some(4.6));
        assert_eq!(quantile(&[7.0], 0.99), Some(7.0));
        assert_eq!(quantile(&[], 0.5), None);
    }

    #[test]
    fn pn_detection_shapes_and_conservation() {
        let cfg = small();
        let ds = dataset(&cfg, AnomalyTargets::Pn);
        for variant in [Variant::Distributed, Variant::Baseline] {
            let d = detect_pn(&ds, &cfg, variant).unwrap();
            assert_eq!(d.targets.len(), ds.pn_groups().len());
            assert!(d.targets.iter().all(|t| t.alarms.len() == 500));
            let per_step = d.per_step_confusion().unwrap();
            assert_eq!(per_step.len(), 300);
            let total: u64 = per_step.iter().map(|c| c.total()).sum();
            assert_eq!(total, 300 * d.targets.len() as u64);
            let conv = d.convergence.unwrap();
            assert_eq!(conv.gap.len(), 500);
            assert_eq!(conv.w[0].len(), cfg.harness.convergence_components);
        }
    }

    #[test]
    fn pl_detection_quiet_during_training() {
        let cfg = small();
        let ds = dataset(&cfg, AnomalyTargets::Pl);
        let d = detect_pl(&ds, &cfg, Variant::Distributed).unwrap();
        assert_eq!(d.targets.len(), ds.pl_groups().len());
        assert!(d.targets.iter().all(|t| t.alarms[..200].iter().all(|a| !a)));
        assert!(d.targets.iter().all(|t| t.name.starts_with("pl")));
    }

    #[test]
    fn too_short_trace_rejected() {
        let mut cfg = small();
        cfg.scenario.horizon = 150;
        let ds = dataset(&cfg, AnomalyTargets::Pn);
        assert!(matches!(detect_pn(&ds, &cfg, Variant::Distributed), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn labels_absent_means_no_confusion() {
        let cfg = small();
        let mut ds = dataset(&cfg, AnomalyTargets::Pn);
        ds.pn_labels = None;
        let d = detect_pn(&ds, &cfg, Variant::Distributed).unwrap();
        assert!(d.per_step_confusion().is_none());
    }
}
