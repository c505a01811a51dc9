//! Synthetic substrate network, embedded SFCs, injected capacity losses and the per-VN
//! measurements they produce.

pub mod anomaly;
pub mod embedding;
pub mod measure;
pub mod network;

use serde::{Deserialize, Serialize};

pub use anomaly::{schedule_anomalies, AnomalyEvent, AnomalyParams, AnomalySchedule, Target};
pub use embedding::{embed_sfcs, EmbedParams, Placement, SfcEmbedding, SERVICES};
pub use measure::{step_measurements, MeasureParams, ShareScales, TraceRow, FEATURE_NAMES, NUM_FEATURES};
pub use network::{build_network, CapacityRanges, PhysicalLink, PhysicalNode, PlId, SubstrateNetwork};

use crate::config::Seeds;
use crate::error::{Error, Result};

/// Which elements receive injected anomalies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnomalyTargets {
    /// Whatever the consumer monitors: PNs for node detection, PLs for link detection,
    /// both for a plain simulation.
    #[default]
    Auto,
    Pn,
    Pl,
    Both,
}

impl AnomalyTargets {
    pub fn resolve(self, auto: AnomalyTargets) -> AnomalyTargets {
        if self == AnomalyTargets::Auto {
            auto
        } else {
            self
        }
    }

    fn nodes(self) -> bool {
        matches!(self, AnomalyTargets::Pn | AnomalyTargets::Both)
    }

    fn links(self) -> bool {
        matches!(self, AnomalyTargets::Pl | AnomalyTargets::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub num_pns: usize,
    pub link_probability: f64,
    pub num_sfcs: usize,
    pub chain_min: usize,
    pub chain_max: usize,
    pub service_mix: Vec<f64>,
    pub placement: Placement,
    pub horizon: usize,
    pub anomaly_rate: f64,
    pub anomaly_start: usize,
    pub anomaly_mean_duration: f64,
    pub anomaly_targets: AnomalyTargets,
    pub loss_mean: f64,
    pub loss_var: f64,
    pub noise_sigma: f64,
    pub load_jitter: f64,
    pub node_headroom: [f64; 2],
    pub link_headroom: [f64; 2],
    pub node_capacity: [f64; 2],
    pub link_bandwidth: [f64; 2],
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let embed = EmbedParams::default();
        let anomalies = AnomalyParams::default();
        let caps = CapacityRanges::default();
        let measure = MeasureParams::default();
        Self {
            num_pns: 10,
            link_probability: 0.4,
            num_sfcs: embed.num_sfcs,
            chain_min: embed.chain_length.0,
            chain_max: embed.chain_length.1,
            service_mix: embed.service_mix,
            placement: embed.placement,
            horizon: 2000,
            anomaly_rate: anomalies.rate,
            anomaly_start: anomalies.start,
            anomaly_mean_duration: anomalies.mean_duration,
            anomaly_targets: AnomalyTargets::Auto,
            loss_mean: anomalies.loss_mean,
            loss_var: anomalies.loss_var,
            noise_sigma: measure.noise_sigma,
            load_jitter: measure.load_jitter,
            node_headroom: [embed.node_headroom.0, embed.node_headroom.1],
            link_headroom: [embed.link_headroom.0, embed.link_headroom.1],
            node_capacity: [caps.node.0, caps.node.1],
            link_bandwidth: [caps.link.0, caps.link.1],
        }
    }
}

impl ScenarioConfig {
    pub fn embed_params(&self) -> EmbedParams {
        EmbedParams {
            num_sfcs: self.num_sfcs,
            chain_length: (self.chain_min, self.chain_max),
            service_mix: self.service_mix.clone(),
            placement: self.placement,
            node_headroom: (self.node_headroom[0], self.node_headroom[1]),
            link_headroom: (self.link_headroom[0], self.link_headroom[1]),
        }
    }

    pub fn anomaly_params(&self) -> AnomalyParams {
        AnomalyParams {
            rate: self.anomaly_rate,
            start: self.anomaly_start,
            mean_duration: self.anomaly_mean_duration,
            loss_mean: self.loss_mean,
            loss_var: self.loss_var,
        }
    }

    pub fn measure_params(&self) -> MeasureParams {
        MeasureParams { noise_sigma: self.noise_sigma, load_jitter: self.load_jitter }
    }

    pub fn capacity_ranges(&self) -> CapacityRanges {
        CapacityRanges {
            node: (self.node_capacity[0], self.node_capacity[1]),
            link: (self.link_bandwidth[0], self.link_bandwidth[1]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if !(self.noise_sigma >= 0.0) || !(self.load_jitter >= 0.0 && self.load_jitter < 1.0) {
            return Err(Error::InvalidConfig("noise_sigma must be >= 0 and load_jitter in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VnInfo {
    pub vn_id: usize,
    pub sfc_id: usize,
    pub slice_id: usize,
    pub pn_id: usize,
    /// Position in the chain.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTrace {
    pub vns: Vec<VnInfo>,
    pub rows: Vec<TraceRow>,
}

/// Everything needed to regenerate any step of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: SubstrateNetwork,
    pub embeddings: Vec<SfcEmbedding>,
    pub schedule: AnomalySchedule,
    pub measure: MeasureParams,
    pub scales: ShareScales,
    pub noise_seed: u64,
    pub horizon: usize,
}

impl Scenario {
    pub fn build(cfg: &ScenarioConfig, seeds: &Seeds, targets: AnomalyTargets) -> Result<Self> {
        cfg.validate()?;
        let network = build_network(cfg.num_pns, cfg.link_probability, cfg.capacity_ranges(), seeds.network)?;
        let embeddings = embed_sfcs(&network, &cfg.embed_params(), seeds.embedding)?;
        let schedule = schedule_anomalies(
            cfg.horizon,
            &Self::targets_of(&network, targets.resolve(AnomalyTargets::Both)),
            &cfg.anomaly_params(),
            seeds.anomalies,
        )?;
        let scales = ShareScales::new(&network, &embeddings);
        Ok(Self {
            network,
            embeddings,
            schedule,
            measure: cfg.measure_params(),
            scales,
            noise_seed: seeds.noise,
            horizon: cfg.horizon,
        })
    }

    pub fn targets_of(network: &SubstrateNetwork, kinds: AnomalyTargets) -> Vec<Target> {
        let mut out = Vec::new();
        if kinds.nodes() {
            out.extend((0..network.num_pns()).map(Target::Pn));
        }
        if kinds.links() {
            out.extend(network.links.iter().map(|l| Target::Pl(l.id)));
        }
        out
    }

    pub fn vn_infos(&self) -> Vec<VnInfo> {
        let mut out = Vec::new();
        for s in &self.embeddings {
            for (position, (&vn_id, &pn_id)) in s.vn_chain.iter().zip(&s.vn_to_pn).enumerate() {
                out.push(VnInfo { vn_id, sfc_id: s.sfc_id, slice_id: s.service_type, pn_id, position });
            }
        }
        out
    }

    pub fn row(&self, t: usize) -> TraceRow {
        step_measurements(
            &self.network,
            &self.embeddings,
            &self.schedule,
            t,
            self.noise_seed,
            &self.measure,
            &self.scales,
        )
    }

    pub fn trace(&self) -> ScenarioTrace {
        ScenarioTrace { vns: self.vn_infos(), rows: (0..self.horizon).map(|t| self.row(t)).collect() }
    }

    /// Same run with another anomaly schedule; measurement noise is unchanged.
    pub fn with_schedule(&self, schedule: AnomalySchedule) -> Self {
        Self { schedule, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(rate: f64, targets: AnomalyTargets) -> Scenario {
        let cfg = ScenarioConfig { anomaly_rate: rate, horizon: 600, ..ScenarioConfig::default() };
        Scenario::build(&cfg, &Seeds::default(), targets).unwrap()
    }

    fn mean_sd(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v.sqrt())
    }

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let (ma, sa) = mean_sd(a);
        let (mb, sb) = mean_sd(b);
        a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / ((a.len() - 1) as f64 * sa * sb)
    }

    #[test]
    fn deterministic() {
        assert_eq!(scenario(0.01, AnomalyTargets::Both).trace(), scenario(0.01, AnomalyTargets::Both).trace());
    }

    #[test]
    fn stationary_without_anomalies() {
        let tr = scenario(0.0, AnomalyTargets::Both).trace();
        for vn in 0..tr.vns.len() {
            for f in 0..NUM_FEATURES {
                let a: Vec<f64> = tr.rows[100..200].iter().map(|r| r.features[vn][f]).collect();
                let b: Vec<f64> = tr.rows[200..300].iter().map(|r| r.features[vn][f]).collect();
                let (ma, sa) = mean_sd(&a);
                let (mb, sb) = mean_sd(&b);
                let se = ((sa * sa + sb * sb) / 100.0).sqrt();
                // 180 comparisons; allow the odd excursion past 3 standard errors but not 5
                assert!((ma - mb).abs() <= 5.0 * se, "vn {vn} feature {f}");
            }
        }
    }

    #[test]
    fn labels_match_schedule() {
        let sc = scenario(0.02, AnomalyTargets::Both);
        let tr = sc.trace();
        for row in &tr.rows {
            for q in 0..sc.network.num_pns() {
                assert_eq!(row.anomalous_pns.contains(&q), sc.schedule.is_active(Target::Pn(q), row.time));
            }
            for l in &sc.network.links {
                assert_eq!(row.anomalous_pls.contains(&l.id), sc.schedule.is_active(Target::Pl(l.id), row.time));
            }
        }
    }

    #[test]
    fn node_loss_halves_processing_rate() {
        let base = scenario(0.0, AnomalyTargets::Both);
        let q = base.embeddings[0].vn_to_pn[1];
        let event = AnomalyEvent { target: Target::Pn(q), start: 300, end: 400, loss_fraction: 0.5 };
        let hit = base.with_schedule(AnomalySchedule { events: vec![event] });
        let sigma = base.measure.noise_sigma;
        for info in base.vn_infos().iter().filter(|v| v.pn_id == q) {
            let rate =
                |s: &Scenario| mean_sd(&(300..400).map(|t| s.row(t).features[info.vn_id][0]).collect::<Vec<_>>()).0;
            let ratio = rate(&hit) / rate(&base);
            assert!((ratio - 0.5).abs() < 0.02, "ratio {ratio}");
            // separation: same noise draws, so the shift is measured against the noise scale
            let t = 350;
            let clean = base.row(t).features[info.vn_id];
            let faulty = hit.row(t).features[info.vn_id];
            let shifted = clean.iter().zip(faulty).any(|(a, b)| ((b - a) / a).abs() > 5.0 * sigma);
            assert!(shifted);
        }
    }

    #[test]
    fn link_loss_breaks_neighbor_correlation() {
        let base = scenario(0.0, AnomalyTargets::Both);
        let s = &base.embeddings[0];
        let link = s.vl_links(0).next().unwrap();
        let event = AnomalyEvent { target: Target::Pl(link), start: 300, end: 500, loss_fraction: 0.5 };
        let hit = base.with_schedule(AnomalySchedule { events: vec![event] });
        let (up, down) = (s.vn_chain[0], s.vn_chain[1]);
        let window = |sc: &Scenario, a: usize, b: usize| {
            let rows: Vec<TraceRow> = (a..b).map(|t| sc.row(t)).collect();
            let u: Vec<f64> = rows.iter().map(|r| r.features[up][1]).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.features[down][1]).collect();
            corr(&u, &y)
        };
        let normal = window(&hit, 100, 300);
        let faulty = window(&hit, 300, 500);
        assert!(faulty < normal - 0.2, "normal {normal} faulty {faulty}");
    }

    #[test]
    fn vn_table_consistent() {
        let sc = scenario(0.0, AnomalyTargets::Both);
        let infos = sc.vn_infos();
        assert_eq!(infos.iter().map(|v| v.vn_id).collect::<Vec<_>>(), (0..infos.len()).collect::<Vec<_>>());
        assert!(infos.iter().all(|v| (1..=3).contains(&v.slice_id)));
    }
}
