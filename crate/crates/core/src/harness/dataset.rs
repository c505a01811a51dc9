//! Time-aligned view of per-VN measurements, shared by simulated and ingested traces.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::slicing_sim::{PlId, ScenarioTrace, SfcEmbedding, VnInfo, FEATURE_NAMES};

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualLink {
    pub sfc_id: usize,
    /// Index into `Dataset::vns`.
    pub up: usize,
    pub down: usize,
    pub pls: Vec<PlId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub vns: Vec<VnInfo>,
    pub links: Vec<VirtualLink>,
    pub times: Vec<i64>,
    /// `[step][vn][feature]`
    pub features: Vec<Vec<Vec<f64>>>,
    pub pn_labels: Option<Vec<BTreeSet<usize>>>,
    pub pl_labels: Option<Vec<BTreeSet<PlId>>>,
}

/// One VN's samples as read from a measurement file.
#[derive(Debug, Clone, PartialEq)]
pub struct VnStream {
    pub slice_id: usize,
    pub sfc_id: usize,
    pub vn_id: usize,
    pub pn_id: usize,
    pub times: Vec<i64>,
    pub features: Vec<Vec<f64>>,
    pub labels: Option<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementStreams {
    pub feature_names: Vec<String>,
    /// Sorted by `vn_id`.
    pub streams: Vec<VnStream>,
}

impl MeasurementStreams {
    pub fn total_entries(&self) -> usize {
        self.streams.iter().map(|s| s.times.len()).sum()
    }
}

impl Dataset {
    pub fn from_trace(trace: &ScenarioTrace, embeddings: &[SfcEmbedding]) -> Self {
        let mut links = Vec::new();
        for s in embeddings {
            for k in 0..s.vl_to_path.len() {
                links.push(VirtualLink {
                    sfc_id: s.sfc_id,
                    up: s.vn_chain[k],
                    down: s.vn_chain[k + 1],
                    pls: s.vl_links(k).collect(),
                });
            }
        }
        Self {
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            vns: trace.vns.clone(),
            links,
            times: trace.rows.iter().map(|r| r.time as i64).collect(),
            features: trace.rows.iter().map(|r| r.features.iter().map(|f| f.to_vec()).collect()).collect(),
            pn_labels: Some(trace.rows.iter().map(|r| r.anomalous_pns.clone()).collect()),
            pl_labels: Some(trace.rows.iter().map(|r| r.anomalous_pls.clone()).collect()),
        }
    }

    /// Every VN must have a sample at every time present in the file. Consecutive VNs of
    /// an SFC (by `vn_id`) on different PNs are taken to be joined by the direct PL.
    pub fn from_streams(ms: &MeasurementStreams) -> Result<Self> {
        let times: Vec<i64> =
            ms.streams.iter().flat_map(|s| s.times.iter().copied()).collect::<BTreeSet<_>>().into_iter().collect();
        for s in &ms.streams {
            if s.times != times {
                return Err(Error::InvalidParameter(format!(
                    "vn {} has {} samples but the file spans {} time steps",
                    s.vn_id,
                    s.times.len(),
                    times.len()
                )));
            }
        }
        let mut by_sfc: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, s) in ms.streams.iter().enumerate() {
            by_sfc.entry(s.sfc_id).or_default().push(i);
        }
        let mut position = vec![0; ms.streams.len()];
        let mut links = Vec::new();
        for (&sfc_id, members) in &by_sfc {
            for (k, &i) in members.iter().enumerate() {
                position[i] = k;
            }
            for w in members.windows(2) {
                let (a, b) = (&ms.streams[w[0]], &ms.streams[w[1]]);
                let pls = if a.pn_id == b.pn_id { vec![] } else { vec![PlId::new(a.pn_id, b.pn_id)] };
                links.push(VirtualLink { sfc_id, up: w[0], down: w[1], pls });
            }
        }
        let vns = ms
            .streams
            .iter()
            .enumerate()
            .map(|(i, s)| VnInfo {
                vn_id: s.vn_id,
                sfc_id: s.sfc_id,
                slice_id: s.slice_id,
                pn_id: s.pn_id,
                position: position[i],
            })
            .collect();
        let features = (0..times.len()).map(|t| ms.streams.iter().map(|s| s.features[t].clone()).collect()).collect();
        let pn_labels = ms.streams.iter().any(|s| s.labels.is_some()).then(|| {
            (0..times.len())
                .map(|t| {
                    ms.streams.iter().filter(|s| s.labels.as_ref().is_some_and(|l| l[t])).map(|s| s.pn_id).collect()
                })
                .collect()
        });
        Ok(Self { feature_names: ms.feature_names.clone(), vns, links, times, features, pn_labels, pl_labels: None })
    }

    pub fn to_streams(&self) -> MeasurementStreams {
        let mut streams: Vec<VnStream> = self
            .vns
            .iter()
            .enumerate()
            .map(|(i, v)| VnStream {
                slice_id: v.slice_id,
                sfc_id: v.sfc_id,
                vn_id: v.vn_id,
                pn_id: v.pn_id,
                times: self.times.clone(),
                features: self.features.iter().map(|row| row[i].clone()).collect(),
                labels: None,
            })
            .collect();
        streams.sort_by_key(|s| s.vn_id);
        MeasurementStreams { feature_names: self.feature_names.clone(), streams }
    }

    pub fn num_steps(&self) -> usize {
        self.times.len()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    /// VN indices hosted by each PN.
    pub fn pn_groups(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, v) in self.vns.iter().enumerate() {
            out.entry(v.pn_id).or_default().push(i);
        }
        out
    }

    /// VL indices whose path crosses each PL.
    pub fn pl_groups(&self) -> BTreeMap<PlId, Vec<usize>> {
        let mut out: BTreeMap<PlId, Vec<usize>> = BTreeMap::new();
        for (k, l) in self.links.iter().enumerate() {
            for &pl in &l.pls {
                out.entry(pl).or_default().push(k);
            }
        }
        out
    }
}

/// Per-VN, per-feature standardization: log when the training values are all positive,
/// then median and MAD.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    /// `[vn][feature] = (log, center, scale)`
    pub params: Vec<Vec<(bool, f64, f64)>>,
}

const MAD_TO_SD: f64 = 1.4826;

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

impl FeatureScaler {
    pub fn fit(ds: &Dataset, until: usize) -> Result<Self> {
        let until = until.min(ds.num_steps());
        if until < 2 {
            return Err(Error::TooFewSamples { need: 2, got: until });
        }
        let params = (0..ds.vns.len())
            .map(|v| {
                (0..ds.num_features())
                    .map(|f| {
                        let raw: Vec<f64> = ds.features[..until].iter().map(|row| row[v][f]).collect();
                        let log = raw.iter().all(|&x| x > 0.0);
                        let mut xs: Vec<f64> = if log { raw.iter().map(|x| x.ln()).collect() } else { raw };
                        let center = median(&mut xs);
                        let mut dev: Vec<f64> = xs.iter().map(|x| (x - center).abs()).collect();
                        let mut scale = MAD_TO_SD * median(&mut dev);
                        if !(scale > 1e-12) {
                            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                            scale = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
                        }
                        if !(scale > 1e-12) {
                            scale = 1.0;
                        }
                        (log, center, scale)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { params })
    }

    pub fn apply(&self, vn: usize, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.params[vn])
            .map(|(&v, &(log, c, s))| {
                let v = if log { v.max(f64::MIN_POSITIVE).ln() } else { v };
                (v - c) / s
            })
            .collect()
    }

    /// `[step][vn]` scaled copies of the whole dataset.
    pub fn transform(&self, ds: &Dataset) -> Vec<Vec<Vec<f64>>> {
        ds.features.iter().map(|row| row.iter().enumerate().map(|(v, x)| self.apply(v, x)).collect()).collect()
    }
}
