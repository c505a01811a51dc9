//! Experiment configuration: TOML file plus `key=value` overrides, keyed by dotted names.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ocsvm_admm::DualForm;
use crate::slicing_sim::ScenarioConfig;

/// Named seeds. Monte Carlo run `r` adds `r` to each of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Seeds {
    pub network: u64,
    pub embedding: u64,
    pub anomalies: u64,
    pub noise: u64,
    pub rff: u64,
    pub artd: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self { network: 1, embedding: 2, anomalies: 3, noise: 4, rff: 5, artd: 6 }
    }
}

impl Seeds {
    pub fn for_run(&self, run: usize) -> Self {
        let r = run as u64;
        Self {
            network: self.network.wrapping_add(r),
            embedding: self.embedding.wrapping_add(r),
            anomalies: self.anomalies.wrapping_add(r),
            noise: self.noise.wrapping_add(r),
            rff: self.rff.wrapping_add(r),
            artd: self.artd.wrapping_add(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OcsvmConfig {
    pub eta: f64,
    pub penalty: f64,
    pub kernel_width: f64,
    pub feature_dim: usize,
    pub dual: DualForm,
}

impl Default for OcsvmConfig {
    fn default() -> Self {
        Self { eta: 600.0, penalty: 4.0, kernel_width: 35.0, feature_dim: 100, dual: DualForm::Exact }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// The q-quantile of in-sample T² over the training window.
    #[default]
    Quantile,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CcaConfig {
    pub init_samples: usize,
    pub threshold_mode: ThresholdMode,
    pub threshold: f64,
    pub quantile: f64,
    pub floor: f64,
}

impl Default for CcaConfig {
    fn default() -> Self {
        Self { init_samples: 10, threshold_mode: ThresholdMode::Quantile, threshold: 1.0, quantile: 0.99, floor: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricMode {
    #[default]
    Cumulative,
    Windowed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    pub num_runs: usize,
    pub training_steps: usize,
    pub artd: f64,
    pub metric_mode: MetricMode,
    pub metric_window: usize,
    pub series_stride: usize,
    /// `-1` picks the PN hosting the most VNs.
    pub convergence_pn: i64,
    pub convergence_components: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            num_runs: 20,
            training_steps: 200,
            artd: 0.1,
            metric_mode: MetricMode::Cumulative,
            metric_window: 100,
            series_stride: 10,
            convergence_pn: -1,
            convergence_components: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    #[serde(flatten)]
    pub scenario: ScenarioConfig,
    pub seeds: Seeds,
    pub ocsvm: OcsvmConfig,
    pub cca: CcaConfig,
    pub harness: HarnessConfig,
}

/// Every accepted key with a one-line description.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("num_pns", "physical nodes in the substrate"),
    ("link_probability", "Erdos-Renyi edge probability"),
    ("num_sfcs", "service function chains to embed"),
    ("chain_min", "shortest chain, in VNs"),
    ("chain_max", "longest chain, in VNs"),
    ("service_mix", "weights of the three service types"),
    ("placement", "walk | uniform"),
    ("horizon", "simulated steps per run"),
    ("anomaly_rate", "per-step start probability of an anomaly window"),
    ("anomaly_start", "first step an anomaly may start"),
    ("anomaly_mean_duration", "mean window length in steps"),
    ("anomaly_targets", "auto | pn | pl | both"),
    ("loss_mean", "mean capacity-loss fraction"),
    ("loss_var", "variance of the capacity-loss fraction"),
    ("noise_sigma", "multiplicative observation noise"),
    ("load_jitter", "half-width of the per-step load factor"),
    ("node_headroom", "[min, max] VN reservation over nominal rate"),
    ("link_headroom", "[min, max] VL reservation over nominal rate"),
    ("node_capacity", "[min, max] PN capacity, kbit/s"),
    ("link_bandwidth", "[min, max] PL bandwidth, kbit/s"),
    ("seeds.network", "substrate graph seed"),
    ("seeds.embedding", "SFC placement seed"),
    ("seeds.anomalies", "anomaly schedule seed"),
    ("seeds.noise", "measurement noise seed"),
    ("seeds.rff", "random feature seed"),
    ("seeds.artd", "training pollution seed"),
    ("ocsvm.eta", "augmented Lagrangian parameter"),
    ("ocsvm.penalty", "slack penalty C"),
    ("ocsvm.kernel_width", "Gaussian kernel width"),
    ("ocsvm.feature_dim", "random feature dimension D"),
    ("ocsvm.dual", "exact | half-vertex"),
    ("cca.init_samples", "samples used to initialize each tracker"),
    ("cca.threshold_mode", "quantile | fixed"),
    ("cca.threshold", "fixed T² control limit"),
    ("cca.quantile", "quantile for the calibrated control limit"),
    ("cca.floor", "eigenvalue and variance floor"),
    ("harness.num_runs", "Monte Carlo runs"),
    ("harness.training_steps", "unscored training window"),
    ("harness.artd", "anomaly ratio in baseline training data"),
    ("harness.metric_mode", "cumulative | windowed"),
    ("harness.metric_window", "window length for windowed metrics"),
    ("harness.series_stride", "steps between metric series points"),
    ("harness.convergence_pn", "PN traced in the convergence series, -1 for auto"),
    ("harness.convergence_components", "w components traced"),
];

pub fn is_known_key(key: &str) -> bool {
    CONFIG_KEYS.iter().any(|(k, _)| *k == key)
}

/// Dotted paths of all leaf values, arrays counted as leaves.
pub fn leaf_keys(table: &toml::Table) -> BTreeSet<String> {
    fn walk(prefix: &str, t: &toml::Table, out: &mut BTreeSet<String>) {
        for (k, v) in t {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match v {
                toml::Value::Table(inner) => walk(&key, inner, out),
                _ => {
                    out.insert(key);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    walk("", table, &mut out);
    out
}

fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key just written"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("split yields one part");
    let mut cur = table;
    for p in parts {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| Error::ConfigParse(format!("`{p}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl Config {
    /// Parses TOML text, applies `key=value` overrides, and validates the result.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        if let Some(bad) = leaf_keys(&table).into_iter().find(|k| !is_known_key(k)) {
            return Err(Error::ConfigParse(format!("unknown key `{bad}` in config file")));
        }
        for ov in overrides {
            let (key, raw) =
                ov.split_once('=').ok_or_else(|| Error::ConfigParse(format!("override `{ov}` is not key=value")))?;
            let key = key.trim();
            if !is_known_key(key) {
                return Err(Error::UnknownKey(key.to_string()));
            }
            set_path(&mut table, key, parse_value(raw.trim()))?;
        }
        let cfg: Config =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
            None => String::new(),
        };
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        let h = &self.harness;
        if h.num_runs < 1 {
            return Err(Error::InvalidConfig("harness.num_runs must be at least 1".into()));
        }
        if h.training_steps >= self.scenario.horizon {
            return Err(Error::InvalidConfig(format!(
                "harness.training_steps ({}) must be below horizon ({})",
                h.training_steps, self.scenario.horizon
            )));
        }
        if !(0.0..=1.0).contains(&h.artd) {
            return Err(Error::InvalidConfig("harness.artd must lie in [0, 1]".into()));
        }
        if h.series_stride < 1 || h.metric_window < 1 {
            return Err(Error::InvalidConfig("harness.series_stride and metric_window must be positive".into()));
        }
        let c = &self.cca;
        if c.init_samples < 2 || c.init_samples > h.training_steps {
            return Err(Error::InvalidConfig(format!(
                "cca.init_samples must lie in [2, training_steps], got {}",
                c.init_samples
            )));
        }
        if !(c.quantile > 0.0 && c.quantile <= 1.0) || !(c.floor > 0.0) {
            return Err(Error::InvalidConfig("cca.quantile must lie in (0, 1] and cca.floor be positive".into()));
        }
        let o = &self.ocsvm;
        if !(o.eta > 0.0 && o.penalty > 0.0 && o.kernel_width > 0.0) || o.feature_dim < 1 {
            return Err(Error::InvalidConfig(
                "ocsvm.eta, penalty, kernel_width and feature_dim must be positive".into(),
            ));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_keys_are_exactly_the_config_fields() {
        let table: toml::Table = toml::from_str(&Config::default().to_toml()).unwrap();
        let fields = leaf_keys(&table);
        let documented: BTreeSet<String> = CONFIG_KEYS.iter().map(|(k, _)| k.to_string()).collect();
        assert_eq!(fields, documented);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = Config::default();
        assert_eq!(Config::from_toml_str(&cfg.to_toml(), &[]).unwrap(), cfg);
    }

    #[test]
    fn every_key_overridable() {
        let table: toml::Table = toml::from_str(&Config::default().to_toml()).unwrap();
        for (key, _) in CONFIG_KEYS {
            let mut cur = &table;
            let parts: Vec<&str> = key.split('.').collect();
            for p in &parts[..parts.len() - 1] {
                cur = cur[*p].as_table().unwrap();
            }
            let raw = cur[*parts.last().unwrap()].to_string();
            Config::from_toml_str("", &[format!("{key}={raw}")]).unwrap();
        }
    }

    #[test]
    fn overrides_apply() {
        let cfg = Config::from_toml_str(
            "horizon = 900\n[seeds]\nnoise = 77\n",
            &["ocsvm.eta=12.5".into(), "service_mix=[1, 0, 2]".into(), "anomaly_targets=pl".into()],
        )
        .unwrap();
        assert_eq!(cfg.scenario.horizon, 900);
        assert_eq!(cfg.seeds.noise, 77);
        assert_eq!(cfg.seeds.network, 1);
        assert_eq!(cfg.ocsvm.eta, 12.5);
        assert_eq!(cfg.scenario.service_mix, vec![1.0, 0.0, 2.0]);
        assert_eq!(cfg.scenario.anomaly_targets, crate::slicing_sim::AnomalyTargets::Pl);
    }

    #[test]
    fn error_categories() {
        assert!(matches!(Config::from_toml_str("", &["nope=1".into()]), Err(Error::UnknownKey(k)) if k == "nope"));
        assert!(matches!(Config::from_toml_str("horizon = ", &[]), Err(Error::ConfigParse(_))));
        assert!(matches!(Config::from_toml_str("bogus = 1", &[]), Err(Error::ConfigParse(_))));
        assert!(matches!(Config::from_toml_str("horizon = \"x\"", &[]), Err(Error::ConfigParse(_))));
        assert!(matches!(Config::from_toml_str("", &["harness.num_runs=0".into()]), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = Config::default();
        let mut b = Config::default();
        assert_eq!(a.hash(), b.hash());
        b.seeds.noise += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
