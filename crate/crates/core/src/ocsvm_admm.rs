//! Decentralized online one-class SVM with ADMM consensus across the VNs of one PN.
//!
//! Every agent owns `(w, rho)` plus multipliers `(alpha, beta, lambda)`. A step reads the
//! time-t snapshot of all agents, writes t+1 for all of them, then updates the
//! multipliers. If any agent's new discriminant is negative the whole step is discarded.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::rff::RffParams;

/// Updated discriminants above `-MARGIN_TOL` count as normal. With the exact dual an
/// interior lambda puts the sample on the margin, where the computed g is pure rounding.
pub const MARGIN_TOL: f64 = 1e-9;

/// Which closed form to maximize for lambda.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DualForm {
    /// `-1/2 [z'z/A + 1/(A-1)] lambda^2 + [z'l/A + (1-h)/(A-1)] lambda`, the dual of the
    /// online Lagrangian.
    #[default]
    Exact,
    /// Quadratic coefficient doubled, which halves the vertex.
    /// Every step with lambda > 0 then lands strictly inside the margin.
    HalfVertex,
}

#[derive(Debug, Clone)]
pub struct PnDetectorConfig {
    pub eta: f64,
    pub penalty: f64,
    pub num_agents: usize,
    pub rff: Arc<RffParams>,
    pub dual: DualForm,
    /// Discard anomalous updates. Disabled only for the no-rollback baseline.
    pub rollback: bool,
}

impl PnDetectorConfig {
    pub fn new(eta: f64, penalty: f64, num_agents: usize, rff: Arc<RffParams>) -> Result<Self> {
        let cfg = Self { eta, penalty, num_agents, rff, dual: DualForm::Exact, rollback: true };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_agents == 0 {
            return Err(Error::InvalidConfig("a PN detector needs at least one agent".into()));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidConfig(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.penalty > 0.0) || !self.penalty.is_finite() {
            return Err(Error::InvalidConfig(format!("penalty must be positive, got {}", self.penalty)));
        }
        Ok(())
    }

    /// `A = eta |J| + 1`
    pub fn a(&self) -> f64 {
        self.eta * self.num_agents as f64 + 1.0
    }

    pub fn lambda_max(&self) -> f64 {
        self.num_agents as f64 * self.penalty
    }

    pub fn dim(&self) -> usize {
        self.rff.dim_out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VnAgentState {
    pub w: DVector<f64>,
    pub rho: f64,
    pub alpha: DVector<f64>,
    pub beta: f64,
    pub lambda: f64,
}

impl VnAgentState {
    pub fn zeros(dim: usize) -> Self {
        Self { w: DVector::zeros(dim), rho: 0.0, alpha: DVector::zeros(dim), beta: 0.0, lambda: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PnVerdict {
    pub time: usize,
    pub per_agent_signs: Vec<i8>,
    pub is_anomalous: bool,
    /// Equal to `!is_anomalous` unless rollback is disabled.
    pub committed: bool,
}

pub fn init_pn_detector(config: &PnDetectorConfig) -> Result<Vec<VnAgentState>> {
    config.validate()?;
    Ok(vec![VnAgentState::zeros(config.dim()); config.num_agents])
}

/// `l_j = 2 alpha_j - eta/2 sum_i (w_j + w_i)` and `h_j`, the matching scalar.
fn consensus_terms(agent: &VnAgentState, neighbors: &[VnAgentState], config: &PnDetectorConfig) -> (DVector<f64>, f64) {
    let n = neighbors.len() as f64;
    let mut sum_w = agent.w.scale(n);
    let mut sum_rho = agent.rho * n;
    for nb in neighbors {
        sum_w += &nb.w;
        sum_rho += nb.rho;
    }
    let half = 0.5 * config.eta;
    let l = agent.alpha.scale(2.0) - sum_w.scale(half);
    let h = 2.0 * agent.beta - half * sum_rho;
    (l, h)
}

fn check_dim(z: &DVector<f64>, config: &PnDetectorConfig) -> Result<()> {
    if z.len() != config.dim() {
        return Err(Error::DimensionMismatch { expected: config.dim(), got: z.len() });
    }
    Ok(())
}

fn solve_lambda(z: &DVector<f64>, l: &DVector<f64>, h: f64, config: &PnDetectorConfig) -> f64 {
    let a = config.a();
    let quad = z.norm_squared() / a + 1.0 / (a - 1.0);
    let lin = z.dot(l) / a + (1.0 - h) / (a - 1.0);
    let vertex = match config.dual {
        DualForm::Exact => lin / quad,
        DualForm::HalfVertex => lin / (2.0 * quad),
    };
    vertex.clamp(0.0, config.lambda_max())
}

/// Maximizer of the concave dual over `[0, |J| C]`. `neighbors` is the full agent set,
/// including `agent` itself.
pub fn update_lambda(
    agent: &VnAgentState,
    neighbors: &[VnAgentState],
    z: &DVector<f64>,
    config: &PnDetectorConfig,
) -> Result<f64> {
    check_dim(z, config)?;
    let (l, h) = consensus_terms(agent, neighbors, config);
    Ok(solve_lambda(z, &l, h, config))
}

fn primal_from_terms(
    z: &DVector<f64>,
    l: &DVector<f64>,
    h: f64,
    lambda: f64,
    config: &PnDetectorConfig,
) -> (DVector<f64>, f64) {
    let a = config.a();
    let w = (z.scale(lambda) - l).unscale(a);
    let rho = (1.0 - lambda - h) / (a - 1.0);
    (w, rho)
}

/// Stationary point of the online Lagrangian in `(w, rho)` for a given lambda.
pub fn update_primal(
    agent: &VnAgentState,
    neighbors: &[VnAgentState],
    z: &DVector<f64>,
    lambda: f64,
    config: &PnDetectorConfig,
) -> Result<(DVector<f64>, f64)> {
    check_dim(z, config)?;
    let (l, h) = consensus_terms(agent, neighbors, config);
    Ok(primal_from_terms(z, &l, h, lambda, config))
}

/// `agent` must already carry its t+1 estimates and its time-t multipliers;
/// `neighbors_new` holds every agent's t+1 estimates.
pub fn update_multipliers(
    agent: &VnAgentState,
    neighbors_new: &[VnAgentState],
    config: &PnDetectorConfig,
) -> (DVector<f64>, f64) {
    let mut diff_w = DVector::zeros(agent.w.len());
    let mut diff_rho = 0.0;
    for nb in neighbors_new {
        diff_w += &agent.w - &nb.w;
        diff_rho += agent.rho - nb.rho;
    }
    let half = 0.5 * config.eta;
    (&agent.alpha + diff_w.scale(half), agent.beta + half * diff_rho)
}

/// `sgn(z'w - rho)` with zero counted as normal.
pub fn discriminant(agent: &VnAgentState, z: &DVector<f64>) -> i8 {
    if z.dot(&agent.w) - agent.rho >= 0.0 {
        1
    } else {
        -1
    }
}

/// Largest `|w_j - w_i|_inf + |rho_j - rho_i|` over agent pairs.
pub fn consensus_gap(agents: &[VnAgentState]) -> f64 {
    let mut gap: f64 = 0.0;
    for (j, a) in agents.iter().enumerate() {
        for b in &agents[j + 1..] {
            let dw = a.w.iter().zip(b.w.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            gap = gap.max(dw + (a.rho - b.rho).abs());
        }
    }
    gap
}

/// Agents of one PN plus the configuration they share.
#[derive(Debug, Clone)]
pub struct PnDetector {
    pub config: PnDetectorConfig,
    pub agents: Vec<VnAgentState>,
}

impl PnDetector {
    pub fn new(config: PnDetectorConfig) -> Result<Self> {
        let agents = init_pn_detector(&config)?;
        Ok(Self { config, agents })
    }

    pub fn step(&mut self, time: usize, samples: &[&[f64]]) -> Result<PnVerdict> {
        pn_step(self, time, samples)
    }
}

/// One synchronous round: map samples, update lambda and `(w, rho)` for every agent from
/// the frozen snapshot, then the multipliers. Anomalous rounds leave the state untouched.
pub fn pn_step(detector: &mut PnDetector, time: usize, samples: &[&[f64]]) -> Result<PnVerdict> {
    let config = &detector.config;
    let snapshot = &detector.agents;
    if samples.len() != snapshot.len() {
        return Err(Error::DimensionMismatch { expected: snapshot.len(), got: samples.len() });
    }
    let mut next = Vec::with_capacity(snapshot.len());
    let mut features = Vec::with_capacity(snapshot.len());
    for (agent, x) in snapshot.iter().zip(samples) {
        let z = config.rff.map(x)?;
        let (l, h) = consensus_terms(agent, snapshot, config);
        let lambda = solve_lambda(&z, &l, h, config);
        let (w, rho) = primal_from_terms(&z, &l, h, lambda, config);
        next.push(VnAgentState { w, rho, alpha: agent.alpha.clone(), beta: agent.beta, lambda });
        features.push(z);
    }
    let multipliers: Vec<_> = next.iter().map(|a| update_multipliers(a, &next, config)).collect();
    for (agent, (alpha, beta)) in next.iter_mut().zip(multipliers) {
        agent.alpha = alpha;
        agent.beta = beta;
    }

    let per_agent_signs: Vec<i8> =
        next.iter().zip(&features).map(|(a, z)| if z.dot(&a.w) - a.rho >= -MARGIN_TOL { 1 } else { -1 }).collect();
    let is_anomalous = per_agent_signs.iter().any(|&s| s < 0);
    let committed = !is_anomalous || !config.rollback;
    if committed {
        detector.agents = next;
    }
    Ok(PnVerdict { time, per_agent_signs, is_anomalous, committed })
}
