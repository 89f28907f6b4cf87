//! Decision rules: UCB1 variants with cooperative estimates, and the
//! leader/imitator arm-elimination scheme in [`rcl_rc`].

pub mod rcl_rc;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub use rcl_rc::{gap_update, lambda, quotas, EpochRecord, RclRc, RclRcConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyVariant {
    /// UCB1 on own pulls only; no messages are sent.
    LocalUcb,
    /// UCB1 over own pulls plus every accepted message.
    CoopUcb,
    /// Cooperative UCB1 with receiver-side probabilistic discarding.
    RclLf,
    /// Cooperative UCB1 under stochastic delays.
    RclSd,
    /// Cooperative UCB1 that holds messages until they are `gamma_bar`
    /// rounds old.
    DelayedMpUcb,
    /// Dominating-set leaders run arm elimination; everyone else imitates.
    RclRc,
}

impl PolicyVariant {
    pub const ALL: [PolicyVariant; 6] = [
        PolicyVariant::LocalUcb,
        PolicyVariant::CoopUcb,
        PolicyVariant::RclLf,
        PolicyVariant::RclSd,
        PolicyVariant::DelayedMpUcb,
        PolicyVariant::RclRc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyVariant::LocalUcb => "local_ucb",
            PolicyVariant::CoopUcb => "coop_ucb",
            PolicyVariant::RclLf => "rcl_lf",
            PolicyVariant::RclSd => "rcl_sd",
            PolicyVariant::DelayedMpUcb => "delayed_mp_ucb",
            PolicyVariant::RclRc => "rcl_rc",
        }
    }

    pub fn communicates(self) -> bool {
        self != PolicyVariant::LocalUcb
    }

    pub fn default_accept(self) -> AcceptRule {
        match self {
            PolicyVariant::RclLf => AcceptRule::MinDegreeRatio,
            _ => AcceptRule::All,
        }
    }
}

impl fmt::Display for PolicyVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Receiver-side accept probabilities.
#[derive(Clone, Debug, PartialEq)]
pub enum AcceptRule {
    All,
    /// `p_i = d_min / d_i` on the communication graph.
    MinDegreeRatio,
    Explicit(Vec<f64>),
}

impl Serialize for AcceptRule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AcceptRule::All => s.serialize_str("all"),
            AcceptRule::MinDegreeRatio => s.serialize_str("min_degree_ratio"),
            AcceptRule::Explicit(p) => p.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for AcceptRule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Name(String),
            List(Vec<f64>),
        }
        match Repr::deserialize(d)? {
            Repr::Name(s) if s == "all" => Ok(AcceptRule::All),
            Repr::Name(s) if s == "min_degree_ratio" => Ok(AcceptRule::MinDegreeRatio),
            Repr::Name(s) => Err(serde::de::Error::custom(format!(
                "unknown accept rule `{s}` (expected all, min_degree_ratio or a list)"
            ))),
            Repr::List(p) => Ok(AcceptRule::Explicit(p)),
        }
    }
}

impl AcceptRule {
    /// Per-agent probabilities on `g_comm` (the graph messages actually
    /// travel over: `G` for one hop, `G_gamma` for message passing).
    pub fn resolve(&self, g_comm: &Graph) -> Result<Vec<f64>> {
        match self {
            AcceptRule::All => Ok(vec![1.0; g_comm.n()]),
            AcceptRule::MinDegreeRatio => Ok(default_accept_probs(g_comm)),
            AcceptRule::Explicit(p) => {
                if p.len() != g_comm.n() {
                    return Err(Error::config(
                        "accept",
                        format!("{} probabilities for {} agents", p.len(), g_comm.n()),
                    ));
                }
                if let Some(x) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                    return Err(Error::config("accept", format!("probability {x} outside [0, 1]")));
                }
                Ok(p.clone())
            }
        }
    }
}

/// `p_i = d_min / d_i`. Isolated vertices (only possible for `n = 1`) get 1.
pub fn default_accept_probs(g_comm: &Graph) -> Vec<f64> {
    let deg = g_comm.degrees();
    let d_min = deg.iter().copied().min().unwrap_or(0);
    deg.iter().map(|&d| if d == 0 { 1.0 } else { d_min as f64 / d as f64 }).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyConfig {
    pub variant: PolicyVariant,
    pub xi: f64,
    pub sigma: f64,
    pub gamma_bar: u32,
    pub delta: f64,
    pub lambda_scale: f64,
    pub accept_rule: AcceptRule,
}

impl PolicyConfig {
    pub fn new(variant: PolicyVariant) -> Self {
        Self {
            variant,
            xi: 1.1,
            sigma: 1.0,
            gamma_bar: 1,
            delta: 0.1,
            lambda_scale: 1.0,
            accept_rule: variant.default_accept(),
        }
    }

    /// `gamma_bar` may exceed the message life; every message is then held
    /// past the point where it could still arrive.
    pub fn validate(&self) -> Result<()> {
        if !(self.xi.is_finite() && self.xi > 1.0) {
            return Err(Error::config("xi", format!("must be > 1, got {}", self.xi)));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::config("sigma", format!("must be > 0, got {}", self.sigma)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config("delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.lambda_scale.is_finite() && self.lambda_scale > 0.0) {
            return Err(Error::config("lambda_scale", format!("must be > 0, got {}", self.lambda_scale)));
        }
        if self.gamma_bar < 1 {
            return Err(Error::config("gamma_bar", "must be >= 1"));
        }
        Ok(())
    }
}

/// UCB1 index; `+inf` for unseen arms.
#[inline]
pub fn ucb_index(mean: f64, count: u64, t: u64, xi: f64, sigma: f64) -> f64 {
    debug_assert!(t >= 1);
    if count == 0 {
        return f64::INFINITY;
    }
    mean + sigma * (2.0 * (xi + 1.0) * (t as f64).ln() / count as f64).sqrt()
}

/// Index of the largest value; lowest index wins ties.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut top = f64::NEG_INFINITY;
    for (k, v) in values.into_iter().enumerate() {
        if v > top {
            top = v;
            best = k;
        }
    }
    best
}

/// One agent's view of the arms.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentEstimates {
    counts: Vec<u64>,
    sums: Vec<f64>,
    own: Vec<u64>,
    pending: BTreeMap<u64, Vec<(usize, f64)>>,
    pending_len: usize,
}

impl AgentEstimates {
    pub fn new(k: usize) -> Self {
        Self {
            counts: vec![0; k],
            sums: vec![0.0; k],
            own: vec![0; k],
            pending: BTreeMap::new(),
            pending_len: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    /// Samples available for arm `k`, own and received.
    pub fn count(&self, k: usize) -> u64 {
        self.counts[k]
    }

    pub fn own_count(&self, k: usize) -> u64 {
        self.own[k]
    }

    pub fn sum(&self, k: usize) -> f64 {
        self.sums[k]
    }

    pub fn mean(&self, k: usize) -> Option<f64> {
        (self.counts[k] > 0).then(|| self.sums[k] / self.counts[k] as f64)
    }

    /// Messages held back until they are old enough.
    pub fn pending(&self) -> usize {
        self.pending_len
    }

    pub fn index(&self, k: usize, t: u64, xi: f64, sigma: f64) -> f64 {
        let c = self.counts[k];
        let mean = if c == 0 { 0.0 } else { self.sums[k] / c as f64 };
        ucb_index(mean, c, t, xi, sigma)
    }

    pub fn record_own(&mut self, arm: usize, reward: f64) {
        self.own[arm] += 1;
        self.add(arm, reward);
    }

    fn add(&mut self, arm: usize, reward: f64) {
        self.counts[arm] += 1;
        self.sums[arm] += reward;
    }

    /// Incorporates a received observation now, or holds it when it
    /// originated after `t - hold` (`hold = 0` never holds).
    pub fn ingest(&mut self, arm: usize, reward: f64, origin_time: u64, t: u64, hold: u32) {
        if hold > 0 && origin_time + hold as u64 > t {
            self.pending.entry(origin_time).or_default().push((arm, reward));
            self.pending_len += 1;
        } else {
            self.add(arm, reward);
        }
    }

    /// Moves held observations with `origin_time <= t - hold` into the
    /// estimates, oldest first.
    pub fn release(&mut self, t: u64, hold: u32) {
        let Some(cutoff) = t.checked_sub(hold as u64) else { return };
        while let Some(entry) = self.pending.first_entry() {
            if *entry.key() > cutoff {
                break;
            }
            for (arm, reward) in entry.remove() {
                self.pending_len -= 1;
                self.add(arm, reward);
            }
        }
    }
}

/// UCB1 choice at round `t`.
pub fn select_action(est: &AgentEstimates, t: u64, cfg: &PolicyConfig) -> usize {
    argmax((0..est.k()).map(|k| est.index(k, t, cfg.xi, cfg.sigma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphSpec};

    #[test]
    fn index_value() {
        let want = 0.5 + (2.0f64 * 2.1 * 100f64.ln() / 4.0).sqrt();
        assert!((ucb_index(0.5, 4, 100, 1.1, 1.0) - want).abs() < 1e-12);
        assert!((ucb_index(0.5, 4, 100, 1.1, 1.0) - 2.69896).abs() < 1e-5);
        assert_eq!(ucb_index(0.3, 0, 7, 1.1, 1.0), f64::INFINITY);
        assert_eq!(ucb_index(0.3, 5, 1, 1.1, 1.0), 0.3);
    }

    #[test]
    fn argmax_ties_low() {
        assert_eq!(argmax([2.0, 3.0]), 1);
        assert_eq!(argmax([3.0, 3.0]), 0);
        assert_eq!(argmax([f64::INFINITY; 4]), 0);
    }

    #[test]
    fn fresh_agent_pulls_arm_zero() {
        let est = AgentEstimates::new(3);
        assert_eq!(select_action(&est, 1, &PolicyConfig::new(PolicyVariant::CoopUcb)), 0);
    }

    #[test]
    fn coop_ingest_counts_immediately() {
        let mut e = AgentEstimates::new(3);
        for _ in 0..3 {
            e.ingest(2, 1.0, 4, 5, 0);
        }
        assert_eq!(e.count(2), 3);
        assert_eq!(e.own_count(2), 0);
    }

    #[test]
    fn held_until_old_enough() {
        let mut e = AgentEstimates::new(2);
        e.ingest(1, 0.5, 9, 10, 2);
        assert_eq!((e.count(1), e.pending()), (0, 1));
        e.release(10, 2);
        assert_eq!(e.count(1), 0);
        e.release(11, 2);
        assert_eq!((e.count(1), e.pending()), (1, 0));
        e.record_own(0, 1.0);
        assert_eq!(e.count(0), 1);
    }

    #[test]
    fn accept_probs() {
        let star = generate(&GraphSpec::MultiStar { hubs: 1, leaves: 4 }, 0).unwrap();
        assert_eq!(default_accept_probs(&star), vec![0.25, 1.0, 1.0, 1.0, 1.0]);
        let path = generate(&GraphSpec::Path { n: 4 }, 0).unwrap();
        assert_eq!(default_accept_probs(&path), vec![1.0, 0.5, 0.5, 1.0]);
        let cyc = generate(&GraphSpec::Cycle { n: 6 }, 0).unwrap();
        assert!(default_accept_probs(&cyc).iter().all(|&p| p == 1.0));
    }

    #[test]
    fn accept_rule_json() {
        let r: AcceptRule = serde_json::from_str("\"min_degree_ratio\"").unwrap();
        assert_eq!(r, AcceptRule::MinDegreeRatio);
        let r: AcceptRule = serde_json::from_str("[0.5, 1]").unwrap();
        assert_eq!(r, AcceptRule::Explicit(vec![0.5, 1.0]));
        assert!(serde_json::from_str::<AcceptRule>("\"some\"").is_err());
    }

    #[test]
    fn config_ranges() {
        let mut c = PolicyConfig::new(PolicyVariant::CoopUcb);
        assert!(c.validate().is_ok());
        c.xi = 0.5;
        assert!(matches!(c.validate(), Err(Error::Config { ref key, .. }) if key == "xi"));
        c.xi = 1.1;
        c.delta = 1.5;
        assert!(matches!(c.validate(), Err(Error::Config { ref key, .. }) if key == "delta"));
    }
}
