//! Networked message transport: per-hop link failures, receiver-side
//! discarding, stochastic delays and bounded adversarial corruption.
//!
//! Two transport modes exist. Without a delay law, messages are forwarded
//! along BFS shortest paths for at most `gamma` hops, one round per hop.
//! With a delay law (`gamma` must be 1), each neighbour receives the message
//! once after its own random delay.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{Purpose, Streams};

/// `<arm, reward, origin, origin_time>` plus the hop count on arrival.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Message {
    pub arm: usize,
    pub reward: f64,
    pub origin: usize,
    pub origin_time: u64,
    pub hops: u32,
}

impl Message {
    pub fn new(arm: usize, reward: f64, origin: usize, origin_time: u64) -> Self {
        Self { arm, reward, origin, origin_time, hops: 0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayLaw {
    #[default]
    None,
    /// Uniform over `lo..=hi` rounds.
    UniformInt(u32, u32),
    /// Geometric shape on `1..=max`, decay chosen so the mean is exact.
    TruncatedGeometric(f64, u32),
}

impl DelayLaw {
    pub fn is_none(&self) -> bool {
        matches!(self, DelayLaw::None)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DelayLaw::None => Ok(()),
            DelayLaw::UniformInt(lo, hi) if lo <= hi => Ok(()),
            DelayLaw::UniformInt(lo, hi) => {
                Err(Error::config("delay", format!("uniform_int lower bound {lo} exceeds {hi}")))
            }
            DelayLaw::TruncatedGeometric(mean, max) => {
                if max < 1 {
                    return Err(Error::config("delay", "truncated_geometric max must be >= 1"));
                }
                let hi = (max as f64 + 1.0) / 2.0;
                if !(mean >= 1.0 && mean <= hi) {
                    return Err(Error::config(
                        "delay",
                        format!("truncated_geometric mean must lie in [1, {hi}] for max {max}"),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Largest possible lag in rounds.
    pub fn max_lag(&self) -> u32 {
        match *self {
            DelayLaw::None => 1,
            DelayLaw::UniformInt(_, hi) => hi.max(1),
            DelayLaw::TruncatedGeometric(_, max) => max,
        }
    }

    /// Expected lag in rounds; a zero draw counts as one round.
    pub fn expected_lag(&self) -> f64 {
        match *self {
            DelayLaw::None => 1.0,
            DelayLaw::UniformInt(lo, hi) => {
                (lo..=hi).map(|x| x.max(1) as f64).sum::<f64>() / (hi - lo + 1) as f64
            }
            DelayLaw::TruncatedGeometric(mean, _) => mean,
        }
    }
}

/// Inverse-CDF sampler for a delay law.
#[derive(Clone, Debug)]
pub struct DelaySampler {
    lo: u32,
    cdf: Vec<f64>,
}

impl DelaySampler {
    pub fn new(law: &DelayLaw) -> Result<Self> {
        law.validate()?;
        Ok(match *law {
            DelayLaw::None => Self { lo: 1, cdf: vec![1.0] },
            DelayLaw::UniformInt(lo, hi) => {
                let m = (hi - lo + 1) as f64;
                Self { lo, cdf: (1..=hi - lo + 1).map(|i| i as f64 / m).collect() }
            }
            DelayLaw::TruncatedGeometric(mean, max) => {
                let q = geometric_decay(mean, max);
                let w: Vec<f64> = (0..max).map(|i| q.powi(i as i32)).collect();
                let total: f64 = w.iter().sum();
                let mut acc = 0.0;
                let mut cdf: Vec<f64> = w
                    .iter()
                    .map(|x| {
                        acc += x / total;
                        acc
                    })
                    .collect();
                *cdf.last_mut().unwrap() = 1.0;
                Self { lo: 1, cdf }
            }
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.lo + idx as u32
    }

    /// Probability of each delay value, starting at `lo`.
    pub fn pmf(&self) -> Vec<(u32, f64)> {
        let mut prev = 0.0;
        self.cdf
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let p = c - prev;
                prev = c;
                (self.lo + i as u32, p)
            })
            .collect()
    }
}

fn truncated_mean(q: f64, max: u32) -> f64 {
    let (mut num, mut den, mut w) = (0.0, 0.0, 1.0);
    for k in 1..=max {
        num += k as f64 * w;
        den += w;
        w *= q;
    }
    num / den
}

/// Decay `q` with `E[tau] = mean` for `P(tau = k) ∝ q^(k-1)` on `1..=max`.
fn geometric_decay(mean: f64, max: u32) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if truncated_mean(mid, max) < mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionPolicy {
    #[default]
    None,
    /// Adds an independent `U[0, eps]` perturbation to every message.
    UniformRandom(f64),
    /// Pushes suboptimal-arm rewards up by `eps` and optimal-arm rewards
    /// down by `eps`.
    AdaptiveBias(f64),
}

impl CorruptionPolicy {
    pub fn budget(&self) -> f64 {
        match *self {
            CorruptionPolicy::None => 0.0,
            CorruptionPolicy::UniformRandom(e) | CorruptionPolicy::AdaptiveBias(e) => e,
        }
    }

    pub fn with_budget(self, eps: f64) -> Self {
        match self {
            CorruptionPolicy::None => CorruptionPolicy::UniformRandom(eps),
            CorruptionPolicy::UniformRandom(_) => CorruptionPolicy::UniformRandom(eps),
            CorruptionPolicy::AdaptiveBias(_) => CorruptionPolicy::AdaptiveBias(eps),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.budget();
        if e.is_finite() && e >= 0.0 {
            Ok(())
        } else {
            Err(Error::config("corruption", format!("budget must be finite and >= 0, got {e}")))
        }
    }
}

/// What the adversary can see when tampering with a message. The full
/// ground truth is exposed, so byzantine strategies are expressible.
#[derive(Clone, Copy, Debug)]
pub struct AdversaryView<'a> {
    pub t: u64,
    pub means: &'a [f64],
    pub best_arm: usize,
}

/// Source of reward perturbations. Implementations may return anything;
/// the channel clamps to the budget.
pub trait Adversary: Send {
    fn budget(&self) -> f64;
    fn perturbation(&mut self, msg: &Message, view: &AdversaryView<'_>, rng: &mut ChaCha8Rng) -> f64;
}

impl Adversary for CorruptionPolicy {
    fn budget(&self) -> f64 {
        CorruptionPolicy::budget(self)
    }

    fn perturbation(&mut self, msg: &Message, view: &AdversaryView<'_>, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            CorruptionPolicy::None => 0.0,
            CorruptionPolicy::UniformRandom(eps) => eps * rng.random::<f64>(),
            CorruptionPolicy::AdaptiveBias(eps) => {
                if msg.arm == view.best_arm {
                    -eps
                } else {
                    eps
                }
            }
        }
    }
}

/// Applies one perturbation, clamped to `[-budget, budget]`. The flag
/// reports whether clamping was needed.
pub fn apply_corruption(
    adversary: &mut dyn Adversary,
    msg: Message,
    view: &AdversaryView<'_>,
    rng: &mut ChaCha8Rng,
) -> (Message, bool) {
    let eps = adversary.budget();
    let raw = adversary.perturbation(&msg, view, rng);
    let delta = if raw.is_nan() { 0.0 } else { raw.clamp(-eps, eps) };
    let clamped = raw.is_nan() || delta != raw;
    (Message { reward: msg.reward + delta, ..msg }, clamped)
}

/// Keeps each external message independently with probability `p`;
/// messages originating at `agent` itself are always kept.
pub fn accept_filter<R: Rng + ?Sized>(agent: usize, msgs: Vec<Message>, rng: &mut R, p: f64) -> Vec<Message> {
    msgs.into_iter().filter(|m| m.origin == agent || keep(p, rng)).collect()
}

#[inline]
fn keep<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    if p >= 1.0 {
        true
    } else if p <= 0.0 {
        false
    } else {
        rng.random::<f64>() < p
    }
}

/// Transport parameters shared by every agent.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelConfig {
    /// Message life: maximum number of hops.
    pub gamma: u32,
    /// Per-transmission success probability.
    pub link_p: f64,
    pub delay: DelayLaw,
    pub corruption: CorruptionPolicy,
    /// Receivers clip incoming values to `[0, 1]`.
    pub clip01: bool,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            gamma: 1,
            link_p: 1.0,
            delay: DelayLaw::None,
            corruption: CorruptionPolicy::None,
            clip01: false,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma < 1 {
            return Err(Error::config("gamma", "message life must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.link_p) {
            return Err(Error::config("link_p", format!("{} outside [0, 1]", self.link_p)));
        }
        self.delay.validate()?;
        self.corruption.validate()?;
        if !self.delay.is_none() && self.gamma > 1 {
            return Err(Error::Unsupported(
                "stochastic delays are modelled for one-hop reward sharing only (gamma = 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct Hop {
    node: usize,
    parent: usize,
    dist: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Delivery {
    pub recipient: usize,
    pub msg: Message,
}

/// Transport counters for one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChannelStats {
    pub broadcasts: u64,
    pub scheduled: u64,
    pub delivered: u64,
    pub link_drops: u64,
    pub discarded: u64,
    pub clamped: u64,
    pub max_outstanding: usize,
}

/// Per-run transport state.
pub struct Channel {
    gamma: u32,
    link_p: f64,
    accept_p: Vec<f64>,
    delay: Option<DelaySampler>,
    adversary: Box<dyn Adversary>,
    trees: Vec<Vec<Hop>>,
    neighbors: Vec<Vec<usize>>,
    link_rng: Vec<ChaCha8Rng>,
    accept_rng: Vec<ChaCha8Rng>,
    delay_rng: Vec<ChaCha8Rng>,
    corrupt_rng: Vec<ChaCha8Rng>,
    queue: VecDeque<Vec<Delivery>>,
    base: u64,
    forwards: Vec<bool>,
    pending: HashMap<(usize, u64), u32>,
    stats: ChannelStats,
}

impl Channel {
    pub fn new(g: &Graph, cfg: &ChannelConfig, accept_p: Vec<f64>, streams: &Streams) -> Result<Self> {
        cfg.validate()?;
        let n = g.n();
        if accept_p.len() != n {
            return Err(Error::config("accept", format!("{} probabilities for {n} agents", accept_p.len())));
        }
        if let Some(p) = accept_p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::config("accept", format!("probability {p} outside [0, 1]")));
        }
        let delay = if cfg.delay.is_none() { None } else { Some(DelaySampler::new(&cfg.delay)?) };
        let trees = if delay.is_some() { Vec::new() } else { (0..n).map(|s| forwarding_tree(g, s, cfg.gamma)).collect() };
        let per_agent = |p: Purpose| (0..n).map(|i| streams.sequential(i, p)).collect::<Vec<_>>();
        Ok(Self {
            gamma: cfg.gamma,
            link_p: cfg.link_p,
            accept_p,
            delay,
            adversary: Box::new(cfg.corruption),
            trees,
            neighbors: (0..n).map(|i| g.neighbors(i).to_vec()).collect(),
            link_rng: per_agent(Purpose::Link),
            accept_rng: per_agent(Purpose::Accept),
            delay_rng: per_agent(Purpose::Delay),
            corrupt_rng: per_agent(Purpose::Corruption),
            queue: VecDeque::new(),
            base: 0,
            forwards: vec![false; n],
            pending: HashMap::new(),
            stats: ChannelStats::default(),
        })
    }

    /// Replaces the built-in corruption policy.
    pub fn with_adversary(mut self, adversary: Box<dyn Adversary>) -> Self {
        self.adversary = adversary;
        self
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn is_delay_mode(&self) -> bool {
        self.delay.is_some()
    }

    pub fn stats(&self) -> ChannelStats {
        self.stats
    }

    /// Messages sent but not yet delivered to every recipient (delay mode).
    pub fn outstanding(&self) -> usize {
        self.pending.len()
    }

    fn schedule(&mut self, arrival: u64, d: Delivery) {
        debug_assert!(arrival >= self.base);
        let idx = (arrival - self.base) as usize;
        if self.queue.len() <= idx {
            self.queue.resize_with(idx + 1, Vec::new);
        }
        self.queue[idx].push(d);
        self.stats.scheduled += 1;
    }

    /// Sends `msg` (fresh, `msg.origin_time == t`) from its origin.
    pub fn broadcast(&mut self, msg: Message, t: u64, view: &AdversaryView<'_>) {
        debug_assert_eq!(msg.origin_time, t);
        self.stats.broadcasts += 1;
        let sender = msg.origin;
        let (msg, clamped) =
            apply_corruption(self.adversary.as_mut(), msg, view, &mut self.corrupt_rng[sender]);
        self.stats.clamped += u64::from(clamped);

        if self.delay.is_some() {
            let mut scheduled = 0u32;
            for idx in 0..self.neighbors[sender].len() {
                let v = self.neighbors[sender][idx];
                if !keep(self.link_p, &mut self.link_rng[sender]) {
                    self.stats.link_drops += 1;
                    continue;
                }
                let sampler = self.delay.as_ref().expect("delay mode");
                let lag = sampler.sample(&mut self.delay_rng[sender]).max(1) as u64;
                self.schedule(t + lag, Delivery { recipient: v, msg: Message { hops: 1, ..msg } });
                scheduled += 1;
            }
            if scheduled > 0 {
                self.pending.insert((sender, t), scheduled);
                self.stats.max_outstanding = self.stats.max_outstanding.max(self.pending.len());
            }
            return;
        }

        self.forwards[sender] = true;
        for h in 0..self.trees[sender].len() {
            let Hop { node, parent, dist } = self.trees[sender][h];
            if !self.forwards[parent] {
                continue;
            }
            if !keep(self.link_p, &mut self.link_rng[parent]) {
                self.stats.link_drops += 1;
                continue;
            }
            if !keep(self.accept_p[node], &mut self.accept_rng[node]) {
                self.stats.discarded += 1;
                continue;
            }
            self.forwards[node] = true;
            self.schedule(t + dist as u64, Delivery { recipient: node, msg: Message { hops: dist, ..msg } });
        }
        self.forwards[sender] = false;
        for h in 0..self.trees[sender].len() {
            let node = self.trees[sender][h].node;
            self.forwards[node] = false;
        }
    }

    /// Everything that becomes available at round `t` (and any earlier
    /// stragglers not yet collected). In delay mode the receiver-side accept
    /// filter runs here.
    pub fn deliver(&mut self, t: u64) -> Vec<Delivery> {
        let mut out = Vec::new();
        while self.base <= t {
            match self.queue.pop_front() {
                Some(batch) => out.extend(batch),
                None => {
                    self.base = t + 1;
                    break;
                }
            }
            self.base += 1;
        }
        if self.delay.is_some() {
            for d in &out {
                let key = (d.msg.origin, d.msg.origin_time);
                if let Some(c) = self.pending.get_mut(&key) {
                    *c -= 1;
                    if *c == 0 {
                        self.pending.remove(&key);
                    }
                }
            }
            let before = out.len();
            out.retain(|d| keep(self.accept_p[d.recipient], &mut self.accept_rng[d.recipient]));
            self.stats.discarded += (before - out.len()) as u64;
        }
        self.stats.delivered += out.len() as u64;
        out
    }
}

/// BFS tree from `src` truncated at depth `gamma`; parents are the
/// lowest-index vertex one step closer. Excludes `src`; ordered by depth.
fn forwarding_tree(g: &Graph, src: usize, gamma: u32) -> Vec<Hop> {
    let dist = g.bfs(src, Some(gamma));
    let mut hops: Vec<Hop> = (0..g.n())
        .filter_map(|v| match dist[v] {
            Some(d) if d >= 1 => {
                let parent = *g
                    .neighbors(v)
                    .iter()
                    .find(|&&u| dist[u] == Some(d - 1))
                    .expect("BFS vertex has a predecessor");
                Some(Hop { node: v, parent, dist: d })
            }
            _ => None,
        })
        .collect();
    hops.sort_by_key(|h| (h.dist, h.node));
    hops
}
