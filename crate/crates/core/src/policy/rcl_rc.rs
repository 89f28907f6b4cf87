//! Corruption-robust cooperation: leaders on a dominating set of `G^gamma`
//! run epoch-based arm elimination, every other agent replays its nearest
//! leader's actions with a lag equal to their distance.
//!
//! Timeline for each leader: rounds `1..=K` pull every arm once. Each epoch
//! `m` then opens with `2 * gamma` rounds of local UCB1, followed by an
//! elimination block of `sum_k n_k(m)` rounds in which arm `k` is pulled
//! exactly `n_k(m)` times in random order. The gap estimates for epoch `m`
//! are formed when epoch `m + 1` reaches its elimination block, by which
//! point every follower's feedback for epoch `m` has arrived.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{argmax, AgentEstimates};
use crate::error::{Error, Result};
use crate::graph::{greedy_dominating_set, Graph};
use crate::rng::{Purpose, Streams};

#[derive(Clone, Debug, PartialEq)]
pub struct RclRcConfig {
    pub gamma: u32,
    pub k: usize,
    pub horizon: u64,
    pub delta: f64,
    pub lambda_scale: f64,
    pub xi: f64,
    pub sigma: f64,
}

/// `lambda_scale * 1024 * ln(8 K psi log2(T) / delta)`.
pub fn lambda(lambda_scale: f64, k: usize, psi: usize, horizon: u64, delta: f64) -> f64 {
    lambda_scale * 1024.0 * (8.0 * k as f64 * psi as f64 * (horizon as f64).log2() / delta).ln()
}

/// Gap estimates after epoch `m` from per-arm average rewards `r` and the
/// previous estimates.
pub fn gap_update(r: &[f64], prev: &[f64], m: u32) -> Vec<f64> {
    let floor = 0.5f64.powi(m as i32);
    let r_star = r
        .iter()
        .zip(prev)
        .map(|(&rk, &dk)| rk - dk / 16.0)
        .fold(f64::NEG_INFINITY, f64::max);
    r.iter().map(|&rk| floor.max(r_star - rk)).collect()
}

/// `n_k = ceil(lambda / gap_k^2)`.
pub fn quotas(lambda: f64, gaps: &[f64]) -> Vec<u64> {
    gaps.iter().map(|&d| (lambda / (d * d)).ceil() as u64).collect()
}

/// One epoch of one leader.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub leader: usize,
    pub epoch: u32,
    /// First round of the elimination block.
    pub elim_start: u64,
    /// Elimination block length `sum_k n_k`.
    pub length: u64,
    /// Whether the block ended within the horizon.
    pub complete: bool,
    pub quotas: Vec<u64>,
    /// Gap estimates the quotas were computed from.
    pub prior_gaps: Vec<f64>,
    /// `sum_k lambda / gap_k^2` before rounding.
    pub real_length: f64,
    /// Average received reward per arm; set once the epoch is closed.
    pub rewards: Option<Vec<f64>>,
    /// Gap estimates produced by this epoch; set once it is closed.
    pub gaps: Option<Vec<f64>>,
}

impl EpochRecord {
    /// `lambda * 4^(m-1)`.
    pub fn nominal(&self, lambda: f64) -> f64 {
        lambda * 4f64.powi(self.epoch as i32 - 1)
    }

    /// Length checks: at least `lambda 4^(m-1)` rounds; the unrounded quota
    /// sum at most `K lambda 4^(m-1)`; rounding adds fewer than `K` rounds.
    pub fn length_ok(&self, lambda: f64) -> bool {
        let nominal = self.nominal(lambda);
        let k = self.quotas.len() as f64;
        let tol = 1e-9 * nominal.max(1.0);
        nominal <= self.length as f64 + tol
            && self.real_length <= k * nominal + tol
            && (self.length as f64) < self.real_length + k
    }
}

#[derive(Clone, Debug)]
enum Phase {
    Warmup,
    Ucb { start: u64 },
    Elim { end: u64 },
}

#[derive(Clone, Debug)]
struct Collect {
    start: u64,
    end: u64,
    sums: Vec<f64>,
    counts: Vec<u64>,
}

#[derive(Clone, Debug)]
struct Leader {
    agent: usize,
    epoch: u32,
    phase: Phase,
    gaps: Vec<f64>,
    remaining: Vec<u64>,
    remaining_total: u64,
    own: AgentEstimates,
    rng: ChaCha8Rng,
    collect: Option<Collect>,
    history: Vec<u32>,
    records: Vec<EpochRecord>,
}

#[derive(Clone, Debug)]
struct Member {
    leader: usize,
    dist: u32,
    rng: ChaCha8Rng,
}

/// State of every agent under the leader/imitator scheme.
#[derive(Clone, Debug)]
pub struct RclRc {
    cfg: RclRcConfig,
    lambda: f64,
    leaders: Vec<Leader>,
    members: Vec<Member>,
    violations: u64,
}

impl RclRc {
    pub fn new(g: &Graph, cfg: &RclRcConfig, streams: &Streams) -> Result<Self> {
        if cfg.horizon < cfg.k as u64 {
            return Err(Error::config("T", format!("horizon {} shorter than K = {}", cfg.horizon, cfg.k)));
        }
        if cfg.k < 2 {
            return Err(Error::config("K", "need at least 2 arms"));
        }
        let dist = g.distances()?;
        let heads = greedy_dominating_set(&g.power(cfg.gamma));
        let lambda = lambda(cfg.lambda_scale, cfg.k, heads.len(), cfg.horizon, cfg.delta);
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::config("lambda_scale", format!("epoch scale must be positive, got {lambda}")));
        }
        let members = (0..g.n())
            .map(|j| {
                let (leader, d) = heads
                    .iter()
                    .enumerate()
                    .map(|(li, &h)| (li, dist.get(h, j)))
                    .min_by_key(|&(li, d)| (d, li))
                    .expect("dominating set is non-empty");
                Member { leader, dist: d, rng: streams.sequential(j, Purpose::Policy) }
            })
            .collect::<Vec<_>>();
        let leaders = heads
            .iter()
            .map(|&h| Leader {
                agent: h,
                epoch: 0,
                phase: Phase::Warmup,
                gaps: vec![1.0; cfg.k],
                remaining: Vec::new(),
                remaining_total: 0,
                own: AgentEstimates::new(cfg.k),
                rng: streams.sequential(h, Purpose::Policy),
                collect: None,
                history: vec![0],
                records: Vec::new(),
            })
            .collect();
        Ok(Self { cfg: cfg.clone(), lambda, leaders, members, violations: 0 })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn leaders(&self) -> Vec<usize> {
        self.leaders.iter().map(|l| l.agent).collect()
    }

    /// `(leader agent, distance)` for `agent`.
    pub fn leader_of(&self, agent: usize) -> (usize, u32) {
        let m = &self.members[agent];
        (self.leaders[m.leader].agent, m.dist)
    }

    /// Epoch records of each leader, in leader order.
    pub fn records(&self) -> Vec<&[EpochRecord]> {
        self.leaders.iter().map(|l| l.records.as_slice()).collect()
    }

    /// Epochs whose length or gap floor checks failed.
    pub fn violations(&self) -> u64 {
        self.violations
    }

    /// Actions of every agent at round `t` (rounds must be consecutive).
    pub fn actions(&mut self, t: u64, out: &mut [usize]) -> Result<()> {
        let k = self.cfg.k;
        for li in 0..self.leaders.len() {
            let a = self.leader_action(li, t)?;
            let l = &mut self.leaders[li];
            debug_assert_eq!(l.history.len() as u64, t);
            l.history.push(a as u32);
        }
        for (j, m) in self.members.iter_mut().enumerate() {
            let hist = &self.leaders[m.leader].history;
            out[j] = if m.dist == 0 {
                hist[t as usize] as usize
            } else if t <= k as u64 {
                (t as usize - 1) % k
            } else if t <= k as u64 + m.dist as u64 {
                m.rng.random_range(0..k)
            } else {
                hist[(t - m.dist as u64) as usize] as usize
            };
        }
        Ok(())
    }

    /// Feeds an observation to `recipient`; only leaders use them, and only
    /// from their own followers (or themselves).
    pub fn observe(&mut self, recipient: usize, arm: usize, reward: f64, origin: usize, origin_time: u64) {
        let m = &self.members[recipient];
        if m.dist != 0 {
            return;
        }
        let li = m.leader;
        let om = &self.members[origin];
        if om.leader != li {
            return;
        }
        let l = &mut self.leaders[li];
        if origin == recipient {
            l.own.record_own(arm, reward);
        }
        let Some(at) = origin_time.checked_sub(om.dist as u64) else { return };
        if let Some(c) = &mut l.collect {
            if (c.start..=c.end).contains(&at) {
                c.sums[arm] += reward;
                c.counts[arm] += 1;
            }
        }
    }

    fn leader_action(&mut self, li: usize, t: u64) -> Result<usize> {
        let k = self.cfg.k;
        let two_gamma = 2 * self.cfg.gamma as u64;
        let l = &mut self.leaders[li];
        if t <= k as u64 {
            return Ok((t as usize - 1) % k);
        }
        if matches!(l.phase, Phase::Warmup) {
            l.epoch = 1;
            l.phase = Phase::Ucb { start: t };
        }
        if let Phase::Elim { end, .. } = l.phase {
            if t > end {
                l.epoch += 1;
                l.phase = Phase::Ucb { start: t };
            }
        }
        if let Phase::Ucb { start } = l.phase {
            if t >= start + two_gamma {
                self.open_elimination(li, t)?;
            }
        }
        let l = &mut self.leaders[li];
        match l.phase {
            Phase::Ucb { .. } => {
                let (xi, sigma) = (self.cfg.xi, self.cfg.sigma);
                Ok(argmax((0..k).map(|a| l.own.index(a, t, xi, sigma))))
            }
            Phase::Elim { .. } => {
                let mut u = l.rng.random_range(0..l.remaining_total);
                let mut arm = 0;
                while u >= l.remaining[arm] {
                    u -= l.remaining[arm];
                    arm += 1;
                }
                l.remaining[arm] -= 1;
                l.remaining_total -= 1;
                Ok(arm)
            }
            Phase::Warmup => unreachable!(),
        }
    }

    fn open_elimination(&mut self, li: usize, t: u64) -> Result<()> {
        let lambda = self.lambda;
        let horizon = self.cfg.horizon;
        let l = &mut self.leaders[li];
        let m = l.epoch;
        if let Some(c) = l.collect.take() {
            if let Some(arm) = c.counts.iter().position(|&n| n == 0) {
                return Err(Error::EmptyEpoch { epoch: m - 1, arm });
            }
            let r: Vec<f64> = c.sums.iter().zip(&c.counts).map(|(s, &n)| s / n as f64).collect();
            let gaps = gap_update(&r, &l.gaps, m - 1);
            let floor = 0.5f64.powi(m as i32 - 1);
            if gaps.iter().any(|&d| d < floor) {
                self.violations += 1;
            }
            let rec = l.records.last_mut().expect("closed epoch has a record");
            rec.rewards = Some(r);
            rec.gaps = Some(gaps.clone());
            l.gaps = gaps;
        }
        let q = quotas(lambda, &l.gaps);
        let length: u64 = q.iter().sum();
        let end = t + length - 1;
        let rec = EpochRecord {
            leader: l.agent,
            epoch: m,
            elim_start: t,
            length,
            complete: end <= horizon,
            quotas: q.clone(),
            prior_gaps: l.gaps.clone(),
            real_length: l.gaps.iter().map(|d| lambda / (d * d)).sum(),
            rewards: None,
            gaps: None,
        };
        if !rec.length_ok(lambda) {
            self.violations += 1;
        }
        debug_assert!(rec.length_ok(lambda), "epoch length out of range: {rec:?}");
        l.records.push(rec);
        l.remaining_total = length;
        l.remaining = q;
        l.collect = Some(Collect { start: t, end, sums: vec![0.0; self.cfg.k], counts: vec![0; self.cfg.k] });
        l.phase = Phase::Elim { end };
        Ok(())
    }
}
