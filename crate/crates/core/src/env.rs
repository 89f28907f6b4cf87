//! Arms, reward draws and pseudo-regret accounting.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Purpose, Streams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmFamily {
    Gaussian,
    Bernoulli,
}

/// Requested arm configuration before validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    #[serde(default = "default_family")]
    pub family: ArmFamily,
    pub means: Vec<f64>,
    /// Dispersion bound; ignored for Bernoulli arms, which use 1/2.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

fn default_family() -> ArmFamily {
    ArmFamily::Gaussian
}

fn default_sigma() -> f64 {
    1.0
}

impl ArmSpec {
    /// The reference instance: arm 0 has mean 1, every other arm 0.5,
    /// unit-variance Gaussian rewards.
    pub fn reference(k: usize) -> Self {
        let mut means = vec![0.5; k];
        if let Some(m) = means.first_mut() {
            *m = 1.0;
        }
        Self { family: ArmFamily::Gaussian, means, sigma: 1.0 }
    }
}

/// Validated arm set with precomputed gaps.
#[derive(Clone, Debug, PartialEq)]
pub struct ArmSet {
    family: ArmFamily,
    means: Vec<f64>,
    sigma: f64,
    gaps: Vec<f64>,
    best: usize,
}

pub fn make_arms(spec: &ArmSpec) -> Result<ArmSet> {
    let k = spec.means.len();
    if k < 2 {
        return Err(Error::InvalidArms(format!("need at least 2 arms, got {k}")));
    }
    if let Some(m) = spec.means.iter().find(|m| !m.is_finite()) {
        return Err(Error::InvalidArms(format!("non-finite mean {m}")));
    }
    let sigma = match spec.family {
        ArmFamily::Bernoulli => {
            if let Some(m) = spec.means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
                return Err(Error::InvalidArms(format!("bernoulli mean {m} outside [0, 1]")));
            }
            0.5
        }
        ArmFamily::Gaussian => {
            if !(spec.sigma.is_finite() && spec.sigma > 0.0) {
                return Err(Error::InvalidArms(format!("sigma must be positive, got {}", spec.sigma)));
            }
            spec.sigma
        }
    };
    let top = spec.means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best = spec.means.iter().position(|&m| m == top).unwrap();
    let gaps = spec.means.iter().map(|&m| top - m).collect();
    Ok(ArmSet { family: spec.family, means: spec.means.clone(), sigma, gaps, best })
}

impl ArmSet {
    pub fn k(&self) -> usize {
        self.means.len()
    }

    pub fn family(&self) -> ArmFamily {
        self.family
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    #[inline]
    pub fn gap(&self, k: usize) -> f64 {
        self.gaps[k]
    }

    /// Lowest-index arm with the largest mean.
    pub fn best_arm(&self) -> usize {
        self.best
    }

    /// Sum of gaps over every arm other than the best one.
    pub fn gap_sum(&self) -> f64 {
        self.gaps.iter().sum()
    }

    /// Gaps of the arms other than the best one; errors if any is zero.
    pub fn suboptimal_gaps(&self) -> Result<Vec<f64>> {
        (0..self.k())
            .filter(|&k| k != self.best)
            .map(|k| if self.gaps[k] > 0.0 { Ok(self.gaps[k]) } else { Err(Error::ZeroGap { arm: k }) })
            .collect()
    }
}

/// One reward for arm `k`.
pub fn sample_reward<R: Rng + ?Sized>(arms: &ArmSet, k: usize, rng: &mut R) -> f64 {
    match arms.family {
        ArmFamily::Gaussian => {
            let z: f64 = rng.sample(StandardNormal);
            arms.means[k] + arms.sigma * z
        }
        ArmFamily::Bernoulli => {
            if rng.random::<f64>() < arms.means[k] {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Reward seen by `agent` at round `t` when pulling `k`. The noise is
/// addressed by `(agent, t)` alone, so the value for a given arm does not
/// depend on anything else that happened in the run.
pub fn reward_at(arms: &ArmSet, k: usize, streams: &Streams, agent: usize, t: u64) -> f64 {
    let mut rng = streams.at(agent, Purpose::Reward, t);
    sample_reward(arms, k, &mut rng)
}

/// Cumulative group pseudo-regret and pull counts.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretTrace {
    horizon: u64,
    cumulative: Vec<f64>,
    pulls: Vec<Vec<u64>>,
}

impl RegretTrace {
    pub fn new(horizon: u64, agents: usize, arms: usize) -> Self {
        Self {
            horizon,
            cumulative: Vec::with_capacity(horizon as usize),
            pulls: vec![vec![0; arms]; agents],
        }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Cumulative regret after each completed round.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// `pulls()[i][k]` = times agent `i` pulled arm `k`.
    pub fn pulls(&self) -> &[Vec<u64>] {
        &self.pulls
    }

    pub fn rounds(&self) -> u64 {
        self.cumulative.len() as u64
    }

    /// Records round `t` (1-based; rounds must arrive in order).
    pub fn accumulate(&mut self, actions: &[usize], arms: &ArmSet, t: u64) {
        assert_eq!(t, self.rounds() + 1, "rounds must be recorded in order");
        assert!(t <= self.horizon, "round {t} beyond horizon {}", self.horizon);
        let mut inc = 0.0;
        for (i, &a) in actions.iter().enumerate() {
            inc += arms.gap(a);
            self.pulls[i][a] += 1;
        }
        let prev = self.final_regret();
        self.cumulative.push(prev + inc);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn arms(family: ArmFamily, means: &[f64]) -> Result<ArmSet> {
        make_arms(&ArmSpec { family, means: means.to_vec(), sigma: 1.0 })
    }

    #[test]
    fn reference_gaps() {
        let a = make_arms(&ArmSpec::reference(10)).unwrap();
        assert_eq!(a.gaps()[0], 0.0);
        assert!(a.gaps()[1..].iter().all(|&g| g == 0.5));
        assert_eq!(a.best_arm(), 0);
    }

    #[test]
    fn equal_means_zero_gaps() {
        let a = arms(ArmFamily::Gaussian, &[0.5, 0.5]).unwrap();
        assert_eq!(a.gaps(), &[0.0, 0.0]);
        assert!(matches!(a.suboptimal_gaps(), Err(Error::ZeroGap { arm: 1 })));
    }

    #[test]
    fn bernoulli_gaps_and_range() {
        let a = arms(ArmFamily::Bernoulli, &[0.6, 0.4]).unwrap();
        assert!((a.gaps()[1] - 0.2).abs() < 1e-15);
        assert_eq!(a.sigma(), 0.5);
        assert!(arms(ArmFamily::Bernoulli, &[1.2, 0.4]).is_err());
        assert!(arms(ArmFamily::Gaussian, &[1.0]).is_err());
    }

    #[test]
    fn gaussian_mean_within_clt_band() {
        let a = arms(ArmFamily::Gaussian, &[0.5, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| sample_reward(&a, 0, &mut rng)).sum::<f64>() / n as f64;
        // 3 sigma / sqrt(n) ~ 0.0095
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn degenerate_bernoulli() {
        let a = arms(ArmFamily::Bernoulli, &[1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            assert_eq!(sample_reward(&a, 0, &mut rng), 1.0);
            assert_eq!(sample_reward(&a, 1, &mut rng), 0.0);
        }
    }

    #[test]
    fn accumulate_increments() {
        let a = arms(ArmFamily::Gaussian, &[1.0, 0.5]).unwrap();
        let mut tr = RegretTrace::new(3, 3, 2);
        tr.accumulate(&[0, 0, 0], &a, 1);
        tr.accumulate(&[1, 1, 1], &a, 2);
        tr.accumulate(&[0, 1, 0], &a, 3);
        assert_eq!(tr.cumulative(), &[0.0, 1.5, 2.0]);
        assert_eq!(tr.pulls()[1], vec![1, 2]);
    }

    #[test]
    fn reward_at_is_common_noise() {
        let a = arms(ArmFamily::Gaussian, &[1.0, 0.5]).unwrap();
        let s = Streams::new(11, 2);
        let r0 = reward_at(&a, 0, &s, 4, 17);
        let r1 = reward_at(&a, 1, &s, 4, 17);
        assert!((r0 - r1 - 0.5).abs() < 1e-12);
        assert_eq!(r0, reward_at(&a, 0, &s, 4, 17));
    }
}
