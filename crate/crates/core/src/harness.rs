//! Seeded repetitions, aggregation, parameter sweeps and regret-bound
//! overlays.

use rayon::prelude::*;

use crate::comm::{AdversaryView, Channel, ChannelStats, Message};
use crate::config::{ExperimentConfig, Theorem};
use crate::env::{make_arms, reward_at, ArmSet, RegretTrace};
use crate::error::{Error, Result};
use crate::graph::{generate, greedy_clique_cover, Graph};
use crate::policy::{select_action, AgentEstimates, EpochRecord, PolicyVariant, RclRc, RclRcConfig};
use crate::rng::Streams;

/// Graph used by repetition `rep`.
pub fn rep_graph(cfg: &ExperimentConfig, rep: u64) -> Result<Graph> {
    let seed = if cfg.resample_graph && cfg.graph.is_random() {
        Streams::graph_seed(cfg.graph_seed, rep)
    } else {
        cfg.graph_seed
    };
    generate(&cfg.graph, seed)
}

/// Extra per-round logs for [`run_single_detailed`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub record_actions: bool,
    pub record_rewards: bool,
}

/// Everything one repetition produced.
#[derive(Clone, Debug)]
pub struct RunDetail {
    pub trace: RegretTrace,
    pub gamma: u32,
    pub accept_p: Vec<f64>,
    pub channel: ChannelStats,
    /// `actions[t - 1][i]`, when recorded.
    pub actions: Vec<Vec<usize>>,
    /// Raw reward draws `rewards[t - 1][i]`, when recorded.
    pub rewards: Vec<Vec<f64>>,
    pub leaders: Vec<usize>,
    pub lambda: Option<f64>,
    pub epochs: Vec<EpochRecord>,
    pub epoch_violations: u64,
}

pub fn run_single(cfg: &ExperimentConfig, rep: u64) -> Result<RegretTrace> {
    Ok(run_single_detailed(cfg, rep, RunOptions::default())?.trace)
}

enum Agents {
    Ucb(Vec<AgentEstimates>),
    Rc(Box<RclRc>),
}

pub fn run_single_detailed(cfg: &ExperimentConfig, rep: u64, opts: RunOptions) -> Result<RunDetail> {
    cfg.validate()?;
    let g = rep_graph(cfg, rep)?;
    run_on_graph(cfg, &g, rep, opts)
}

/// One repetition on a caller-supplied graph.
pub fn run_on_graph(cfg: &ExperimentConfig, g: &Graph, rep: u64, opts: RunOptions) -> Result<RunDetail> {
    let arms = make_arms(&cfg.arm_spec()?)?;
    let streams = Streams::new(cfg.master_seed, rep);
    let n = g.n();
    let k = arms.k();
    let horizon = cfg.horizon;
    let gamma = cfg.gamma.resolve(g)?;
    let pcfg = cfg.policy();
    let ccfg = cfg.channel(gamma);
    let clip = ccfg.clip01;

    let accept_p = if gamma > 1 {
        pcfg.accept_rule.resolve(&g.power(gamma))?
    } else {
        pcfg.accept_rule.resolve(g)?
    };
    let mut channel = if cfg.variant.communicates() {
        Some(Channel::new(g, &ccfg, accept_p.clone(), &streams)?)
    } else {
        None
    };
    let hold = if cfg.variant == PolicyVariant::DelayedMpUcb { cfg.gamma_bar } else { 0 };

    let mut agents = match cfg.variant {
        PolicyVariant::RclRc => {
            let rc = RclRc::new(
                g,
                &RclRcConfig {
                    gamma,
                    k,
                    horizon,
                    delta: cfg.delta,
                    lambda_scale: cfg.lambda_scale,
                    xi: cfg.xi,
                    sigma: cfg.sigma,
                },
                &streams,
            )?;
            Agents::Rc(Box::new(rc))
        }
        _ => Agents::Ucb(vec![AgentEstimates::new(k); n]),
    };

    let mut trace = RegretTrace::new(horizon, n, k);
    let mut actions = vec![0usize; n];
    let mut log_actions = Vec::new();
    let mut log_rewards = Vec::new();
    let view_means = arms.means().to_vec();
    let see = |r: f64| if clip { r.clamp(0.0, 1.0) } else { r };

    for t in 1..=horizon {
        match &mut agents {
            Agents::Ucb(est) => {
                for (i, e) in est.iter_mut().enumerate() {
                    if hold > 0 {
                        e.release(t, hold);
                    }
                    actions[i] = select_action(e, t, &pcfg);
                }
            }
            Agents::Rc(rc) => rc.actions(t, &mut actions)?,
        }
        trace.accumulate(&actions, &arms, t);

        let view = AdversaryView { t, means: &view_means, best_arm: arms.best_arm() };
        let mut drawn = Vec::new();
        for (i, &a) in actions.iter().enumerate() {
            let r = reward_at(&arms, a, &streams, i, t);
            if opts.record_rewards {
                drawn.push(r);
            }
            match &mut agents {
                Agents::Ucb(est) => est[i].record_own(a, see(r)),
                Agents::Rc(rc) => rc.observe(i, a, see(r), i, t),
            }
            if let Some(ch) = &mut channel {
                ch.broadcast(Message::new(a, r, i, t), t, &view);
            }
        }
        if let Some(ch) = &mut channel {
            for d in ch.deliver(t + 1) {
                let m = d.msg;
                match &mut agents {
                    Agents::Ucb(est) => est[d.recipient].ingest(m.arm, see(m.reward), m.origin_time, t + 1, hold),
                    Agents::Rc(rc) => rc.observe(d.recipient, m.arm, see(m.reward), m.origin, m.origin_time),
                }
            }
        }
        if opts.record_actions {
            log_actions.push(actions.clone());
        }
        if opts.record_rewards {
            log_rewards.push(drawn);
        }
    }

    let (leaders, lambda, epochs, epoch_violations) = match &agents {
        Agents::Rc(rc) => (
            rc.leaders(),
            Some(rc.lambda()),
            rc.records().into_iter().flat_map(|r| r.iter().cloned()).collect(),
            rc.violations(),
        ),
        Agents::Ucb(_) => (Vec::new(), None, Vec::new(), 0),
    };
    Ok(RunDetail {
        trace,
        gamma,
        accept_p,
        channel: channel.map(|c| c.stats()).unwrap_or_default(),
        actions: log_actions,
        rewards: log_rewards,
        leaders,
        lambda,
        epochs,
        epoch_violations,
    })
}

/// Pointwise statistics of cumulative group regret over repetitions.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateResult {
    pub label: String,
    pub reps: usize,
    pub mean: Vec<f64>,
    /// Sample standard deviation (zero for a single repetition).
    pub std: Vec<f64>,
    /// Final cumulative regret of each repetition, in repetition order.
    pub finals: Vec<f64>,
    pub theory: Option<Vec<f64>>,
}

impl AggregateResult {
    pub fn horizon(&self) -> u64 {
        self.mean.len() as u64
    }

    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn final_std(&self) -> f64 {
        self.std.last().copied().unwrap_or(0.0)
    }

    pub fn from_traces(label: impl Into<String>, traces: &[RegretTrace]) -> Result<Self> {
        let reps = traces.len();
        if reps == 0 {
            return Err(Error::Output("no repetitions to aggregate".into()));
        }
        let horizon = traces[0].cumulative().len();
        if traces.iter().any(|t| t.cumulative().len() != horizon) {
            return Err(Error::Output("repetitions have different horizons".into()));
        }
        let mut mean = vec![0.0; horizon];
        for tr in traces {
            for (m, &x) in mean.iter_mut().zip(tr.cumulative()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= reps as f64);
        let mut std = vec![0.0; horizon];
        if reps > 1 {
            for tr in traces {
                for ((s, &x), &m) in std.iter_mut().zip(tr.cumulative()).zip(&mean) {
                    *s += (x - m) * (x - m);
                }
            }
            std.iter_mut().for_each(|s| *s = (*s / (reps - 1) as f64).sqrt());
        }
        Ok(Self {
            label: label.into(),
            reps,
            mean,
            std,
            finals: traces.iter().map(RegretTrace::final_regret).collect(),
            theory: None,
        })
    }
}

/// All repetitions of `cfg`, run in parallel and merged in repetition order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    cfg.validate()?;
    let traces = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| run_single(cfg, rep))
        .collect::<Result<Vec<_>>>()?;
    let mut agg = AggregateResult::from_traces(cfg.label(), &traces)?;
    if let Some(th) = cfg.theory {
        agg.theory = Some(theory_bound(cfg, th)?);
    }
    Ok(agg)
}

/// One aggregate per grid point (cartesian product over the axes), in
/// row-major order. Every point shares the seeds of `base`.
pub fn sweep(base: &ExperimentConfig, axes: &[(String, Vec<f64>)]) -> Result<Vec<AggregateResult>> {
    if axes.is_empty() || axes.iter().any(|(_, v)| v.is_empty()) {
        return Err(Error::config("sweep", "empty parameter grid"));
    }
    let mut points: Vec<(String, ExperimentConfig)> = vec![(String::new(), base.clone())];
    for (name, values) in axes {
        let mut next = Vec::with_capacity(points.len() * values.len());
        for (label, cfg) in &points {
            for &v in values {
                let mut c = cfg.clone();
                c.set_param(name, v)?;
                let part = format!("{name}={}", crate::output::fmt_g6(v));
                let l = if label.is_empty() { part } else { format!("{label},{part}") };
                next.push((l, c));
            }
        }
        points = next;
    }
    let prefix = base.label.clone();
    points
        .into_iter()
        .map(|(label, mut c)| {
            c.label = Some(match &prefix {
                Some(p) => format!("{p} {label}"),
                None => label,
            });
            run_experiment(&c)
        })
        .collect()
}

/// `8 (xi + 1) sigma^2`.
pub fn g_const(xi: f64, sigma: f64) -> f64 {
    8.0 * (xi + 1.0) * sigma * sigma
}

/// `M sum(gaps) + 4 sum_i (3 ln(3(d_i + 1)) + ln(d_i + 1)) sum(gaps)`.
pub fn f_term(m: f64, degrees: &[usize], gap_sum: f64) -> f64 {
    let s: f64 = degrees
        .iter()
        .map(|&d| {
            let d1 = d as f64 + 1.0;
            3.0 * (3.0 * d1).ln() + d1.ln()
        })
        .sum();
    m * gap_sum + 4.0 * s * gap_sum
}

/// Outstanding-message allowance `N E[tau] + 2 ln t + 2 sqrt(N E[tau] ln t)`.
pub fn d_total(n: usize, mean_delay: f64, t: u64) -> f64 {
    let ne = n as f64 * mean_delay;
    let lt = (t as f64).ln();
    ne + 2.0 * lt + 2.0 * (ne * lt).sqrt()
}

/// Graph-dependent pieces of a bound: `coef * sum ln t / gap + extra(t)`.
struct BoundParts {
    coef: f64,
    constant: f64,
    delay_n: Option<(usize, f64)>,
}

fn bound_parts(cfg: &ExperimentConfig, g: &Graph, th: Theorem, arms: &ArmSet) -> Result<BoundParts> {
    let gamma = cfg.gamma.resolve(g)?;
    let n = g.n();
    let gap_sum = arms.gap_sum();
    let p = cfg.link_p;
    let comm = cfg.variant.communicates();
    let eff = |probs: Vec<f64>| if comm { probs } else { vec![0.0; probs.len()] };
    Ok(match th {
        Theorem::LfRs => {
            let pi = eff(cfg.accept_rule().resolve(g)?);
            let cover = greedy_clique_cover(g);
            let coef = pi.iter().map(|&x| 1.0 - x * p).sum::<f64>()
                + cover
                    .iter()
                    .map(|c| c.iter().map(|&i| pi[i]).fold(0.0, f64::max) * p)
                    .sum::<f64>();
            BoundParts { coef, constant: f_term(5.0 * n as f64, &g.degrees(), gap_sum), delay_n: None }
        }
        Theorem::LfMp => {
            let gp = g.power(gamma);
            let pi = eff(cfg.accept_rule().resolve(&gp)?);
            let dist = g.distances()?;
            let cover = greedy_clique_cover(&gp);
            let mut hops = vec![1u32; n];
            for c in &cover {
                for &i in c {
                    hops[i] = c.iter().map(|&j| dist.get(i, j)).max().unwrap_or(0).max(1);
                }
            }
            let reach: Vec<f64> = (0..n).map(|i| pi[i] * p.powi(hops[i] as i32)).collect();
            let coef = reach.iter().map(|&x| 1.0 - x).sum::<f64>()
                + cover.len() as f64 * reach.iter().copied().fold(0.0, f64::max);
            let m = (gamma as f64 + 4.0) * n as f64;
            BoundParts { coef, constant: f_term(m, &gp.degrees(), gap_sum), delay_n: None }
        }
        Theorem::Sd => {
            let chi = greedy_clique_cover(g).len() as f64;
            let coef = if comm { chi } else { n as f64 };
            BoundParts {
                coef,
                constant: f_term(5.0 * n as f64, &g.degrees(), gap_sum),
                delay_n: comm.then(|| (n, cfg.delay.expected_lag())),
            }
        }
    })
}

/// Per-round bound curve `t = 1..=T`, averaged over repetition graphs when
/// graphs are resampled.
pub fn theory_bound(cfg: &ExperimentConfig, th: Theorem) -> Result<Vec<f64>> {
    let arms = make_arms(&cfg.arm_spec()?)?;
    let inv_gaps: f64 = arms.suboptimal_gaps()?.iter().map(|d| 1.0 / d).sum();
    let gap_sum = arms.gap_sum();
    let g_c = g_const(cfg.xi, cfg.sigma);
    let graphs = if cfg.resample_graph && cfg.graph.is_random() { cfg.reps as u64 } else { 1 };
    let mut curve = vec![0.0; cfg.horizon as usize];
    for rep in 0..graphs {
        let g = rep_graph(cfg, rep)?;
        let parts = bound_parts(cfg, &g, th, &arms)?;
        for (idx, c) in curve.iter_mut().enumerate() {
            let t = idx as u64 + 1;
            let mut b = g_c * parts.coef * (t as f64).ln() * inv_gaps + parts.constant;
            if let Some((n, e)) = parts.delay_n {
                b += d_total(n, e, t) * gap_sum;
            }
            *c += b / graphs as f64;
        }
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(variant: PolicyVariant, graph: &str, k: usize, t: u64) -> ExperimentConfig {
        ExperimentConfig::new(variant, graph.parse().unwrap(), k, t)
    }

    #[test]
    fn constants() {
        assert!((g_const(1.1, 1.0) - 16.8).abs() < 1e-12);
        let want = 500.0 + 2.0 * 500f64.ln() + 2.0 * (500.0 * 500f64.ln()).sqrt();
        assert!((d_total(50, 10.0, 500) - want).abs() < 1e-9);
        assert!((d_total(50, 10.0, 500) - 623.9).abs() < 0.1);
    }

    #[test]
    fn single_round_all_pull_arm_zero() {
        let c = cfg(PolicyVariant::CoopUcb, "complete(4)", 3, 1);
        assert_eq!(run_single(&c, 0).unwrap().final_regret(), 0.0);
    }

    #[test]
    fn deterministic() {
        let mut c = cfg(PolicyVariant::RclLf, "erdos_renyi(8,0.5)", 3, 200);
        c.link_p = 0.6;
        assert_eq!(run_single(&c, 3).unwrap(), run_single(&c, 3).unwrap());
    }

    #[test]
    fn single_rep_has_zero_std() {
        let c = cfg(PolicyVariant::LocalUcb, "complete(3)", 2, 50);
        let a = run_experiment(&c).unwrap();
        assert!(a.std.iter().all(|&s| s == 0.0));
        assert!(a.mean.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn perfect_complete_graph_coefficient_is_one() {
        let c = cfg(PolicyVariant::CoopUcb, "complete(6)", 2, 10);
        let arms = make_arms(&c.arm_spec().unwrap()).unwrap();
        let g = rep_graph(&c, 0).unwrap();
        assert!((bound_parts(&c, &g, Theorem::LfRs, &arms).unwrap().coef - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_gap_rejected() {
        let mut c = cfg(PolicyVariant::CoopUcb, "complete(3)", 2, 10);
        c.arms = Some(crate::env::ArmSpec { family: crate::env::ArmFamily::Gaussian, means: vec![0.5, 0.5], sigma: 1.0 });
        assert!(matches!(theory_bound(&c, Theorem::LfRs), Err(Error::ZeroGap { .. })));
    }

    #[test]
    fn empty_grid_rejected() {
        let c = cfg(PolicyVariant::CoopUcb, "complete(3)", 2, 10);
        assert!(sweep(&c, &[]).is_err());
        assert!(sweep(&c, &[("link_p".into(), vec![])]).is_err());
        let r = sweep(&c, &[("link_p".into(), vec![0.0, 0.5, 1.0])]).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r[1].label, "link_p=0.5");
    }

    #[test]
    fn rc_runs_on_power_graph_leaders() {
        let mut c = cfg(PolicyVariant::RclRc, "path(5)", 3, 400);
        c.gamma = crate::config::GammaSetting::Fixed(2);
        c.lambda_scale = 0.002;
        let d = run_single_detailed(&c, 0, RunOptions::default()).unwrap();
        assert!(!d.leaders.is_empty());
        assert_eq!(d.epoch_violations, 0);
    }
}
