use coopbandit::env::{ArmFamily, ArmSpec};
use coopbandit::policy::PolicyVariant as V;
use coopbandit::{run_experiment, run_single, run_single_detailed, Error, ExperimentConfig, RunOptions};

fn cfg(v: V, graph: &str, k: usize, t: u64) -> ExperimentConfig {
    ExperimentConfig::new(v, graph.parse().unwrap(), k, t)
}

#[test]
fn single_agent_two_arm_regret_stays_small() {
    let c = cfg(V::LocalUcb, "complete(1)", 2, 10_000);
    let within = (0..100).filter(|&rep| run_single(&c, rep).unwrap().final_regret() <= 200.0).count();
    assert!(within >= 95, "{within}/100 reps within 200");
}

#[test]
fn first_round_pulls_arm_zero_everywhere() {
    let c = cfg(V::CoopUcb, "star(6)", 4, 1);
    let d = run_single_detailed(&c, 0, RunOptions { record_actions: true, record_rewards: false }).unwrap();
    assert_eq!(d.actions, vec![vec![0; 6]]);
    assert_eq!(d.trace.final_regret(), 0.0);
}

#[test]
fn repeated_runs_are_identical() {
    let mut c = cfg(V::RclLf, "erdos_renyi(12,0.4)", 5, 300);
    c.link_p = 0.6;
    assert_eq!(run_single(&c, 3).unwrap(), run_single(&c, 3).unwrap());
    assert_ne!(run_single(&c, 3).unwrap(), run_single(&c, 4).unwrap());
}

#[test]
fn aggregate_does_not_depend_on_rep_order() {
    let mut c = cfg(V::CoopUcb, "random_tree(10)", 4, 200);
    c.reps = 6;
    let agg = run_experiment(&c).unwrap();
    let mut finals: Vec<f64> = (0..6).rev().map(|r| run_single(&c, r).unwrap().final_regret()).collect();
    finals.reverse();
    assert_eq!(agg.finals, finals);
    assert!(agg.mean.windows(2).all(|w| w[0] <= w[1]));
    assert!(agg.std.iter().all(|&s| s >= 0.0));
}

#[test]
fn single_rep_has_zero_spread() {
    let mut c = cfg(V::LocalUcb, "cycle(5)", 3, 100);
    c.reps = 1;
    assert!(run_experiment(&c).unwrap().std.iter().all(|&s| s == 0.0));
}

#[test]
fn elimination_rejects_lossy_links() {
    let mut c = cfg(V::RclRc, "complete(4)", 3, 100);
    c.link_p = 0.9;
    assert!(matches!(run_single(&c, 0), Err(Error::Unsupported(_))));
}

// Estimated gap of the worse arm after epoch m should land in
// [D/2 - 3/4 * 2^-m, 2 (D + 2^-m)] with high probability.
#[test]
fn elimination_gap_estimates_bracket_true_gap() {
    let mut c = cfg(V::RclRc, "complete(1)", 2, 20_000);
    c.arms = Some(ArmSpec { family: ArmFamily::Gaussian, means: vec![1.0, 0.5], sigma: 1.0 });
    c.lambda_scale = 0.1;
    let gap = 0.5;
    let (mut inside, mut total) = (0, 0);
    for rep in 0..100 {
        let d = run_single_detailed(&c, rep, RunOptions::default()).unwrap();
        for e in d.epochs.iter().filter(|e| e.complete) {
            let Some(g) = &e.gaps else { continue };
            let w = 0.5f64.powi(e.epoch as i32);
            total += 1;
            if g[1] >= gap / 2.0 - 0.75 * w && g[1] <= 2.0 * (gap + w) {
                inside += 1;
            }
        }
    }
    assert!(total >= 100);
    assert!(inside as f64 >= 0.9 * total as f64, "{inside}/{total}");
}
