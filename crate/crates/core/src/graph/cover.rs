use num_rational::Ratio;

use super::{DistanceMatrix, Graph};

/// Partitions the vertices into cliques: each clique starts at the
/// lowest-index uncovered vertex and absorbs, in index order, every
/// uncovered vertex adjacent to all current members.
pub fn greedy_clique_cover(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut covered = vec![false; n];
    let mut cover = Vec::new();
    for seed in 0..n {
        if covered[seed] {
            continue;
        }
        let mut clique = vec![seed];
        covered[seed] = true;
        for v in seed + 1..n {
            if !covered[v] && clique.iter().all(|&u| g.has_edge(u, v)) {
                clique.push(v);
                covered[v] = true;
            }
        }
        cover.push(clique);
    }
    cover
}

/// Highest-uncovered-closed-neighbourhood greedy, lowest index on ties.
/// Returned ascending.
pub fn greedy_dominating_set(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut covered = vec![false; n];
    let mut remaining = n;
    let mut chosen = Vec::new();
    while remaining > 0 {
        let gain = |v: usize| {
            usize::from(!covered[v]) + g.neighbors(v).iter().filter(|&&u| !covered[u]).count()
        };
        let mut best = 0;
        let mut best_gain = gain(0);
        for v in 1..n {
            let x = gain(v);
            if x > best_gain {
                best = v;
                best_gain = x;
            }
        }
        chosen.push(best);
        for u in std::iter::once(best).chain(g.neighbors(best).iter().copied()) {
            if !covered[u] {
                covered[u] = true;
                remaining -= 1;
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

pub fn is_clique_partition(g: &Graph, cover: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; g.n()];
    for block in cover {
        if block.is_empty() || !g.is_clique(block) {
            return false;
        }
        for &v in block {
            if v >= g.n() || std::mem::replace(&mut seen[v], true) {
                return false;
            }
        }
    }
    seen.into_iter().all(|x| x)
}

pub fn is_dominating_set(g: &Graph, set: &[usize]) -> bool {
    let mut dominated = vec![false; g.n()];
    for &v in set {
        dominated[v] = true;
        for &u in g.neighbors(v) {
            dominated[u] = true;
        }
    }
    dominated.into_iter().all(|x| x)
}

/// Turán's lower bound on the independence number, `n / (1 + d_bar)`,
/// held exactly as `n^2 / (n + 2|E|)`.
pub fn turan_alpha_star(g: &Graph) -> Ratio<u64> {
    let n = g.n() as u64;
    let m = g.edge_count() as u64;
    Ratio::new(n * n, n + 2 * m)
}

/// Average message-passing delay: `sum_i i * d_bar_{=i}`, where `d_bar_{=i}`
/// is the mean number of vertices at distance exactly `i` from a vertex.
pub fn d_tilde(dist: &DistanceMatrix) -> f64 {
    let n = dist.n();
    if n == 0 {
        return 0.0;
    }
    let total: u64 = (0..n).flat_map(|i| dist.row(i).iter().map(|&d| d as u64)).sum();
    total as f64 / n as f64
}
