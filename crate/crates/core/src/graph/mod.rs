//! Communication topologies and the graph quantities the policies and
//! regret bounds consume.

mod cover;
mod exact;
mod generate;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

pub use cover::{
    d_tilde, greedy_clique_cover, greedy_dominating_set, is_clique_partition, is_dominating_set,
    turan_alpha_star,
};
pub use exact::{exact_small, ExactNumbers, EXACT_LIMIT};
pub use generate::{generate, GraphSpec, MAX_CONNECT_ATTEMPTS};

/// Undirected simple graph over vertices `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
    nbrs: Vec<Vec<usize>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges())
            .finish()
    }
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges collapse; self-loops
    /// and out-of-range endpoints are rejected. Connectivity is not required.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![false; n * n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            adj[u * n + v] = true;
            adj[v * n + u] = true;
        }
        Ok(Self::from_matrix(n, adj))
    }

    fn from_matrix(n: usize, adj: Vec<bool>) -> Self {
        let nbrs = (0..n)
            .map(|u| (0..n).filter(|&v| adj[u * n + v]).collect())
            .collect();
        Self { n, adj, nbrs }
    }

    pub fn complete(n: usize) -> Self {
        let adj = (0..n * n).map(|x| x / n != x % n).collect();
        Self::from_matrix(n, adj)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n + v]
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.nbrs[u]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.nbrs[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.nbrs.iter().map(Vec::len).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.nbrs.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| self.nbrs[u].iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.nbrs.iter().all(|ns| ns.len() + 1 == self.n)
    }

    /// Hop counts from `src`; `None` for unreachable vertices. Stops
    /// expanding past `max_depth` when given.
    pub fn bfs(&self, src: usize, max_depth: Option<u32>) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.n];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            if max_depth.is_some_and(|m| du >= m) {
                continue;
            }
            for &v in &self.nbrs[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.bfs(0, None).iter().all(Option::is_some)
    }

    /// All-pairs shortest-path hop counts.
    pub fn distances(&self) -> Result<DistanceMatrix> {
        let mut d = Vec::with_capacity(self.n * self.n);
        for src in 0..self.n {
            for x in self.bfs(src, None) {
                d.push(x.ok_or(Error::Disconnected)?);
            }
        }
        Ok(DistanceMatrix { n: self.n, d })
    }

    pub fn diameter(&self) -> Result<u32> {
        Ok(self.distances()?.max())
    }

    /// The `gamma`-th power: `(i, j)` is an edge iff `1 <= d(i, j) <= gamma`.
    pub fn power(&self, gamma: u32) -> Graph {
        assert!(gamma >= 1, "graph power needs gamma >= 1");
        let n = self.n;
        let mut adj = vec![false; n * n];
        for src in 0..n {
            for (v, d) in self.bfs(src, Some(gamma)).into_iter().enumerate() {
                if matches!(d, Some(x) if x >= 1) {
                    adj[src * n + v] = true;
                }
            }
        }
        Self::from_matrix(n, adj)
    }

    /// Induced subgraph check: every pair in `set` adjacent.
    pub fn is_clique(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(a, &u)| set[a + 1..].iter().all(|&v| self.has_edge(u, v)))
    }
}

/// Dense matrix of hop counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u32>,
}

impl DistanceMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.d[i * self.n + j]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max(&self) -> u32 {
        self.d.iter().copied().max().unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.d[i * self.n..(i + 1) * self.n]
    }
}

/// Summary quantities of a connected graph.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphStats {
    pub n: usize,
    pub edges: usize,
    pub distances: DistanceMatrix,
    pub diameter: u32,
    pub degrees: Vec<usize>,
    pub d_min: usize,
    pub d_max: usize,
    pub d_bar: f64,
    pub clique_cover: Vec<Vec<usize>>,
    pub psi_set: Vec<usize>,
    pub alpha_star: Ratio<u64>,
    pub d_tilde: f64,
}

impl GraphStats {
    pub fn compute(g: &Graph) -> Result<Self> {
        let distances = g.distances()?;
        let degrees = g.degrees();
        let n = g.n();
        Ok(Self {
            n,
            edges: g.edge_count(),
            diameter: distances.max(),
            d_min: degrees.iter().copied().min().unwrap_or(0),
            d_max: degrees.iter().copied().max().unwrap_or(0),
            d_bar: if n == 0 { 0.0 } else { degrees.iter().sum::<usize>() as f64 / n as f64 },
            clique_cover: greedy_clique_cover(g),
            psi_set: greedy_dominating_set(g),
            alpha_star: turan_alpha_star(g),
            d_tilde: d_tilde(&distances),
            distances,
            degrees,
        })
    }

    /// `key=value` lines, stable for a fixed graph.
    pub fn to_key_values(&self) -> String {
        let blocks = |sets: &[Vec<usize>]| {
            sets.iter()
                .map(|c| c.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
                .collect::<Vec<_>>()
                .join(" | ")
        };
        let list = |xs: &[usize]| xs.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        kv("n", self.n.to_string());
        kv("edges", self.edges.to_string());
        kv("diameter", self.diameter.to_string());
        kv("d_min", self.d_min.to_string());
        kv("d_max", self.d_max.to_string());
        kv("d_bar", format!("{:.6}", self.d_bar));
        kv("degrees", list(&self.degrees));
        kv("clique_cover_size", self.clique_cover.len().to_string());
        kv("clique_cover", blocks(&self.clique_cover));
        kv("psi", self.psi_set.len().to_string());
        kv("psi_set", list(&self.psi_set));
        kv("alpha_star", format!("{}/{}", self.alpha_star.numer(), self.alpha_star.denom()));
        kv("alpha_star_value", format!("{:.6}", ratio_to_f64(self.alpha_star)));
        kv("d_tilde", format!("{:.6}", self.d_tilde));
        out
    }
}

pub fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Writes `u v` lines, 0-indexed, ascending.
pub fn edge_list_text(g: &Graph) -> String {
    g.edges().iter().map(|(u, v)| format!("{u} {v}\n")).collect()
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        generate::parse_spec(s)
    }
}
