use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};
use crate::rng::splitmix64;

/// Resampling budget for random families before giving up on connectivity.
pub const MAX_CONNECT_ATTEMPTS: usize = 100;

/// Topology descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub enum GraphSpec {
    ErdosRenyi { n: usize, p: f64 },
    /// `hubs` hub vertices joined in a path, each with `leaves` pendant leaves.
    MultiStar { hubs: usize, leaves: usize },
    RandomTree { n: usize },
    Cycle { n: usize },
    Path { n: usize },
    Complete { n: usize },
    EdgeList { n: usize, edges: Vec<(usize, usize)> },
}

impl GraphSpec {
    pub fn vertex_count(&self) -> usize {
        match *self {
            GraphSpec::ErdosRenyi { n, .. }
            | GraphSpec::RandomTree { n }
            | GraphSpec::Cycle { n }
            | GraphSpec::Path { n }
            | GraphSpec::Complete { n }
            | GraphSpec::EdgeList { n, .. } => n,
            GraphSpec::MultiStar { hubs, leaves } => hubs * (1 + leaves),
        }
    }

    /// Whether the seed influences the generated graph.
    pub fn is_random(&self) -> bool {
        matches!(self, GraphSpec::ErdosRenyi { .. } | GraphSpec::RandomTree { .. })
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::ErdosRenyi { n, p } => write!(f, "erdos_renyi({n},{p})"),
            GraphSpec::MultiStar { hubs, leaves } => write!(f, "multi_star({hubs},{leaves})"),
            GraphSpec::RandomTree { n } => write!(f, "random_tree({n})"),
            GraphSpec::Cycle { n } => write!(f, "cycle({n})"),
            GraphSpec::Path { n } => write!(f, "path({n})"),
            GraphSpec::Complete { n } => write!(f, "complete({n})"),
            GraphSpec::EdgeList { n, edges } => {
                let es: Vec<String> = edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
                write!(f, "edge_list({n};{})", es.join(","))
            }
        }
    }
}

/// Accepts `name(args)` text or `{"n": .., "edges": [[u, v], ..]}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SpecRepr {
    Text(String),
    Edges { n: usize, edges: Vec<(usize, usize)> },
}

impl TryFrom<SpecRepr> for GraphSpec {
    type Error = Error;

    fn try_from(r: SpecRepr) -> Result<Self> {
        match r {
            SpecRepr::Text(s) => parse_spec(&s),
            SpecRepr::Edges { n, edges } => Ok(GraphSpec::EdgeList { n, edges }),
        }
    }
}

impl From<GraphSpec> for SpecRepr {
    fn from(s: GraphSpec) -> Self {
        match s {
            GraphSpec::EdgeList { n, edges } => SpecRepr::Edges { n, edges },
            other => SpecRepr::Text(other.to_string()),
        }
    }
}

pub(super) fn parse_spec(text: &str) -> Result<GraphSpec> {
    let bad = |msg: &str| Error::InvalidGraph(format!("`{text}`: {msg}"));
    let s = text.trim();
    let open = s.find('(').ok_or_else(|| bad("expected name(args)"))?;
    if !s.ends_with(')') {
        return Err(bad("missing closing parenthesis"));
    }
    let name = s[..open].trim();
    let body = &s[open + 1..s.len() - 1];

    if name == "edge_list" {
        let (n, rest) = body.split_once(';').unwrap_or((body, ""));
        let n: usize = n.trim().parse().map_err(|_| bad("bad vertex count"))?;
        let mut edges = Vec::new();
        for tok in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (u, v) = tok.split_once('-').ok_or_else(|| bad("edges are written u-v"))?;
            let u = u.trim().parse().map_err(|_| bad("bad edge endpoint"))?;
            let v = v.trim().parse().map_err(|_| bad("bad edge endpoint"))?;
            edges.push((u, v));
        }
        return Ok(GraphSpec::EdgeList { n, edges });
    }

    let args: Vec<&str> = body.split(',').map(str::trim).collect();
    let int = |i: usize| -> Result<usize> {
        args.get(i)
            .and_then(|a| a.parse().ok())
            .ok_or_else(|| bad("expected an integer argument"))
    };
    let arity = |k: usize| -> Result<()> {
        if args.len() == k {
            Ok(())
        } else {
            Err(bad(&format!("expected {k} argument(s)")))
        }
    };
    let spec = match name {
        "erdos_renyi" => {
            arity(2)?;
            let p: f64 = args[1].parse().map_err(|_| bad("bad edge probability"))?;
            GraphSpec::ErdosRenyi { n: int(0)?, p }
        }
        "multi_star" => {
            arity(2)?;
            GraphSpec::MultiStar { hubs: int(0)?, leaves: int(1)? }
        }
        "random_tree" => {
            arity(1)?;
            GraphSpec::RandomTree { n: int(0)? }
        }
        "cycle" => {
            arity(1)?;
            GraphSpec::Cycle { n: int(0)? }
        }
        "path" => {
            arity(1)?;
            GraphSpec::Path { n: int(0)? }
        }
        "complete" => {
            arity(1)?;
            GraphSpec::Complete { n: int(0)? }
        }
        "star" => {
            // star(n): one hub with n-1 leaves
            arity(1)?;
            let n = int(0)?;
            if n < 2 {
                return Err(bad("star needs n >= 2"));
            }
            GraphSpec::MultiStar { hubs: 1, leaves: n - 1 }
        }
        _ => return Err(bad("unknown topology")),
    };
    Ok(spec)
}

/// Builds a connected graph. Identical `(spec, seed)` pairs give identical
/// graphs; deterministic families ignore the seed.
pub fn generate(spec: &GraphSpec, seed: u64) -> Result<Graph> {
    let n = spec.vertex_count();
    if n < 1 {
        return Err(Error::GraphGeneration(format!("{spec}: need at least 1 vertex")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    let g = match *spec {
        GraphSpec::ErdosRenyi { n, p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::GraphGeneration(format!("{spec}: edge probability outside [0, 1]")));
            }
            let mut found = None;
            for _ in 0..MAX_CONNECT_ATTEMPTS {
                let mut edges = Vec::new();
                for u in 0..n {
                    for v in u + 1..n {
                        if rng.random::<f64>() < p {
                            edges.push((u, v));
                        }
                    }
                }
                let g = Graph::from_edges(n, &edges)?;
                if g.is_connected() {
                    found = Some(g);
                    break;
                }
            }
            found.ok_or_else(|| {
                Error::GraphGeneration(format!(
                    "{spec}: no connected sample in {MAX_CONNECT_ATTEMPTS} attempts"
                ))
            })?
        }
        GraphSpec::MultiStar { hubs, leaves } => {
            if hubs == 0 {
                return Err(Error::GraphGeneration(format!("{spec}: need at least one hub")));
            }
            let mut edges: Vec<(usize, usize)> = (1..hubs).map(|h| (h - 1, h)).collect();
            for h in 0..hubs {
                edges.extend((0..leaves).map(|l| (h, hubs + h * leaves + l)));
            }
            Graph::from_edges(n, &edges)?
        }
        GraphSpec::RandomTree { n } => prufer_tree(n, &mut rng)?,
        GraphSpec::Cycle { n } => {
            if n < 3 {
                return Err(Error::GraphGeneration(format!("{spec}: cycle needs n >= 3")));
            }
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            Graph::from_edges(n, &edges)?
        }
        GraphSpec::Path { n } => {
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            Graph::from_edges(n, &edges)?
        }
        GraphSpec::Complete { n } => Graph::complete(n),
        GraphSpec::EdgeList { n, ref edges } => {
            let g = Graph::from_edges(n, edges)?;
            if !g.is_connected() {
                return Err(Error::GraphGeneration(format!("{spec}: edge list is not connected")));
            }
            g
        }
    };
    debug_assert!(g.is_connected());
    Ok(g)
}

/// Uniform labelled tree decoded from a random Prüfer sequence.
fn prufer_tree(n: usize, rng: &mut impl Rng) -> Result<Graph> {
    if n <= 2 {
        return Graph::from_edges(n, if n == 2 { &[(0, 1)] } else { &[] });
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &x in &seq {
        degree[x] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &x in &seq {
        let Reverse(leaf) = leaves.pop().expect("Prüfer decoding always has a leaf");
        edges.push((leaf, x));
        degree[x] -= 1;
        if degree[x] == 1 {
            leaves.push(Reverse(x));
        }
    }
    let Reverse(a) = leaves.pop().unwrap();
    let Reverse(b) = leaves.pop().unwrap();
    edges.push((a, b));
    Graph::from_edges(n, &edges)
}
