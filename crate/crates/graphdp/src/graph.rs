//! Immutable undirected simple graphs with the degree statistics the
//! estimators consume.
//!
//! Graphs are frozen at construction: rewiring returns a new graph, so
//! estimators can never mutate their input. Adjacency lists are kept sorted,
//! giving `O(deg v)` neighbor iteration and `O(log deg)` membership tests.
//! A structural fingerprint (FNV-1a over the sorted edge list) lets weight
//! profiles detect being replayed against the wrong graph.

use crate::error::{Error, Result};
use crate::noise::RandomStream;

pub type NodeId = u32;

/// Number of unordered node pairs, `n * (n - 1) / 2`.
pub fn pair_count(n: u32) -> u64 {
    let n = n as u64;
    n * (n - 1) / 2
}

/// An immutable undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: u32,
    m: u64,
    adj: Vec<Vec<NodeId>>,
    fingerprint: u64,
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv1a(hash: u64, word: u64) -> u64 {
    let mut h = hash;
    for byte in word.to_le_bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

impl Graph {
    /// Builds a graph from an edge list. Edges may be given in either
    /// orientation but must name distinct in-range nodes and contain no
    /// duplicates.
    pub fn from_edges(n: u32, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("node count must be positive".into()));
        }
        let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n as usize];
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at node {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge incident on node {u}"
                )));
            }
        }
        Ok(Self::from_sorted_adj(n, adj))
    }

    /// `adj` must be symmetric, sorted, self-loop- and duplicate-free.
    fn from_sorted_adj(n: u32, adj: Vec<Vec<NodeId>>) -> Self {
        let m = adj.iter().map(|l| l.len() as u64).sum::<u64>() / 2;
        let mut hash = fnv1a(FNV_OFFSET, n as u64);
        for (u, list) in adj.iter().enumerate() {
            for &v in list {
                if (u as u32) < v {
                    hash = fnv1a(fnv1a(hash, u as u64), v as u64);
                }
            }
        }
        Self {
            n,
            m,
            adj,
            fingerprint: hash,
        }
    }

    pub fn empty(n: u32) -> Result<Self> {
        Self::from_edges(n, &[])
    }

    pub fn complete(n: u32) -> Result<Self> {
        let mut edges = Vec::with_capacity(pair_count(n) as usize);
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        Self::from_edges(n, &edges)
    }

    /// Cycle on `n >= 3` nodes: `0-1-...-(n-1)-0`.
    pub fn cycle(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph("cycle needs n >= 3".into()));
        }
        let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        Self::from_edges(n, &edges)
    }

    /// Star on `n >= 2` nodes: node 0 joined to every other node.
    pub fn star(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph("star needs n >= 2".into()));
        }
        let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
        Self::from_edges(n, &edges)
    }

    /// Circulant graph: each node joined to its `half_deg` nearest neighbors
    /// on either side of the ring, hence `2 * half_deg`-regular.
    pub fn circulant(n: u32, half_deg: u32) -> Result<Self> {
        if n < 2 * half_deg + 1 {
            return Err(Error::InvalidGraph(format!(
                "circulant needs n >= 2 * half_deg + 1, got n = {n}, half_deg = {half_deg}"
            )));
        }
        let mut edges = Vec::new();
        for u in 0..n {
            for step in 1..=half_deg {
                edges.push((u, (u + step) % n));
            }
        }
        Self::from_edges(n, &edges)
    }

    pub fn node_count(&self) -> u32 {
        self.n
    }

    pub fn edge_count(&self) -> u64 {
        self.m
    }

    pub fn degree(&self, v: NodeId) -> u32 {
        self.adj[v as usize].len() as u32
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v as usize]
    }

    /// The edge indicator `x_e` for the pair `{u, v}`.
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u != v && self.adj[u as usize].binary_search(&v).is_ok()
    }

    /// Edges as sorted `(u, v)` pairs with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let u = u as u32;
            list.iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Structural hash of `(n, edge set)`.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }
}

/// Empirical edge density `p_G = m / C(n, 2)`.
pub fn edge_density(g: &Graph) -> Result<f64> {
    if g.n < 2 {
        return Err(Error::InvalidGraph(
            "edge density needs at least 2 nodes".into(),
        ));
    }
    Ok(g.m as f64 / pair_count(g.n) as f64)
}

/// Per-node degrees plus the empirical density and average degree.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeSummary {
    pub degrees: Vec<u32>,
    /// Empirical edge density `p_G`.
    pub density: f64,
    /// Empirical average degree, `(n - 1) * p_G`.
    pub d_bar: f64,
    pub min_deg: u32,
    pub max_deg: u32,
}

pub fn degree_summary(g: &Graph) -> Result<DegreeSummary> {
    let density = edge_density(g)?;
    let degrees: Vec<u32> = (0..g.n).map(|v| g.degree(v)).collect();
    let min_deg = degrees.iter().copied().min().unwrap_or(0);
    let max_deg = degrees.iter().copied().max().unwrap_or(0);
    Ok(DegreeSummary {
        degrees,
        density,
        d_bar: (g.n as f64 - 1.0) * density,
        min_deg,
        max_deg,
    })
}

/// Smallest integer `k >= 0` such that every degree lies in
/// `[d_bar - k, d_bar + k]`; the graph is then a member of the
/// concentrated-degree class for this and every larger `k`.
///
/// Computed in integer arithmetic (`|n * deg - 2m|` against `n * k`) so
/// boundary ties are exact.
pub fn concentration_parameter(g: &Graph) -> Result<u32> {
    if g.n < 2 {
        return Err(Error::InvalidGraph(
            "concentration parameter needs at least 2 nodes".into(),
        ));
    }
    let n = g.n as u64;
    let two_m = 2 * g.m;
    let max_dev = (0..g.n)
        .map(|v| (n * g.degree(v) as u64).abs_diff(two_m))
        .max()
        .unwrap_or(0);
    // ceil(max_dev / n)
    Ok(max_dev.div_ceil(n) as u32)
}

/// Samples an Erdos-Renyi graph: each of the `C(n, 2)` pairs is included
/// independently with probability `p`. Deterministic given the stream.
pub fn sample_er(n: u32, p: f64, rng: &mut RandomStream) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidGraph("node count must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "edge probability must lie in [0, 1], got {p}"
        )));
    }
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n as usize];
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.uniform01() < p {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
        }
    }
    // Ascending pair order keeps each list sorted as built.
    Ok(Graph::from_sorted_adj(n, adj))
}

/// Returns a copy of `g` with node `v`'s incident edges replaced by
/// `{v, u}` for each `u` in `new_neighbors`. The result is node-adjacent to
/// `g` by construction.
pub fn rewire_node(g: &Graph, v: NodeId, new_neighbors: &[NodeId]) -> Result<Graph> {
    if v >= g.n {
        return Err(Error::InvalidParameter(format!(
            "node {v} out of range for n = {}",
            g.n
        )));
    }
    let mut wanted: Vec<NodeId> = new_neighbors.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    if wanted.binary_search(&v).is_ok() {
        return Err(Error::InvalidGraph(format!(
            "rewiring node {v} to itself would create a self-loop"
        )));
    }
    if let Some(&u) = wanted.iter().find(|&&u| u >= g.n) {
        return Err(Error::InvalidParameter(format!(
            "neighbor {u} out of range for n = {}",
            g.n
        )));
    }
    let mut adj = g.adj.clone();
    // Drop v from its old neighbors' lists, then splice in the new ones.
    let old = std::mem::take(&mut adj[v as usize]);
    for &u in &old {
        let list = &mut adj[u as usize];
        if let Ok(pos) = list.binary_search(&v) {
            list.remove(pos);
        }
    }
    for &u in &wanted {
        let list = &mut adj[u as usize];
        if let Err(pos) = list.binary_search(&v) {
            list.insert(pos, v);
        }
    }
    adj[v as usize] = wanted;
    Ok(Graph::from_sorted_adj(g.n, adj))
}
