//! Lower-bound witness pairs: same-size graphs in a concentrated-degree
//! class that sit a bounded number of node rewirings apart yet differ
//! markedly in edge density. Any private estimator must err on one of them,
//! which is what the harness audit checks quantitatively.

use crate::error::{Error, Result};
use crate::graph::{concentration_parameter, edge_density, Graph};

/// Floor that tolerates one-ulp-low rationals such as `1.0 / 0.1`.
pub(crate) fn floor_tolerant(x: f64) -> f64 {
    (x + 1e-9).floor()
}

/// Ceiling that tolerates one-ulp-high rationals such as `100.0 * 0.1`.
pub(crate) fn ceil_tolerant(x: f64) -> f64 {
    (x - 1e-9).ceil()
}

/// Two graphs certified node-adjacent within `node_distance_bound` steps,
/// both claimed members of the concentrated-degree class for `k`.
#[derive(Debug, Clone)]
pub struct WitnessPair {
    pub g0: Graph,
    pub g1: Graph,
    /// Concentration parameter both graphs are claimed to satisfy.
    pub k: u32,
    /// Node distance certified by the construction.
    pub node_distance_bound: u32,
    /// `|p_{G0} - p_{G1}|`, recomputed from the graphs.
    pub density_gap: f64,
}

/// Recomputed facts about a witness pair, for audit reports.
#[derive(Debug, Clone, Copy)]
pub struct WitnessCheck {
    pub g0_concentration: u32,
    pub g1_concentration: u32,
    /// Both graphs genuinely lie in the class for `k`.
    pub in_class: bool,
    pub gap: f64,
}

impl WitnessPair {
    /// Re-derives membership and the density gap from the graphs themselves.
    pub fn check(&self) -> Result<WitnessCheck> {
        let c0 = concentration_parameter(&self.g0)?;
        let c1 = concentration_parameter(&self.g1)?;
        let gap = (edge_density(&self.g0)? - edge_density(&self.g1)?).abs();
        Ok(WitnessCheck {
            g0_concentration: c0,
            g1_concentration: c1,
            in_class: c0 <= self.k && c1 <= self.k,
            gap,
        })
    }
}

/// Large-`k` witness pair: the empty graph against a bipartite graph whose
/// `floor(1/eps)` left nodes are each joined to `k` right nodes assigned
/// round-robin, wrapping around the right side.
///
/// The pair sits at node distance `floor(1/eps)` and its density gap is
/// `floor(1/eps) * k / C(n, 2)`. Membership in the class for `k` holds for
/// `n` beyond a small threshold; [`WitnessPair::check`] reports rather than
/// asserts it.
pub fn witness_large_k(n: u32, k: u32, eps: f64) -> Result<WitnessPair> {
    if n < 2 {
        return Err(Error::InvalidParameter("need n >= 2".into()));
    }
    if k < 1 {
        return Err(Error::InvalidParameter("need k >= 1".into()));
    }
    if eps.is_nan() || eps < 2.0 / n as f64 {
        return Err(Error::InvalidParameter(format!(
            "need eps >= 2/n = {}, got {eps}",
            2.0 / n as f64
        )));
    }
    let left = floor_tolerant(1.0 / eps) as u32;
    if left < 1 {
        return Err(Error::Infeasible("floor(1/eps) left nodes is zero".into()));
    }
    if left >= n || k > n - left {
        return Err(Error::Infeasible(format!(
            "cannot give {left} left nodes {k} distinct right neighbors out of n = {n}"
        )));
    }

    let right = n - left;
    let mut edges = Vec::with_capacity((left as usize) * (k as usize));
    let mut cursor = 0u64;
    for l in 0..left {
        for _ in 0..k {
            edges.push((l, left + (cursor % right as u64) as u32));
            cursor += 1;
        }
    }
    let g0 = Graph::empty(n)?;
    let g1 = Graph::from_edges(n, &edges)?;
    let density_gap = (edge_density(&g1)? - edge_density(&g0)?).abs();
    Ok(WitnessPair {
        g0,
        g1,
        k,
        node_distance_bound: left,
        density_gap,
    })
}

fn disjoint_cliques(n: u32, count: u32) -> Result<Graph> {
    // Remainder nodes go one per clique, largest cliques first.
    let base = n / count;
    let extra = n % count;
    let mut edges = Vec::new();
    let mut start = 0u32;
    for c in 0..count {
        let size = base + u32::from(c < extra);
        for a in start..start + size {
            for b in (a + 1)..start + size {
                edges.push((a, b));
            }
        }
        start += size;
    }
    Graph::from_edges(n, &edges)
}

/// Small-`k` witness pair: `ceil(n * eps)` disjoint near-equal cliques
/// against `ceil(n * eps) + 1` of them. Both graphs lie in the class for
/// `k = 1`, sit at node distance `floor(n / (i + 1))`, and differ in density
/// by at least `C(l + 1, 2) / C(n, 2)` for `l = floor(n / (i + 1))`.
pub fn witness_small_k(n: u32, eps: f64) -> Result<WitnessPair> {
    if n < 4 {
        return Err(Error::InvalidParameter("need n >= 4".into()));
    }
    if eps.is_nan() || eps < 2.0 / n as f64 || eps > 0.25 {
        return Err(Error::InvalidParameter(format!(
            "need 2/n <= eps <= 1/4, got {eps} at n = {n}"
        )));
    }
    let i = ceil_tolerant(n as f64 * eps) as u32;
    let g0 = disjoint_cliques(n, i)?;
    let g1 = disjoint_cliques(n, i + 1)?;
    let density_gap = (edge_density(&g0)? - edge_density(&g1)?).abs();
    Ok(WitnessPair {
        g0,
        g1,
        k: 1,
        node_distance_bound: n / (i + 1),
        density_gap,
    })
}
