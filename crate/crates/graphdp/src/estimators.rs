//! Node-private edge-density estimators.
//!
//! Three release paths share one audit record:
//!
//! * [`naive_estimate`] adds Laplace noise calibrated to the global
//!   sensitivity of the edge count (`n - 1` edges, i.e. `2/n` in density
//!   units);
//! * [`estimate_concentrated`] releases a reweighted edge statistic whose
//!   local sensitivity is small on concentrated-degree graphs, with Student
//!   t noise scaled to a smooth upper bound on that sensitivity;
//! * [`estimate_er`] first spends one Laplace release on a rough density to
//!   pick the concentration guess, then runs the concentrated estimator.
//!
//! All estimators are pure in `(graph, params, stream)` and never mutate
//! their input graph, so they can run concurrently on shared graphs as long
//! as each invocation owns its stream.

use crate::error::{Error, Result};
use crate::graph::{pair_count, rewire_node, Graph, NodeId};
use crate::noise::{sample_laplace, sample_student_t3, RandomStream};

/// How the smoothing parameter is derived from `(eps, k_star)`.
///
/// `InverseSqrt` is `min(eps, 1/sqrt(k*))`, the default; `Inverse` is the
/// `min(eps, 1/k*)` variant. For `k* = 0` both collapse to `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetaRule {
    #[default]
    InverseSqrt,
    Inverse,
}

/// Parameters of the concentrated-degree estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdParams {
    /// Privacy parameter, must be positive.
    pub eps: f64,
    /// Concentration guess `k*`.
    pub k_star: u32,
    /// Smoothing parameter derived from `eps` and `k_star`; always in
    /// `(0, eps]`.
    pub beta: f64,
    /// Constant multiplying the local-sensitivity bound. The default of 30
    /// is deliberately conservative; smaller values trade head-room in the
    /// dominance audit for less noise.
    pub sens_const: f64,
    /// Clamp released values to `[0, 1]`.
    pub clamp: bool,
    beta_rule: BetaRule,
}

impl CdParams {
    pub const DEFAULT_SENS_CONST: f64 = 30.0;

    pub fn new(eps: f64, k_star: u32) -> Result<Self> {
        if eps <= 0.0 || eps.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        let rule = BetaRule::default();
        Ok(Self {
            eps,
            k_star,
            beta: derive_beta(eps, k_star, rule),
            sens_const: Self::DEFAULT_SENS_CONST,
            clamp: true,
            beta_rule: rule,
        })
    }

    pub fn with_sens_const(mut self, sens_const: f64) -> Result<Self> {
        if sens_const <= 0.0 || sens_const.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "sens_const must be positive, got {sens_const}"
            )));
        }
        self.sens_const = sens_const;
        Ok(self)
    }

    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.clamp = clamp;
        self
    }

    pub fn with_beta_rule(mut self, rule: BetaRule) -> Self {
        self.beta_rule = rule;
        self.beta = derive_beta(self.eps, self.k_star, rule);
        self
    }

    pub fn beta_rule(&self) -> BetaRule {
        self.beta_rule
    }
}

fn derive_beta(eps: f64, k_star: u32, rule: BetaRule) -> f64 {
    if k_star == 0 {
        return eps;
    }
    let cap = match rule {
        BetaRule::InverseSqrt => 1.0 / (k_star as f64).sqrt(),
        BetaRule::Inverse => 1.0 / k_star as f64,
    };
    eps.min(cap)
}

/// Per-vertex trust weights for one `(graph, params)` pair.
///
/// `outlier_bound` is the smallest positive integer `k` such that at most
/// `k` vertices have degree outside the interval of half-width
/// `k* + 3k` around the average degree. Vertices outside that final
/// interval carry `distance > 0` and weight `max(0, 1 - beta * distance)`;
/// everyone else has weight exactly 1.
#[derive(Debug, Clone)]
pub struct WeightProfile {
    /// `k_G`: the minimal self-consistent outlier budget.
    pub outlier_bound: u32,
    /// Half-width of the trusted degree interval, `k* + 3 * k_G`.
    pub half_width: u32,
    pub interval_lo: f64,
    pub interval_hi: f64,
    pub d_bar: f64,
    /// Empirical edge density of the profiled graph.
    pub density: f64,
    /// Distance from each degree to the trusted interval (0 inside).
    pub distances: Vec<f64>,
    /// `max(0, 1 - beta * distance)` per vertex.
    pub weights: Vec<f64>,
    /// Vertices with positive distance; at most `outlier_bound` of them.
    pub outliers: Vec<NodeId>,
    graph_fingerprint: u64,
}

/// Computes the weight profile of `g` under `params`.
///
/// Degree deviations are compared in exact integer arithmetic
/// (`|n * deg - 2m|` against `n * width`), so boundary degrees count as
/// inside the interval.
pub fn compute_weight_profile(g: &Graph, params: &CdParams) -> Result<WeightProfile> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InvalidGraph(
            "weight profile needs at least 2 nodes".into(),
        ));
    }
    let n64 = n as u64;
    let two_m = 2 * g.edge_count();
    let scaled_dev: Vec<u64> = (0..n)
        .map(|v| (n64 * g.degree(v) as u64).abs_diff(two_m))
        .collect();
    let mut sorted_dev = scaled_dev.clone();
    sorted_dev.sort_unstable();

    // Count of degrees outside the interval of half-width k* + 3k.
    let outside = |k: u64| {
        let threshold = n64 * (params.k_star as u64 + 3 * k);
        (sorted_dev.len() - sorted_dev.partition_point(|&d| d <= threshold)) as u64
    };
    // The predicate `outside(k) <= k` is monotone in k and holds at k = n.
    let (mut lo, mut hi) = (1u64, n as u64);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if outside(mid) <= mid {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let outlier_bound = lo as u32;
    let half_width = params.k_star + 3 * outlier_bound;
    let scaled_width = n64 * half_width as u64;

    let distances: Vec<f64> = scaled_dev
        .iter()
        .map(|&d| d.saturating_sub(scaled_width) as f64 / n as f64)
        .collect();
    let weights: Vec<f64> = distances
        .iter()
        .map(|&t| (1.0 - params.beta * t).max(0.0))
        .collect();
    let outliers: Vec<NodeId> = (0..n)
        .filter(|&v| scaled_dev[v as usize] > scaled_width)
        .collect();

    let density = g.edge_count() as f64 / pair_count(n) as f64;
    let d_bar = (n as f64 - 1.0) * density;
    Ok(WeightProfile {
        outlier_bound,
        half_width,
        interval_lo: d_bar - half_width as f64,
        interval_hi: d_bar + half_width as f64,
        d_bar,
        density,
        distances,
        weights,
        outliers,
        graph_fingerprint: g.fingerprint(),
    })
}

/// The reweighted pair statistic: every unordered pair contributes a blend
/// `w_e * x_e + (1 - w_e) * p_G` with `w_e = min(w_u, w_v)`.
///
/// Evaluated in the reduced form `m + sum over pairs touching a low-weight
/// vertex of (1 - w_e)(p_G - x_e)`, with pairs of two low-weight vertices
/// corrected once, so the cost is `O(outliers * n)` instead of `O(n^2)`.
///
/// On any graph whose concentration parameter is at most `k*` this equals
/// the edge count exactly.
pub fn stabilized_edge_count(g: &Graph, profile: &WeightProfile, _params: &CdParams) -> Result<f64> {
    if profile.graph_fingerprint != g.fingerprint() {
        return Err(Error::StaleProfile);
    }
    let n = g.node_count();
    let p = profile.density;
    let mut adjust = 0.0f64;

    for &u in &profile.outliers {
        let adj_u = g.neighbors(u);
        let w_u = profile.weights[u as usize];
        let mut ptr = 0usize;
        for v in 0..n {
            if v == u {
                continue;
            }
            while ptr < adj_u.len() && adj_u[ptr] < v {
                ptr += 1;
            }
            let x = if ptr < adj_u.len() && adj_u[ptr] == v {
                1.0
            } else {
                0.0
            };
            let w = w_u.min(profile.weights[v as usize]);
            adjust += (1.0 - w) * (p - x);
        }
    }
    // Pairs with both endpoints low-weight were visited from each side.
    for (i, &u) in profile.outliers.iter().enumerate() {
        for &v in &profile.outliers[i + 1..] {
            let x = if g.has_edge(u, v) { 1.0 } else { 0.0 };
            let w = profile.weights[u as usize].min(profile.weights[v as usize]);
            adjust -= (1.0 - w) * (p - x);
        }
    }
    Ok(g.edge_count() as f64 + adjust)
}

/// Smooth upper bound on the local sensitivity of the reweighted statistic:
/// the supremum over real `l >= 0` of
///
/// ```text
/// C * exp(-beta l) * ((k_G + l + k*) + beta (k_G + l)(k_G + l + k*) + 1/beta)
/// ```
///
/// The factor in parentheses has a single interior critical point at
/// `l = 1/beta - k_G - k*` and decays beyond it, so the supremum is the
/// larger of the endpoint value and the clipped critical value.
pub fn smooth_bound(profile: &WeightProfile, params: &CdParams) -> Result<f64> {
    let beta = params.beta;
    if beta <= 0.0 || beta.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let k_g = profile.outlier_bound as f64;
    let k_star = params.k_star as f64;
    let h = |l: f64| {
        let a = k_g + l;
        let t = a + k_star;
        params.sens_const * (-beta * l).exp() * (t + beta * a * t + 1.0 / beta)
    };
    let l_crit = (1.0 / beta - k_g - k_star).max(0.0);
    Ok(h(0.0).max(h(l_crit)))
}

/// Which release path produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Naive,
    Concentrated,
    Er,
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EstimatorKind::Naive => "naive",
            EstimatorKind::Concentrated => "concentrated",
            EstimatorKind::Er => "er",
        })
    }
}

/// Audit of the concentrated stage.
#[derive(Debug, Clone, Copy)]
pub struct CdAudit {
    pub k_star: u32,
    pub beta: f64,
    pub sens_const: f64,
    pub outlier_bound: u32,
    pub half_width: u32,
    pub d_bar: f64,
}

/// Audit of the Erdos-Renyi front stage (one Laplace release).
#[derive(Debug, Clone, Copy)]
pub struct ErAudit {
    pub alpha: f64,
    pub p_floor: f64,
    /// Scale of the Laplace draw in density units, `2 / (eps n)`.
    pub laplace_scale: f64,
    /// The realized standard Laplace variate.
    pub laplace_draw: f64,
    pub p_tilde_prime: f64,
    pub p_tilde: f64,
    pub k_tilde: u32,
}

/// A released estimate together with its audit trail.
///
/// Everything except `p_hat` (and the parameter echo) is sensitive: the raw
/// statistic, the noise scale, the realized draws, and the stream key all
/// reveal the unprotected value. Deployment-mode serialization must drop
/// them.
#[derive(Debug, Clone)]
pub struct PrivateEstimate {
    /// The released density estimate.
    pub p_hat: f64,
    /// The estimate before clamping to `[0, 1]`.
    pub p_pre_clamp: f64,
    /// The statistic before noise, in edge-count units.
    pub f_raw: f64,
    /// Noise scale in edge-count units (`s` for the smooth mechanism,
    /// `n - 1` for the naive one).
    pub noise_scale: f64,
    /// The realized standard noise variate.
    pub noise_draw: f64,
    pub eps: f64,
    pub n: u32,
    pub kind: EstimatorKind,
    pub seed: u64,
    pub stream: u64,
    pub cd: Option<CdAudit>,
    pub er: Option<ErAudit>,
}

fn finish_estimate(pre_clamp: f64, clamp: bool) -> f64 {
    if clamp {
        pre_clamp.clamp(0.0, 1.0)
    } else {
        pre_clamp
    }
}

/// Laplace release of the edge density at global sensitivity, clamped to
/// `[0, 1]`. The pre-clamp value is kept in the audit record.
pub fn naive_estimate(g: &Graph, eps: f64, rng: &mut RandomStream) -> Result<PrivateEstimate> {
    if eps <= 0.0 || eps.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InvalidGraph(
            "naive estimator needs at least 2 nodes".into(),
        ));
    }
    let pairs = pair_count(n) as f64;
    let f_raw = g.edge_count() as f64;
    // Rewiring one node moves at most n - 1 edges.
    let sensitivity = (n - 1) as f64;
    let z = sample_laplace(rng, 1.0)?;
    let pre_clamp = (f_raw + sensitivity / eps * z) / pairs;
    Ok(PrivateEstimate {
        p_hat: finish_estimate(pre_clamp, true),
        p_pre_clamp: pre_clamp,
        f_raw,
        noise_scale: sensitivity,
        noise_draw: z,
        eps,
        n,
        kind: EstimatorKind::Naive,
        seed: rng.seed(),
        stream: rng.stream(),
        cd: None,
        er: None,
    })
}

/// The concentrated-degree estimator: weight profile, reweighted statistic,
/// smooth sensitivity bound, then a Student t release.
pub fn estimate_concentrated(
    g: &Graph,
    params: &CdParams,
    rng: &mut RandomStream,
) -> Result<PrivateEstimate> {
    let profile = compute_weight_profile(g, params)?;
    let f_raw = stabilized_edge_count(g, &profile, params)?;
    let s = smooth_bound(&profile, params)?;
    let z = sample_student_t3(rng);
    let pairs = pair_count(g.node_count()) as f64;
    let pre_clamp = (f_raw + s / params.eps * z) / pairs;
    Ok(PrivateEstimate {
        p_hat: finish_estimate(pre_clamp, params.clamp),
        p_pre_clamp: pre_clamp,
        f_raw,
        noise_scale: s,
        noise_draw: z,
        eps: params.eps,
        n: g.node_count(),
        kind: EstimatorKind::Concentrated,
        seed: rng.seed(),
        stream: rng.stream(),
        cd: Some(CdAudit {
            k_star: params.k_star,
            beta: params.beta,
            sens_const: params.sens_const,
            outlier_bound: profile.outlier_bound,
            half_width: profile.half_width,
            d_bar: profile.d_bar,
        }),
        er: None,
    })
}

/// Parameters of the Erdos-Renyi estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErParams {
    pub eps: f64,
    /// Failure parameter in `(0, 1)`; defaults to `1/n^2` at run time.
    pub alpha: Option<f64>,
    /// Lower clamp for the noisy density guess; defaults to `ln(n)/n`.
    pub p_floor: Option<f64>,
    /// Passed through to the concentrated stage.
    pub sens_const: f64,
    pub clamp: bool,
}

impl ErParams {
    pub fn new(eps: f64) -> Result<Self> {
        if eps <= 0.0 || eps.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        Ok(Self {
            eps,
            alpha: None,
            p_floor: None,
            sens_const: CdParams::DEFAULT_SENS_CONST,
            clamp: true,
        })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha <= 0.0 || alpha >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        self.alpha = Some(alpha);
        Ok(self)
    }

    pub fn with_p_floor(mut self, p_floor: f64) -> Result<Self> {
        if p_floor <= 0.0 || p_floor.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "p_floor must be positive, got {p_floor}"
            )));
        }
        self.p_floor = Some(p_floor);
        Ok(self)
    }

    pub fn with_sens_const(mut self, sens_const: f64) -> Result<Self> {
        if sens_const <= 0.0 || sens_const.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "sens_const must be positive, got {sens_const}"
            )));
        }
        self.sens_const = sens_const;
        Ok(self)
    }

    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.clamp = clamp;
        self
    }

    pub fn alpha_for(&self, n: u32) -> f64 {
        self.alpha.unwrap_or(1.0 / (n as f64 * n as f64))
    }

    pub fn p_floor_for(&self, n: u32) -> f64 {
        self.p_floor.unwrap_or((n as f64).ln() / n as f64)
    }
}

/// Two-stage Erdos-Renyi parameter estimator.
///
/// Stage one releases a rough density with one Laplace draw at scale
/// `2/(eps n)`, shifts it up by `4 ln(1/alpha) / (eps n)` so it upper-bounds
/// the truth with probability `1 - alpha`, and floors it at `p_floor`.
/// Stage two derives the concentration guess
/// `k_tilde = ceil(sqrt(p_tilde * n * ln(n / alpha)))` and runs the
/// concentrated estimator with it. Both stages consume `eps`, so the
/// composed release costs `O(eps)`.
pub fn estimate_er(g: &Graph, params: &ErParams, rng: &mut RandomStream) -> Result<PrivateEstimate> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InvalidGraph(
            "er estimator needs at least 2 nodes".into(),
        ));
    }
    let alpha = params.alpha_for(n);
    if alpha.is_nan() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let p_floor = params.p_floor_for(n);
    let eps = params.eps;
    let nf = n as f64;

    let density = g.edge_count() as f64 / pair_count(n) as f64;
    let laplace_scale = 2.0 / (eps * nf);
    let z = sample_laplace(rng, 1.0)?;
    let p_tilde_prime = density + laplace_scale * z;
    let p_tilde = (p_tilde_prime + 4.0 * (1.0 / alpha).ln() / (eps * nf)).max(p_floor);
    let k_tilde = (p_tilde * nf * (nf / alpha).ln()).sqrt().ceil() as u32;

    let cd = CdParams::new(eps, k_tilde)?
        .with_sens_const(params.sens_const)?
        .with_clamp(params.clamp);
    let mut estimate = estimate_concentrated(g, &cd, rng)?;
    estimate.kind = EstimatorKind::Er;
    estimate.er = Some(ErAudit {
        alpha,
        p_floor,
        laplace_scale,
        laplace_draw: z,
        p_tilde_prime,
        p_tilde,
        k_tilde,
    });
    Ok(estimate)
}

/// Empirical lower bound on the local sensitivity of the reweighted
/// statistic at `g`: the largest `|f(G) - f(G')|` over `trials` sampled
/// single-node rewirings, each side evaluated with its own weight profile.
pub fn local_sensitivity_probe(
    g: &Graph,
    params: &CdParams,
    trials: u32,
    rng: &mut RandomStream,
) -> Result<f64> {
    if trials < 1 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let profile = compute_weight_profile(g, params)?;
    let f_base = stabilized_edge_count(g, &profile, params)?;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let neighbor = sample_rewiring(g, rng)?;
        let profile2 = compute_weight_profile(&neighbor, params)?;
        let f2 = stabilized_edge_count(&neighbor, &profile2, params)?;
        worst = worst.max((f_base - f2).abs());
    }
    Ok(worst)
}

/// Samples a random node-adjacent neighbor of `g`: one node is rewired to
/// the empty set, the full set, or a Bernoulli set at either the graph's
/// own density or a uniform random rate.
pub fn sample_rewiring(g: &Graph, rng: &mut RandomStream) -> Result<Graph> {
    let n = g.node_count();
    let v = rng.below(n as u64) as NodeId;
    let mode = rng.below(4);
    let mut wanted = Vec::new();
    match mode {
        0 => {}
        1 | 2 => {
            let rate = if mode == 1 {
                g.edge_count() as f64 / pair_count(n).max(1) as f64
            } else {
                rng.uniform01()
            };
            for u in 0..n {
                if u != v && rng.uniform01() < rate {
                    wanted.push(u);
                }
            }
        }
        _ => wanted.extend((0..n).filter(|&u| u != v)),
    }
    rewire_node(g, v, &wanted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{concentration_parameter, edge_density, sample_er};
    use proptest::prelude::*;

    /// Direct all-pairs evaluation of the reweighted statistic; the
    /// independent oracle for the reduced form.
    fn all_pairs_oracle(g: &Graph, profile: &WeightProfile) -> f64 {
        let n = g.node_count();
        let p = profile.density;
        let mut total = 0.0;
        for u in 0..n {
            for v in (u + 1)..n {
                let w = profile.weights[u as usize].min(profile.weights[v as usize]);
                let x = if g.has_edge(u, v) { 1.0 } else { 0.0 };
                total += w * x + (1.0 - w) * p;
            }
        }
        total
    }

    fn params(eps: f64, k_star: u32) -> CdParams {
        CdParams::new(eps, k_star).unwrap()
    }

    #[test]
    fn beta_derivation() {
        assert_eq!(params(0.5, 0).beta, 0.5);
        assert_eq!(params(2.0, 4).beta, 0.5);
        assert_eq!(params(0.1, 4).beta, 0.1);
        let inv = params(2.0, 4).with_beta_rule(BetaRule::Inverse);
        assert_eq!(inv.beta, 0.25);
        assert!(CdParams::new(0.0, 1).is_err());
    }

    #[test]
    fn profile_on_cycle_has_no_outliers() {
        let g = Graph::cycle(10).unwrap();
        let prof = compute_weight_profile(&g, &params(1.0, 0)).unwrap();
        assert_eq!(prof.outlier_bound, 1);
        assert!(prof.outliers.is_empty());
        assert!(prof.weights.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn profile_on_star_flags_the_center() {
        // d_bar = 1.8; at k = 1 the interval [-1.2, 4.8] excludes only the
        // center, whose distance is 9 - 4.8 = 4.2.
        let g = Graph::star(10).unwrap();
        let prof = compute_weight_profile(&g, &params(1.0, 0)).unwrap();
        assert_eq!(prof.outlier_bound, 1);
        assert_eq!(prof.outliers, vec![0]);
        assert!((prof.distances[0] - 4.2).abs() < 1e-12);
        assert!(prof.distances[1..].iter().all(|&t| t == 0.0));
    }

    #[test]
    fn profile_is_trivial_when_k_star_covers_concentration() {
        let mut rng = RandomStream::new(31);
        let g = sample_er(200, 0.3, &mut rng).unwrap();
        let k = concentration_parameter(&g).unwrap();
        let prof = compute_weight_profile(&g, &params(1.0, k)).unwrap();
        assert_eq!(prof.outlier_bound, 1);
        assert!(prof.weights.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn profile_weight_formula_holds() {
        let mut rng = RandomStream::new(32);
        let g = sample_er(80, 0.15, &mut rng).unwrap();
        let p = params(0.25, 0);
        let prof = compute_weight_profile(&g, &p).unwrap();
        let positive = prof.distances.iter().filter(|&&t| t > 0.0).count();
        assert!(positive as u32 <= prof.outlier_bound);
        for v in 0..80usize {
            let expect = (1.0 - p.beta * prof.distances[v]).max(0.0);
            assert_eq!(prof.weights[v], expect);
            assert_eq!(prof.weights[v] == 1.0, prof.distances[v] == 0.0);
        }
    }

    #[test]
    fn outlier_bound_matches_linear_scan() {
        let mut rng = RandomStream::new(33);
        for trial in 0..30 {
            let g = sample_er(60, 0.05 + 0.03 * (trial % 10) as f64, &mut rng).unwrap();
            let k_star = trial % 4;
            let p = params(0.5, k_star);
            let prof = compute_weight_profile(&g, &p).unwrap();
            let s = crate::graph::degree_summary(&g).unwrap();
            let linear = (1..=g.node_count())
                .find(|&k| {
                    let width = (k_star + 3 * k) as f64;
                    let outside = s
                        .degrees
                        .iter()
                        .filter(|&&d| (d as f64 - s.d_bar).abs() > width + 1e-9)
                        .count() as u32;
                    outside <= k
                })
                .unwrap();
            assert_eq!(prof.outlier_bound, linear);
        }
    }

    #[test]
    fn stabilized_count_is_exact_on_concentrated_graphs() {
        let mut rng = RandomStream::new(34);
        for _ in 0..5 {
            let g = sample_er(150, 0.4, &mut rng).unwrap();
            let k = concentration_parameter(&g).unwrap();
            let p = params(1.0, k);
            let prof = compute_weight_profile(&g, &p).unwrap();
            let f = stabilized_edge_count(&g, &prof, &p).unwrap();
            assert_eq!(f, g.edge_count() as f64);
        }
    }

    #[test]
    fn stabilized_count_on_empty_graph_is_zero() {
        let g = Graph::empty(12).unwrap();
        let p = params(0.5, 0);
        let prof = compute_weight_profile(&g, &p).unwrap();
        assert_eq!(stabilized_edge_count(&g, &prof, &p).unwrap(), 0.0);
    }

    #[test]
    fn stabilized_count_matches_oracle_on_star() {
        // Star on 10 nodes at k* = 0, eps = 0.25: the center weight drops to
        // zero and its nine pairs are imputed at the density, so f = 1.8.
        let g = Graph::star(10).unwrap();
        let p = params(0.25, 0);
        let prof = compute_weight_profile(&g, &p).unwrap();
        let f = stabilized_edge_count(&g, &prof, &p).unwrap();
        assert!((f - all_pairs_oracle(&g, &prof)).abs() < 1e-12);
        assert!((f - 1.8).abs() < 1e-12);
    }

    #[test]
    fn stale_profile_is_rejected() {
        let g = Graph::star(10).unwrap();
        let other = Graph::cycle(10).unwrap();
        let p = params(0.5, 0);
        let prof = compute_weight_profile(&g, &p).unwrap();
        let err = stabilized_edge_count(&other, &prof, &p).unwrap_err();
        assert!(matches!(err, Error::StaleProfile));
    }

    #[test]
    fn smooth_bound_closed_form_matches_endpoint_case() {
        // With k* >= 1/beta^2 the critical point is clipped to zero.
        let p = params(10.0, 25); // beta = 0.2, 1/beta = 5 <= 1 + 25
        let g = Graph::cycle(12).unwrap();
        let prof = compute_weight_profile(&g, &p).unwrap();
        assert_eq!(prof.outlier_bound, 1);
        let s = smooth_bound(&prof, &p).unwrap();
        let expect = p.sens_const * (26.0 + 0.2 * 26.0 + 5.0);
        assert!((s - expect).abs() < 1e-9, "{s} vs {expect}");
    }

    #[test]
    fn smooth_bound_matches_grid_search() {
        // Dense grid over l in [0, 50] as the independent oracle.
        for (eps, k_star) in [(0.1, 10u32), (0.1, 0), (0.5, 2), (0.05, 40)] {
            let p = params(eps, k_star).with_sens_const(1.0).unwrap();
            let g = Graph::cycle(30).unwrap();
            let prof = compute_weight_profile(&g, &p).unwrap();
            let s = smooth_bound(&prof, &p).unwrap();
            let k_g = prof.outlier_bound as f64;
            let ks = k_star as f64;
            let beta = p.beta;
            let mut grid_max = 0.0f64;
            let mut l = 0.0;
            while l <= 50.0 {
                let a = k_g + l;
                let t = a + ks;
                grid_max = grid_max.max((-beta * l).exp() * (t + beta * a * t + 1.0 / beta));
                l += 1e-3;
            }
            assert!(
                (s - grid_max).abs() < 1e-6,
                "eps {eps} k* {k_star}: {s} vs {grid_max}"
            );
        }
    }

    #[test]
    fn smooth_bound_scales_with_sens_const() {
        let g = Graph::cycle(20).unwrap();
        let p1 = params(0.3, 5).with_sens_const(1.0).unwrap();
        let p30 = params(0.3, 5).with_sens_const(30.0).unwrap();
        let prof = compute_weight_profile(&g, &p1).unwrap();
        let s1 = smooth_bound(&prof, &p1).unwrap();
        let s30 = smooth_bound(&prof, &p30).unwrap();
        assert!((s30 - 30.0 * s1).abs() < 1e-9);
    }

    #[test]
    fn naive_examples() {
        let mut rng = RandomStream::new(40);
        let g = sample_er(300, 0.35, &mut rng).unwrap();
        let p_g = edge_density(&g).unwrap();

        // Vanishing-noise limit.
        let est = naive_estimate(&g, 1e9, &mut rng).unwrap();
        assert!((est.p_hat - p_g).abs() < 1e-6);
        assert_eq!(est.f_raw, g.edge_count() as f64);
        assert_eq!(est.noise_scale, 299.0);

        // Zero-mean noise on the empty graph, pre-clamp.
        let empty = Graph::empty(100).unwrap();
        let trials = 10_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for t in 0..trials {
            let mut rng = RandomStream::with_stream(41, t);
            let est = naive_estimate(&empty, 1.0, &mut rng).unwrap();
            sum += est.p_pre_clamp;
            sum2 += est.p_pre_clamp * est.p_pre_clamp;
            assert!(est.p_hat >= 0.0);
        }
        let mean = sum / trials as f64;
        let var = sum2 / trials as f64 - mean * mean;
        let se = (var / trials as f64).sqrt();
        assert!(mean.abs() <= 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn naive_preclamp_variance_matches_laplace() {
        // On a fixed graph the pre-clamp spread is the Laplace variance
        // 2 * (2 / (eps n))^2 = 8 / (eps^2 n^2).
        let n = 500u32;
        let mut rng = RandomStream::new(42);
        let g = sample_er(n, 0.3, &mut rng).unwrap();
        let p_g = edge_density(&g).unwrap();
        let trials = 10_000u64;
        let mut sum2 = 0.0;
        for t in 0..trials {
            let mut rng = RandomStream::with_stream(43, t);
            let est = naive_estimate(&g, 1.0, &mut rng).unwrap();
            let dev = est.p_pre_clamp - p_g;
            sum2 += dev * dev;
        }
        let var = sum2 / trials as f64;
        let expect = 8.0 / (n as f64 * n as f64);
        assert!(
            (var - expect).abs() < 0.15 * expect,
            "variance {var} vs {expect}"
        );
    }

    #[test]
    fn concentrated_vanishing_noise_recovers_density() {
        let g = Graph::cycle(100).unwrap();
        let p = params(1e9, 5);
        let mut rng = RandomStream::new(44);
        let est = estimate_concentrated(&g, &p, &mut rng).unwrap();
        assert!((est.p_hat - edge_density(&g).unwrap()).abs() < 1e-6);
        assert_eq!(est.f_raw, 100.0);
        let cd = est.cd.unwrap();
        assert_eq!(cd.outlier_bound, 1);
        assert_eq!(cd.k_star, 5);
    }

    #[test]
    fn concentrated_mse_respects_theorem_level() {
        // ER(1000, 0.5) with the oracle concentration guess: the empirical
        // error against p_G stays below c' * (k*^2 + 1/eps^4) / (eps^2 n^4)
        // for the documented constant c' = 2.5e4 (the default sens_const of
        // 30 enters squared, and the smooth bound carries roughly another
        // (1 + beta + 1/(beta k*)) factor in scale).
        let n = 1000u32;
        let mut rng = RandomStream::new(45);
        let g = sample_er(n, 0.5, &mut rng).unwrap();
        let p_g = edge_density(&g).unwrap();
        let k_star = (0.5 * n as f64 * (n as f64 * 1e3).ln()).sqrt().ceil() as u32;
        assert!(concentration_parameter(&g).unwrap() <= k_star);
        let p = params(1.0, k_star);
        let trials = 1000u64;
        let mut sum2 = 0.0;
        for t in 0..trials {
            let mut rng = RandomStream::with_stream(46, t);
            let est = estimate_concentrated(&g, &p, &mut rng).unwrap();
            let dev = est.p_pre_clamp - p_g;
            sum2 += dev * dev;
        }
        let mse = sum2 / trials as f64;
        let n4 = (n as f64).powi(4);
        let c_prime = 2.5e4;
        let bound = c_prime * ((k_star as f64).powi(2) / n4 + 1.0 / n4);
        assert!(mse <= bound, "mse {mse} vs bound {bound}");
    }

    #[test]
    fn er_examples() {
        // Vanishing noise end to end on an ER graph: the derived k covers
        // the true concentration, so the estimate lands on the density.
        let mut rng = RandomStream::new(47);
        let g = sample_er(1000, 0.2, &mut rng).unwrap();
        let p_g = edge_density(&g).unwrap();
        let er = ErParams::new(1e9).unwrap();
        let est = estimate_er(&g, &er, &mut rng).unwrap();
        assert!((est.p_hat - p_g).abs() < 1e-4);
        let audit = est.er.unwrap();
        assert!(audit.k_tilde >= concentration_parameter(&g).unwrap());
        assert_eq!(audit.alpha, 1e-6); // default 1/n^2
        assert_eq!(est.kind, EstimatorKind::Er);
    }

    #[test]
    fn er_budget_accounting_is_exposed() {
        let mut rng = RandomStream::new(48);
        let g = sample_er(200, 0.3, &mut rng).unwrap();
        let er = ErParams::new(0.5).unwrap().with_alpha(1e-4).unwrap();
        let mut s1 = RandomStream::with_stream(49, 1);
        let est = estimate_er(&g, &er, &mut s1).unwrap();
        let audit = est.er.unwrap();
        assert_eq!(audit.laplace_scale, 2.0 / (0.5 * 200.0));
        assert!(audit.p_tilde >= audit.p_floor);
        let expect_k = (audit.p_tilde * 200.0 * (200.0 / 1e-4_f64).ln())
            .sqrt()
            .ceil() as u32;
        assert_eq!(audit.k_tilde, expect_k);
        // Replayed stream reproduces both stages exactly.
        let mut s2 = RandomStream::with_stream(49, 1);
        let est2 = estimate_er(&g, &er, &mut s2).unwrap();
        assert_eq!(est.p_hat, est2.p_hat);
        assert_eq!(est.noise_draw, est2.noise_draw);
        assert_eq!(est2.er.unwrap().laplace_draw, audit.laplace_draw);
    }

    #[test]
    fn er_mean_is_unbiased_at_scale() {
        let (n, p, eps) = (1000u32, 0.2, 1.0);
        let trials = 1000u64;
        let er = ErParams::new(eps)
            .unwrap()
            .with_alpha(1e-6)
            .unwrap()
            .with_sens_const(2.0)
            .unwrap();
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for t in 0..trials {
            let mut graph_rng = RandomStream::with_stream(50, 2 * t);
            let mut est_rng = RandomStream::with_stream(50, 2 * t + 1);
            let g = sample_er(n, p, &mut graph_rng).unwrap();
            let est = estimate_er(&g, &er, &mut est_rng).unwrap();
            sum += est.p_hat;
            sum2 += est.p_hat * est.p_hat;
        }
        let mean = sum / trials as f64;
        let var = sum2 / trials as f64 - mean * mean;
        let se = (var / trials as f64).sqrt();
        assert!(
            (mean - p).abs() <= 3.0 * se,
            "mean {mean} vs {p} (se {se})"
        );
    }

    #[test]
    fn release_reconstructs_from_audit_fields() {
        // p_hat is exactly clamp((f_raw + (s/eps) Z) / pairs).
        let mut rng = RandomStream::new(53);
        let g = sample_er(120, 0.3, &mut rng).unwrap();
        let pairs = pair_count(120) as f64;
        for _ in 0..50 {
            let est = estimate_concentrated(&g, &params(0.2, 3), &mut rng).unwrap();
            let rebuilt = (est.f_raw + est.noise_scale / est.eps * est.noise_draw) / pairs;
            assert_eq!(est.p_pre_clamp, rebuilt);
            assert_eq!(est.p_hat, rebuilt.clamp(0.0, 1.0));
        }
    }

    #[test]
    fn probe_identity_rewire_changes_nothing() {
        let g = Graph::cycle(20).unwrap();
        let p = params(0.5, 0);
        let prof = compute_weight_profile(&g, &p).unwrap();
        let f1 = stabilized_edge_count(&g, &prof, &p).unwrap();
        let same = rewire_node(&g, 4, g.neighbors(4)).unwrap();
        let prof2 = compute_weight_profile(&same, &p).unwrap();
        let f2 = stabilized_edge_count(&same, &prof2, &p).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn probe_matches_direct_evaluation_on_empty_graph() {
        // Rewiring one node of the empty graph to d <= 1/beta neighbors:
        // the difference must equal the all-pairs oracle's difference.
        let n = 100u32;
        let p = params(0.25, 0);
        let g = Graph::empty(n).unwrap();
        let prof = compute_weight_profile(&g, &p).unwrap();
        let f0 = stabilized_edge_count(&g, &prof, &p).unwrap();
        for d in [1u32, 3, 4] {
            let wanted: Vec<u32> = (1..=d).collect();
            let g2 = rewire_node(&g, 0, &wanted).unwrap();
            let prof2 = compute_weight_profile(&g2, &p).unwrap();
            let f2 = stabilized_edge_count(&g2, &prof2, &p).unwrap();
            let oracle = all_pairs_oracle(&g2, &prof2);
            assert!((f2 - oracle).abs() < 1e-12);
            assert!((f2 - f0).abs() <= smooth_bound(&prof, &p).unwrap());
        }
    }

    #[test]
    fn probe_stays_below_smooth_bound() {
        let mut rng = RandomStream::new(51);
        let g = sample_er(150, 0.3, &mut rng).unwrap();
        for k_star in [0u32, 5, 20] {
            let p = params(0.5, k_star);
            let prof = compute_weight_profile(&g, &p).unwrap();
            let s = smooth_bound(&prof, &p).unwrap();
            let probe = local_sensitivity_probe(&g, &p, 200, &mut rng).unwrap();
            assert!(probe <= s, "k* {k_star}: probe {probe} > bound {s}");
        }
    }

    #[test]
    fn dominance_holds_at_small_sens_const_on_er_family() {
        // The ER pipeline demonstrations run at sens_const = 2; the probe
        // must stay below the bound on that family for the choice to be
        // sound.
        let mut rng = RandomStream::new(52);
        let g = sample_er(1000, 0.2, &mut rng).unwrap();
        let k_star = 73u32; // typical k_tilde at eps = 1, alpha = 1e-6
        let p = params(1.0, k_star).with_sens_const(2.0).unwrap();
        let prof = compute_weight_profile(&g, &p).unwrap();
        let s = smooth_bound(&prof, &p).unwrap();
        let probe = local_sensitivity_probe(&g, &p, 300, &mut rng).unwrap();
        assert!(probe <= s, "probe {probe} > bound {s}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn stabilized_count_stays_in_pair_range(
            seed in 0u64..10_000,
            n in 2u32..60,
            p100 in 0u32..=100,
            k_star in 0u32..8,
        ) {
            let mut rng = RandomStream::with_stream(seed, 21);
            let g = sample_er(n, p100 as f64 / 100.0, &mut rng).unwrap();
            let cd = params(0.4, k_star);
            let prof = compute_weight_profile(&g, &cd).unwrap();
            let f = stabilized_edge_count(&g, &prof, &cd).unwrap();
            prop_assert!(f >= -1e-9);
            prop_assert!(f <= pair_count(n) as f64 + 1e-9);
        }

        #[test]
        fn reduced_form_equals_all_pairs_oracle(
            seed in 0u64..10_000,
            n in 2u32..50,
            p100 in 0u32..=100,
            k_star in 0u32..6,
        ) {
            let mut rng = RandomStream::with_stream(seed, 22);
            let g = sample_er(n, p100 as f64 / 100.0, &mut rng).unwrap();
            let cd = params(0.3, k_star);
            let prof = compute_weight_profile(&g, &cd).unwrap();
            let f = stabilized_edge_count(&g, &prof, &cd).unwrap();
            let oracle = all_pairs_oracle(&g, &prof);
            let tol = 1e-9 * oracle.abs().max(1.0);
            prop_assert!((f - oracle).abs() < tol, "{} vs {}", f, oracle);
        }

        #[test]
        fn smooth_bound_is_beta_smooth_across_rewirings(
            seed in 0u64..10_000,
            n in 10u32..50,
            p100 in 0u32..=100,
            k_star in 0u32..6,
        ) {
            let mut rng = RandomStream::with_stream(seed, 23);
            let g = sample_er(n, p100 as f64 / 100.0, &mut rng).unwrap();
            let g2 = sample_rewiring(&g, &mut rng).unwrap();
            let cd = params(0.6, k_star);
            let s1 = smooth_bound(&compute_weight_profile(&g, &cd).unwrap(), &cd).unwrap();
            let s2 = smooth_bound(&compute_weight_profile(&g2, &cd).unwrap(), &cd).unwrap();
            let bound = cd.beta + 1e-12;
            prop_assert!((s1 / s2).ln() <= bound);
            prop_assert!((s2 / s1).ln() <= bound);
        }
    }
}
