//! Monte Carlo experiment harness.
//!
//! A grid of `(n, p, eps)` cells is run for a fixed trial count; each trial
//! samples a fresh Erdos-Renyi graph and feeds it to every selected
//! estimator. Streams are keyed by `(cell, trial, role)`, so results do not
//! depend on execution order and a rerun with the same config and base seed
//! reproduces the CSV byte for byte.
//!
//! The harness also hosts the two audits: the smoothness audit samples
//! node-adjacent graph pairs and checks that the smooth bound moves by at
//! most `e^beta` while dominating the observed sensitivity, and the witness
//! audit rebuilds both lower-bound pairs and re-derives their certificates.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::{
    compute_weight_profile, estimate_concentrated, estimate_er, naive_estimate, sample_rewiring,
    smooth_bound, stabilized_edge_count, CdParams, ErParams,
};
use crate::graph::{edge_density, pair_count, sample_er, Graph};
use crate::noise::RandomStream;
use crate::witness::{floor_tolerant, witness_large_k, witness_small_k};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Which estimators a grid runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorSel {
    /// The empirical density itself, the no-privacy baseline.
    Nonprivate,
    Naive,
    Concentrated,
    Er,
}

impl fmt::Display for EstimatorSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorSel::Nonprivate => "nonprivate",
            EstimatorSel::Naive => "naive",
            EstimatorSel::Concentrated => "concentrated",
            EstimatorSel::Er => "er",
        })
    }
}

impl FromStr for EstimatorSel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonprivate" => Ok(EstimatorSel::Nonprivate),
            "naive" => Ok(EstimatorSel::Naive),
            "concentrated" => Ok(EstimatorSel::Concentrated),
            "er" => Ok(EstimatorSel::Er),
            other => Err(Error::Config(format!("unknown estimator `{other}`"))),
        }
    }
}

/// How the concentrated estimator's `k*` is chosen per cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KStarPolicy {
    /// `ceil(sqrt(p n ln(n / alpha)))` from the cell's true `p`.
    Oracle { alpha: f64 },
    Fixed(u32),
}

impl KStarPolicy {
    fn k_star_for(&self, n: u32, p: f64) -> u32 {
        match *self {
            KStarPolicy::Fixed(k) => k,
            KStarPolicy::Oracle { alpha } => {
                let nf = n as f64;
                (p.max(nf.ln() / nf) * nf * (nf / alpha).ln()).sqrt().ceil() as u32
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub ns: Vec<u32>,
    pub ps: Vec<f64>,
    pub eps_values: Vec<f64>,
    pub trials: u32,
    pub estimators: Vec<EstimatorSel>,
    pub base_seed: u64,
    pub k_star_policy: KStarPolicy,
    /// Failure parameter handed to the ER estimator; `None` keeps the
    /// `1/n^2` default.
    pub alpha: Option<f64>,
    pub sens_const: f64,
    /// Aggregate released (clamped) values; turn off to study the raw noise.
    pub clamp: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.ps.is_empty() || self.eps_values.is_empty() {
            return Err(Error::Config("empty grid".into()));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("no estimators selected".into()));
        }
        if self.estimators.len() >= ROLES_PER_TRIAL as usize {
            return Err(Error::Config("too many estimators".into()));
        }
        if let Some(p) = self.ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!("p = {p} outside [0, 1]")));
        }
        if let Some(e) = self.eps_values.iter().find(|e| **e <= 0.0 || e.is_nan()) {
            return Err(Error::Config(format!("eps = {e} not positive")));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Config(format!("alpha = {a} outside (0, 1)")));
            }
        }
        if self.sens_const <= 0.0 || self.sens_const.is_nan() {
            return Err(Error::Config("sens_const must be positive".into()));
        }
        if let KStarPolicy::Oracle { alpha } = self.k_star_policy {
            if alpha.is_nan() || alpha <= 0.0 || alpha >= 1.0 {
                return Err(Error::Config(format!(
                    "k_star oracle alpha = {alpha} outside (0, 1)"
                )));
            }
        }
        Ok(())
    }

    fn manifest(&self) -> String {
        let fmt_list_f = |xs: &[f64]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let ns = self
            .ns
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let estimators = self
            .estimators
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let policy = match self.k_star_policy {
            KStarPolicy::Oracle { alpha } => format!("oracle(alpha={alpha})"),
            KStarPolicy::Fixed(k) => format!("fixed({k})"),
        };
        let alpha = match self.alpha {
            Some(a) => a.to_string(),
            None => "default".into(),
        };
        format!(
            "# graphdp-grid ns={ns} ps={} eps={} trials={} estimators={estimators} \
             k_star={policy} alpha={alpha} sens_const={} clamp={} seed={}",
            fmt_list_f(&self.ps),
            fmt_list_f(&self.eps_values),
            self.trials,
            self.sens_const,
            self.clamp,
            self.base_seed,
        )
    }

    /// Parses the flat `key = value` grid-config format. Lists are
    /// comma-separated; `#` lines and blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut ns = Vec::new();
        let mut ps = Vec::new();
        let mut eps_values = Vec::new();
        let mut trials = 1000u32;
        let mut estimators = Vec::new();
        let mut base_seed = 0u64;
        let mut k_star_policy = None;
        let mut alpha = None;
        let mut sens_const = CdParams::DEFAULT_SENS_CONST;
        let mut clamp = true;

        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Parse {
                line: idx + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            let list = || value.split(',').map(str::trim).collect::<Vec<_>>();
            match key {
                "n" => {
                    for v in list() {
                        ns.push(v.parse().map_err(|_| bad(format!("bad n `{v}`")))?);
                    }
                }
                "p" => {
                    for v in list() {
                        ps.push(v.parse().map_err(|_| bad(format!("bad p `{v}`")))?);
                    }
                }
                "eps" => {
                    for v in list() {
                        eps_values.push(v.parse().map_err(|_| bad(format!("bad eps `{v}`")))?);
                    }
                }
                "trials" => {
                    trials = value
                        .parse()
                        .map_err(|_| bad(format!("bad trials `{value}`")))?;
                }
                "estimators" => {
                    for v in list() {
                        estimators.push(v.parse().map_err(|e: Error| bad(e.to_string()))?);
                    }
                }
                "seed" => {
                    base_seed = value
                        .parse()
                        .map_err(|_| bad(format!("bad seed `{value}`")))?;
                }
                "k_star" => {
                    k_star_policy = Some(if value == "oracle" {
                        KStarPolicy::Oracle { alpha: 1e-6 }
                    } else {
                        KStarPolicy::Fixed(
                            value
                                .parse()
                                .map_err(|_| bad(format!("bad k_star `{value}`")))?,
                        )
                    });
                }
                "alpha" => {
                    alpha = Some(
                        value
                            .parse()
                            .map_err(|_| bad(format!("bad alpha `{value}`")))?,
                    );
                }
                "sens_const" => {
                    sens_const = value
                        .parse()
                        .map_err(|_| bad(format!("bad sens_const `{value}`")))?;
                }
                "clamp" => {
                    clamp = value
                        .parse()
                        .map_err(|_| bad(format!("bad clamp `{value}`")))?;
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        let config = ExperimentConfig {
            ns,
            ps,
            eps_values,
            trials,
            estimators,
            base_seed,
            k_star_policy: k_star_policy.unwrap_or(KStarPolicy::Oracle { alpha: 1e-6 }),
            alpha,
            sens_const,
            clamp,
        };
        config.validate()?;
        Ok(config)
    }
}

// ---------------------------------------------------------------------------
// Grid execution
// ---------------------------------------------------------------------------

const ROLES_PER_TRIAL: u64 = 16;

/// One aggregated grid cell for one estimator.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub n: u32,
    pub p: f64,
    pub eps: f64,
    pub estimator: EstimatorSel,
    pub trials: u32,
    /// Empty when the cell ran; otherwise the reason it was skipped.
    pub skipped: Option<String>,
    /// Mean squared error against the sampling parameter `p`.
    pub mse_true: f64,
    pub se_mse_true: f64,
    /// Mean squared error against each trial graph's own density.
    pub mse_pg: f64,
    pub se_mse_pg: f64,
    pub mean_p_hat: f64,
    pub se_mean_p_hat: f64,
    /// `k*` that the policy picked for this cell.
    pub k_star: u32,
    /// `p (1 - p) / C(n, 2)`.
    pub th_nonprivate: f64,
    /// `k*^2 / (eps^2 n^4)`.
    pub th_cd_k: f64,
    /// `1 / (eps^4 n^4)`.
    pub th_cd_eps: f64,
    /// `8 / (eps^2 n^2)`.
    pub th_naive: f64,
    pub base_seed: u64,
}

#[derive(Default)]
struct Accum {
    sq_true: f64,
    sq_true2: f64,
    sq_pg: f64,
    sq_pg2: f64,
    sum: f64,
    sum2: f64,
}

impl Accum {
    fn push(&mut self, p_hat: f64, p_true: f64, p_g: f64) {
        let dt = p_hat - p_true;
        let dg = p_hat - p_g;
        self.sq_true += dt * dt;
        self.sq_true2 += dt * dt * dt * dt;
        self.sq_pg += dg * dg;
        self.sq_pg2 += dg * dg * dg * dg;
        self.sum += p_hat;
        self.sum2 += p_hat * p_hat;
    }

    fn mean_se(total: f64, total2: f64, t: f64) -> (f64, f64) {
        let mean = total / t;
        let var = (total2 / t - mean * mean).max(0.0);
        (mean, (var / t).sqrt())
    }
}

/// Runs every cell of the grid and returns one row per `(cell, estimator)`,
/// sorted by grid key. Deterministic in the base seed.
pub fn run_grid(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut cell_index = 0u64;
    for &n in &config.ns {
        for &p in &config.ps {
            for &eps in &config.eps_values {
                rows.extend(run_cell(config, cell_index, n, p, eps)?);
                cell_index += 1;
            }
        }
    }
    Ok(rows)
}

fn run_cell(
    config: &ExperimentConfig,
    cell_index: u64,
    n: u32,
    p: f64,
    eps: f64,
) -> Result<Vec<ResultRow>> {
    let k_star = config.k_star_policy.k_star_for(n, p);
    let t = config.trials as f64;
    let row_base = |estimator: EstimatorSel| ResultRow {
        n,
        p,
        eps,
        estimator,
        trials: config.trials,
        skipped: None,
        mse_true: 0.0,
        se_mse_true: 0.0,
        mse_pg: 0.0,
        se_mse_pg: 0.0,
        mean_p_hat: 0.0,
        se_mean_p_hat: 0.0,
        k_star,
        th_nonprivate: p * (1.0 - p) / pair_count(n.max(2)) as f64,
        th_cd_k: (k_star as f64 / (eps * (n as f64).powi(2))).powi(2),
        th_cd_eps: 1.0 / (eps.powi(4) * (n as f64).powi(4)),
        th_naive: 8.0 / (eps * n as f64).powi(2),
        base_seed: config.base_seed,
    };

    if n < 2 {
        return Ok(config
            .estimators
            .iter()
            .map(|&est| {
                let mut row = row_base(est);
                row.skipped = Some("cell needs n >= 2".into());
                row
            })
            .collect());
    }

    let cd_params = CdParams::new(eps, k_star)?
        .with_sens_const(config.sens_const)?
        .with_clamp(config.clamp);
    let mut er_params = ErParams::new(eps)?
        .with_sens_const(config.sens_const)?
        .with_clamp(config.clamp);
    if let Some(alpha) = config.alpha {
        er_params = er_params.with_alpha(alpha)?;
    }

    let mut accums: Vec<Accum> = config.estimators.iter().map(|_| Accum::default()).collect();
    for trial in 0..config.trials {
        let trial_key = (cell_index * config.trials as u64 + trial as u64) * ROLES_PER_TRIAL;
        let mut graph_rng = RandomStream::with_stream(config.base_seed, trial_key);
        let g = sample_er(n, p, &mut graph_rng)?;
        let p_g = edge_density(&g)?;
        for (role, (&est, accum)) in config
            .estimators
            .iter()
            .zip(accums.iter_mut())
            .enumerate()
        {
            let mut rng = RandomStream::with_stream(config.base_seed, trial_key + 1 + role as u64);
            let p_hat = match est {
                EstimatorSel::Nonprivate => p_g,
                EstimatorSel::Naive => {
                    let e = naive_estimate(&g, eps, &mut rng)?;
                    if config.clamp {
                        e.p_hat
                    } else {
                        e.p_pre_clamp
                    }
                }
                EstimatorSel::Concentrated => {
                    let e = estimate_concentrated(&g, &cd_params, &mut rng)?;
                    if config.clamp {
                        e.p_hat
                    } else {
                        e.p_pre_clamp
                    }
                }
                EstimatorSel::Er => {
                    let e = estimate_er(&g, &er_params, &mut rng)?;
                    if config.clamp {
                        e.p_hat
                    } else {
                        e.p_pre_clamp
                    }
                }
            };
            accum.push(p_hat, p, p_g);
        }
    }

    Ok(config
        .estimators
        .iter()
        .zip(accums)
        .map(|(&est, a)| {
            let mut row = row_base(est);
            let (mse_true, se_true) = Accum::mean_se(a.sq_true, a.sq_true2, t);
            let (mse_pg, se_pg) = Accum::mean_se(a.sq_pg, a.sq_pg2, t);
            let (mean, se_mean) = Accum::mean_se(a.sum, a.sum2, t);
            row.mse_true = mse_true;
            row.se_mse_true = se_true;
            row.mse_pg = mse_pg;
            row.se_mse_pg = se_pg;
            row.mean_p_hat = mean;
            row.se_mean_p_hat = se_mean;
            row
        })
        .collect())
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

/// Floats rendered with 12 significant digits, stable across runs.
fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

pub const CSV_HEADER: &str = "n,p,eps,estimator,trials,skipped,mse_true_p,se_mse_true_p,\
mse_p_g,se_mse_p_g,mean_p_hat,se_mean_p_hat,k_star,th_nonprivate,th_cd_k,th_cd_eps,th_naive,seed";

/// Writes the run manifest, header, and one line per row.
pub fn write_csv<W: Write>(config: &ExperimentConfig, rows: &[ResultRow], mut w: W) -> Result<()> {
    writeln!(w, "{}", config.manifest())?;
    writeln!(w, "{CSV_HEADER}")?;
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (a.n, a.p, a.eps, a.estimator.to_string())
            .partial_cmp(&(b.n, b.p, b.eps, b.estimator.to_string()))
            .unwrap()
    });
    for r in sorted {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            fmt12(r.p),
            fmt12(r.eps),
            r.estimator,
            r.trials,
            r.skipped.as_deref().unwrap_or(""),
            fmt12(r.mse_true),
            fmt12(r.se_mse_true),
            fmt12(r.mse_pg),
            fmt12(r.se_mse_pg),
            fmt12(r.mean_p_hat),
            fmt12(r.se_mean_p_hat),
            r.k_star,
            fmt12(r.th_nonprivate),
            fmt12(r.th_cd_k),
            fmt12(r.th_cd_eps),
            fmt12(r.th_naive),
            r.base_seed,
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Smoothness audit
// ---------------------------------------------------------------------------

/// Graph families the smoothness audit draws from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphFamily {
    Er { n: u32, p: f64 },
    Star { n: u32 },
    /// A planted clique with Bernoulli noise on every other pair.
    CliquePlusNoise { n: u32, clique: u32, p: f64 },
}

impl GraphFamily {
    pub fn sample(&self, rng: &mut RandomStream) -> Result<Graph> {
        match *self {
            GraphFamily::Er { n, p } => sample_er(n, p, rng),
            GraphFamily::Star { n } => Graph::star(n),
            GraphFamily::CliquePlusNoise { n, clique, p } => {
                if clique > n {
                    return Err(Error::InvalidParameter(
                        "clique larger than graph".into(),
                    ));
                }
                let mut edges = Vec::new();
                for u in 0..n {
                    for v in (u + 1)..n {
                        let planted = v < clique;
                        if planted || rng.uniform01() < p {
                            edges.push((u, v));
                        }
                    }
                }
                Graph::from_edges(n, &edges)
            }
        }
    }
}

/// Families exercised by the default smoothness audit.
pub fn default_audit_families() -> Vec<GraphFamily> {
    vec![
        GraphFamily::Er { n: 200, p: 0.1 },
        GraphFamily::Er { n: 500, p: 0.3 },
        GraphFamily::Star { n: 100 },
        GraphFamily::CliquePlusNoise {
            n: 100,
            clique: 30,
            p: 0.05,
        },
    ]
}

/// Parameter sets exercised by the default smoothness audit.
pub fn default_audit_params() -> Vec<CdParams> {
    vec![
        CdParams::new(1.0, 0).unwrap(),
        CdParams::new(0.25, 10).unwrap(),
    ]
}

#[derive(Debug, Clone)]
pub struct SmoothnessReport {
    pub pairs: u32,
    /// Worst `|ln(S(G')/S(G))| / beta` over all pairs; at most 1 when the
    /// bound is beta-smooth.
    pub max_ratio_normalized: f64,
    /// Worst observed `|f(G) - f(G')| / min(S(G), S(G'))`; at most 1 when
    /// the bound dominates the local sensitivity.
    pub max_probe_ratio: f64,
    pub violations: u32,
    pub pass: bool,
}

impl fmt::Display for SmoothnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "smoothness audit: pairs={}", self.pairs)?;
        writeln!(
            f,
            "  max |ln S-ratio| / beta = {:.6}",
            self.max_ratio_normalized
        )?;
        writeln!(f, "  max probe / S          = {:.6}", self.max_probe_ratio)?;
        writeln!(f, "  violations             = {}", self.violations)?;
        write!(f, "  result: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Samples `pairs` node-adjacent graph pairs across the families and
/// parameter sets and checks, for every pair, that the smooth bound moves
/// by at most `e^beta` in both directions and dominates the realized
/// statistic difference on both sides.
pub fn audit_smoothness(
    families: &[GraphFamily],
    params: &[CdParams],
    pairs: u32,
    rng: &mut RandomStream,
) -> Result<SmoothnessReport> {
    if families.is_empty() || params.is_empty() || pairs < 1 {
        return Err(Error::InvalidParameter(
            "audit needs families, params, and at least one pair".into(),
        ));
    }
    let mut max_ratio_normalized = 0.0f64;
    let mut max_probe_ratio = 0.0f64;
    let mut violations = 0u32;
    for i in 0..pairs {
        let family = families[i as usize % families.len()];
        let cd = &params[i as usize % params.len()];
        let g = family.sample(rng)?;
        let g2 = sample_rewiring(&g, rng)?;
        let prof = compute_weight_profile(&g, cd)?;
        let prof2 = compute_weight_profile(&g2, cd)?;
        let s1 = smooth_bound(&prof, cd)?;
        let s2 = smooth_bound(&prof2, cd)?;
        let f1 = stabilized_edge_count(&g, &prof, cd)?;
        let f2 = stabilized_edge_count(&g2, &prof2, cd)?;

        let log_ratio = (s2 / s1).ln().abs();
        max_ratio_normalized = max_ratio_normalized.max(log_ratio / cd.beta);
        if log_ratio > cd.beta + 1e-12 {
            violations += 1;
        }
        let probe = (f1 - f2).abs();
        max_probe_ratio = max_probe_ratio.max(probe / s1.min(s2));
        if probe > s1 || probe > s2 {
            violations += 1;
        }
    }
    Ok(SmoothnessReport {
        pairs,
        max_ratio_normalized,
        max_probe_ratio,
        violations,
        pass: violations == 0,
    })
}

// ---------------------------------------------------------------------------
// Witness audit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct WitnessAuditEntry {
    pub label: &'static str,
    /// Concentration class both graphs must inhabit.
    pub k: u32,
    pub g0_concentration: u32,
    pub g1_concentration: u32,
    pub membership_ok: bool,
    pub node_distance_bound: u32,
    pub distance_ok: bool,
    pub edges_g0: u64,
    pub edges_g1: u64,
    /// Recomputed `|p_{G0} - p_{G1}|`.
    pub gap: f64,
    /// Closed-form lower bound the gap must meet.
    pub gap_bound: f64,
    pub gap_ok: bool,
}

#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub large_k: WitnessAuditEntry,
    pub small_k: WitnessAuditEntry,
    /// `floor(n / (i + 1)) > 1 / (4 eps)` for the clique construction.
    pub small_k_distance_exceeds_quarter: bool,
    pub pass: bool,
}

impl fmt::Display for WitnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in [&self.large_k, &self.small_k] {
            writeln!(
                f,
                "{}: class k={} (g0 k={}, g1 k={}, member={}) distance<={} ok={} \
                 gap={:.6e} >= {:.6e} ok={}",
                e.label,
                e.k,
                e.g0_concentration,
                e.g1_concentration,
                e.membership_ok,
                e.node_distance_bound,
                e.distance_ok,
                e.gap,
                e.gap_bound,
                e.gap_ok
            )?;
        }
        write!(f, "result: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Builds both witness pairs at `(n, k, eps)` and re-derives every
/// certificate: class membership, node-distance bounds against
/// `floor(1/eps)`, and the closed-form density-gap lower bounds.
pub fn verify_witnesses(n: u32, k: u32, eps: f64) -> Result<WitnessReport> {
    let distance_cap = floor_tolerant(1.0 / eps) as u32;

    let large = witness_large_k(n, k, eps)?;
    let check = large.check()?;
    let expected_gap =
        (large.node_distance_bound as u64 * k as u64) as f64 / pair_count(n) as f64;
    let lemma_floor = k as f64 / (2.0 * eps * pair_count(n) as f64);
    let large_entry = WitnessAuditEntry {
        label: "large-k",
        k,
        g0_concentration: check.g0_concentration,
        g1_concentration: check.g1_concentration,
        membership_ok: check.in_class,
        node_distance_bound: large.node_distance_bound,
        distance_ok: large.node_distance_bound <= distance_cap,
        edges_g0: large.g0.edge_count(),
        edges_g1: large.g1.edge_count(),
        gap: check.gap,
        gap_bound: expected_gap.max(lemma_floor),
        gap_ok: (check.gap - expected_gap).abs() < 1e-15 && check.gap >= lemma_floor,
    };

    let small = witness_small_k(n, eps)?;
    let check = small.check()?;
    let l = small.node_distance_bound as u64;
    let gap_bound = ((l + 1) * l / 2) as f64 / pair_count(n) as f64;
    let small_entry = WitnessAuditEntry {
        label: "small-k",
        k: small.k,
        g0_concentration: check.g0_concentration,
        g1_concentration: check.g1_concentration,
        membership_ok: check.in_class,
        node_distance_bound: small.node_distance_bound,
        distance_ok: small.node_distance_bound <= distance_cap,
        edges_g0: small.g0.edge_count(),
        edges_g1: small.g1.edge_count(),
        gap: check.gap,
        gap_bound,
        gap_ok: check.gap >= gap_bound - 1e-15,
    };

    let quarter = small.node_distance_bound as f64 > 1.0 / (4.0 * eps);
    let pass = large_entry.membership_ok
        && large_entry.distance_ok
        && large_entry.gap_ok
        && small_entry.membership_ok
        && small_entry.distance_ok
        && small_entry.gap_ok
        && quarter;
    Ok(WitnessReport {
        large_k: large_entry,
        small_k: small_entry,
        small_k_distance_exceeds_quarter: quarter,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            ns: vec![50],
            ps: vec![0.3],
            eps_values: vec![1.0],
            trials: 200,
            estimators: vec![EstimatorSel::Nonprivate, EstimatorSel::Naive],
            base_seed: 7,
            k_star_policy: KStarPolicy::Oracle { alpha: 1e-6 },
            alpha: None,
            sens_const: CdParams::DEFAULT_SENS_CONST,
            clamp: true,
        }
    }

    #[test]
    fn grid_is_deterministic_and_sorted() {
        let config = small_config();
        let rows1 = run_grid(&config).unwrap();
        let rows2 = run_grid(&config).unwrap();
        let mut csv1 = Vec::new();
        let mut csv2 = Vec::new();
        write_csv(&config, &rows1, &mut csv1).unwrap();
        write_csv(&config, &rows2, &mut csv2).unwrap();
        assert_eq!(csv1, csv2);
        assert!(String::from_utf8(csv1).unwrap().starts_with("# graphdp-grid"));
    }

    #[test]
    fn nonprivate_mse_tracks_binomial_variance() {
        let mut config = small_config();
        config.ns = vec![200];
        config.trials = 10_000;
        config.estimators = vec![EstimatorSel::Nonprivate];
        let rows = run_grid(&config).unwrap();
        let row = &rows[0];
        assert!(row.skipped.is_none());
        assert!(
            (row.mse_true - row.th_nonprivate).abs() < 0.10 * row.th_nonprivate,
            "mse {} vs {}",
            row.mse_true,
            row.th_nonprivate
        );
        // Against its own density the baseline is exact.
        assert_eq!(row.mse_pg, 0.0);
    }

    #[test]
    fn theory_columns_match_recomputation() {
        let rows = run_grid(&small_config()).unwrap();
        for row in &rows {
            let n4 = (row.n as f64).powi(4);
            assert_eq!(
                row.th_nonprivate,
                row.p * (1.0 - row.p) / pair_count(row.n) as f64
            );
            assert_eq!(
                row.th_cd_k,
                (row.k_star as f64).powi(2) / (row.eps.powi(2) * n4)
            );
            assert_eq!(row.th_cd_eps, 1.0 / (row.eps.powi(4) * n4));
            assert_eq!(row.th_naive, 8.0 / (row.eps * row.n as f64).powi(2));
        }
    }

    #[test]
    fn skipped_cells_carry_reason() {
        let mut config = small_config();
        config.ns = vec![1];
        let rows = run_grid(&config).unwrap();
        assert!(rows.iter().all(|r| r.skipped.is_some()));
    }

    #[test]
    fn config_validation_rejects_empty_grid() {
        let mut config = small_config();
        config.ns.clear();
        assert!(matches!(config.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn config_parsing_round_trip() {
        let text = "\
# experiment
n = 100, 200
p = 0.1
eps = 0.5, 1
trials = 50
estimators = nonprivate, er
seed = 11
k_star = oracle
alpha = 1e-6
sens_const = 2
clamp = true
";
        let config = ExperimentConfig::parse(text).unwrap();
        assert_eq!(config.ns, vec![100, 200]);
        assert_eq!(config.eps_values, vec![0.5, 1.0]);
        assert_eq!(config.trials, 50);
        assert_eq!(config.estimators.len(), 2);
        assert_eq!(config.base_seed, 11);
        assert_eq!(config.sens_const, 2.0);

        assert!(ExperimentConfig::parse("bogus\n").is_err());
        assert!(ExperimentConfig::parse("n = 100\n").is_err()); // empty grid
        assert!(ExperimentConfig::parse("frobnicate = 1\n").is_err());
    }

    #[test]
    fn smoothness_audit_identity_rewires_sit_at_ratio_one() {
        // A star rewired to the same hub neighborhood keeps S fixed.
        let g = Graph::star(40).unwrap();
        let cd = CdParams::new(0.5, 0).unwrap();
        let prof = compute_weight_profile(&g, &cd).unwrap();
        let s1 = smooth_bound(&prof, &cd).unwrap();
        let same = crate::graph::rewire_node(&g, 0, g.neighbors(0)).unwrap();
        let prof2 = compute_weight_profile(&same, &cd).unwrap();
        let s2 = smooth_bound(&prof2, &cd).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn smoothness_audit_passes_on_default_families() {
        let mut rng = RandomStream::new(61);
        let report = audit_smoothness(
            &default_audit_families(),
            &default_audit_params(),
            100,
            &mut rng,
        )
        .unwrap();
        assert!(report.pass, "{report}");
        assert!(report.max_ratio_normalized <= 1.0 + 1e-9);
        assert!(report.max_probe_ratio <= 1.0);
    }

    #[test]
    fn witness_audit_certifies_the_reference_point() {
        let report = verify_witnesses(100, 5, 0.1).unwrap();
        assert!(report.pass, "{report}");
        assert_eq!(report.large_k.edges_g1, 50);
        assert!((report.large_k.gap - 50.0 / 4950.0).abs() < 1e-15);
        assert!(report.small_k.gap >= 45.0 / 4950.0 - 1e-15);
        assert!(report.small_k_distance_exceeds_quarter);
    }

    #[test]
    fn witness_audit_propagates_precondition_failures() {
        assert!(verify_witnesses(100, 5, 0.3).is_err()); // eps > 1/4 for small-k
    }
}
