//! Command-line front end: estimate densities from edge-list files, generate
//! graphs and witness pairs, and run experiment grids or audits.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 I/O or parse error,
//! 3 audit failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use graphdp::edgelist::{read_edge_list_path, write_edge_list_path};
use graphdp::error::Error;
use graphdp::estimators::{
    estimate_concentrated, estimate_er, naive_estimate, CdParams, ErParams, PrivateEstimate,
};
use graphdp::harness::{
    audit_smoothness, default_audit_families, default_audit_params, run_grid, verify_witnesses,
    write_csv, ExperimentConfig,
};
use graphdp::noise::RandomStream;
use graphdp::sample_er;
use graphdp::witness::{witness_large_k, witness_small_k, WitnessPair};

#[derive(Parser)]
#[command(
    name = "graphdp",
    about = "Node-private edge-density estimation, graph generation, and experiment grids",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one estimator on a stored edge-list graph.
    Estimate(EstimateArgs),
    /// Generate an Erdos-Renyi sample or a lower-bound witness pair.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Run an experiment grid to CSV, or one of the audits.
    Experiment(ExperimentArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    Naive,
    Concentrated,
    Er,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Kv,
    Csv,
}

#[derive(Args)]
struct EstimateArgs {
    /// Edge-list file to estimate from.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    eps: f64,
    /// Concentration guess for the concentrated estimator.
    #[arg(long)]
    k_star: Option<u32>,
    /// Failure parameter for the er estimator (default 1/n^2).
    #[arg(long)]
    alpha: Option<f64>,
    /// Constant multiplying the sensitivity bound.
    #[arg(long, default_value_t = CdParams::DEFAULT_SENS_CONST)]
    sens_const: f64,
    /// Report the raw, unclamped estimate as p_hat.
    #[arg(long)]
    no_clamp: bool,
    /// Noise seed; omit to draw entropy.
    #[arg(long)]
    seed: Option<u64>,
    /// Deployment mode: require an entropy seed and suppress audit fields.
    #[arg(long)]
    deployment: bool,
    /// Write the record here instead of standard output.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "kv")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Sample an Erdos-Renyi graph to an edge-list file.
    Er(GenerateErArgs),
    /// Build the bipartite-vs-empty witness pair.
    WitnessLargeK(WitnessLargeArgs),
    /// Build the disjoint-cliques witness pair.
    WitnessSmallK(WitnessSmallArgs),
}

#[derive(Args)]
struct GenerateErArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    p: f64,
    /// Sampling seed; omit to draw entropy.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    output: PathBuf,
}

#[derive(Args)]
struct WitnessLargeArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    eps: f64,
    /// Prefix for the two edge lists and the manifest.
    #[arg(long, value_name = "PREFIX")]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct WitnessSmallArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_name = "PREFIX")]
    out_prefix: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum AuditKind {
    Smoothness,
    Witnesses,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Grid config file (flat key = value lines); required unless --audit.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Destination for the CSV (grids) or report (audits).
    #[arg(long, value_name = "FILE")]
    output: PathBuf,
    /// Run an audit instead of a grid; exit code 3 on failure.
    #[arg(long, value_enum)]
    audit: Option<AuditKind>,
    /// Node-adjacent pairs for the smoothness audit.
    #[arg(long, default_value_t = 1000)]
    pairs: u32,
    /// Witness audit: node count.
    #[arg(long)]
    n: Option<u32>,
    /// Witness audit: concentration class.
    #[arg(long)]
    k: Option<u32>,
    /// Witness audit: privacy parameter.
    #[arg(long)]
    eps: Option<f64>,
    /// Overrides the config seed (smoothness audits default to 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config trial count.
    #[arg(long)]
    trials: Option<u32>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let benign = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if benign { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io(_) | Error::Parse { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> graphdp::Result<ExitCode> {
    match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Generate(cmd) => cmd_generate(cmd),
        Command::Experiment(args) => cmd_experiment(args),
    }
}

/// Picks the effective seed, echoing it to stderr for reproducibility.
/// Deployment mode insists on entropy and keeps the seed out of every
/// channel, since a known seed reveals the noise.
fn resolve_seed(seed: Option<u64>, deployment: bool) -> graphdp::Result<u64> {
    if deployment {
        if seed.is_some() {
            return Err(Error::Config(
                "deployment mode requires entropy; drop --seed".into(),
            ));
        }
        return Ok(rand::random());
    }
    Ok(match seed {
        Some(s) => {
            eprintln!("seed={s}");
            s
        }
        None => {
            let s: u64 = rand::random();
            eprintln!("seed={s} (entropy)");
            s
        }
    })
}

fn cmd_estimate(args: EstimateArgs) -> graphdp::Result<ExitCode> {
    let graph = read_edge_list_path(&args.input)?;
    let seed = resolve_seed(args.seed, args.deployment)?;
    let mut rng = RandomStream::new(seed);
    let clamp = !args.no_clamp;

    let estimate = match args.mode {
        Mode::Naive => naive_estimate(&graph, args.eps, &mut rng)?,
        Mode::Concentrated => {
            let k_star = args
                .k_star
                .ok_or_else(|| Error::Config("--mode concentrated requires --k-star".into()))?;
            let params = CdParams::new(args.eps, k_star)?
                .with_sens_const(args.sens_const)?
                .with_clamp(clamp);
            estimate_concentrated(&graph, &params, &mut rng)?
        }
        Mode::Er => {
            let mut params = ErParams::new(args.eps)?
                .with_sens_const(args.sens_const)?
                .with_clamp(clamp);
            if let Some(alpha) = args.alpha {
                params = params.with_alpha(alpha)?;
            }
            estimate_er(&graph, &params, &mut rng)?
        }
    };

    let record = estimate_record(&estimate, args.deployment);
    let body = match args.format {
        OutputFormat::Kv => record
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect::<String>(),
        OutputFormat::Csv => {
            let header = record
                .iter()
                .map(|(k, _)| k.as_str())
                .collect::<Vec<_>>()
                .join(",");
            let row = record
                .iter()
                .map(|(_, v)| v.as_str())
                .collect::<Vec<_>>()
                .join(",");
            format!("{header}\n{row}\n")
        }
    };
    match &args.output {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(ExitCode::SUCCESS)
}

/// Serializes an estimate as ordered key-value pairs. In deployment mode
/// only the released value and the public configuration appear; the raw
/// statistic, noise internals, and stream identity stay suppressed.
fn estimate_record(est: &PrivateEstimate, deployment: bool) -> Vec<(String, String)> {
    let mut kv: Vec<(String, String)> = vec![
        ("mode".into(), est.kind.to_string()),
        ("n".into(), est.n.to_string()),
        ("eps".into(), est.eps.to_string()),
    ];
    if let Some(cd) = &est.cd {
        kv.push(("k_star".into(), cd.k_star.to_string()));
        kv.push(("beta".into(), cd.beta.to_string()));
        kv.push(("sens_const".into(), cd.sens_const.to_string()));
    }
    if let Some(er) = &est.er {
        kv.push(("alpha".into(), er.alpha.to_string()));
    }
    kv.push(("p_hat".into(), est.p_hat.to_string()));
    if deployment {
        return kv;
    }
    kv.push(("p_pre_clamp".into(), est.p_pre_clamp.to_string()));
    kv.push(("f_raw".into(), est.f_raw.to_string()));
    kv.push(("noise_scale".into(), est.noise_scale.to_string()));
    kv.push(("noise_draw".into(), est.noise_draw.to_string()));
    if let Some(cd) = &est.cd {
        kv.push(("k_g".into(), cd.outlier_bound.to_string()));
        kv.push(("half_width".into(), cd.half_width.to_string()));
    }
    if let Some(er) = &est.er {
        kv.push(("p_floor".into(), er.p_floor.to_string()));
        kv.push(("laplace_scale".into(), er.laplace_scale.to_string()));
        kv.push(("laplace_draw".into(), er.laplace_draw.to_string()));
        kv.push(("p_tilde_prime".into(), er.p_tilde_prime.to_string()));
        kv.push(("p_tilde".into(), er.p_tilde.to_string()));
        kv.push(("k_tilde".into(), er.k_tilde.to_string()));
    }
    kv.push(("seed".into(), est.seed.to_string()));
    kv.push(("stream".into(), est.stream.to_string()));
    kv
}

fn cmd_generate(cmd: GenerateCmd) -> graphdp::Result<ExitCode> {
    match cmd {
        GenerateCmd::Er(args) => {
            let seed = resolve_seed(args.seed, false)?;
            let mut rng = RandomStream::new(seed);
            let g = sample_er(args.n, args.p, &mut rng)?;
            write_edge_list_path(&g, &args.output)?;
            Ok(ExitCode::SUCCESS)
        }
        GenerateCmd::WitnessLargeK(args) => {
            let pair = witness_large_k(args.n, args.k, args.eps)?;
            write_witness(&pair, "large-k", args.n, args.eps, &args.out_prefix)?;
            Ok(ExitCode::SUCCESS)
        }
        GenerateCmd::WitnessSmallK(args) => {
            let pair = witness_small_k(args.n, args.eps)?;
            write_witness(&pair, "small-k", args.n, args.eps, &args.out_prefix)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Writes `prefix.g0.edges`, `prefix.g1.edges`, and `prefix.manifest`.
fn write_witness(
    pair: &WitnessPair,
    kind: &str,
    n: u32,
    eps: f64,
    prefix: &Path,
) -> graphdp::Result<()> {
    let with_ext = |ext: &str| {
        let mut os = prefix.as_os_str().to_owned();
        os.push(ext);
        PathBuf::from(os)
    };
    write_edge_list_path(&pair.g0, &with_ext(".g0.edges"))?;
    write_edge_list_path(&pair.g1, &with_ext(".g1.edges"))?;
    let check = pair.check()?;
    let mut manifest = std::io::BufWriter::new(std::fs::File::create(with_ext(".manifest"))?);
    writeln!(manifest, "kind={kind}")?;
    writeln!(manifest, "n={n}")?;
    writeln!(manifest, "eps={eps}")?;
    writeln!(manifest, "k={}", pair.k)?;
    writeln!(manifest, "node_distance_bound={}", pair.node_distance_bound)?;
    writeln!(manifest, "density_gap={}", pair.density_gap)?;
    writeln!(manifest, "m_g0={}", pair.g0.edge_count())?;
    writeln!(manifest, "m_g1={}", pair.g1.edge_count())?;
    writeln!(manifest, "g0_concentration={}", check.g0_concentration)?;
    writeln!(manifest, "g1_concentration={}", check.g1_concentration)?;
    writeln!(manifest, "in_class={}", check.in_class)?;
    manifest.flush()?;
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> graphdp::Result<ExitCode> {
    match args.audit {
        Some(AuditKind::Smoothness) => {
            let seed = args.seed.unwrap_or(0);
            eprintln!("seed={seed}");
            let mut rng = RandomStream::new(seed);
            let report = audit_smoothness(
                &default_audit_families(),
                &default_audit_params(),
                args.pairs,
                &mut rng,
            )?;
            std::fs::write(&args.output, format!("{report}\n"))?;
            println!("{report}");
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
        Some(AuditKind::Witnesses) => {
            let (n, k, eps) = match (args.n, args.k, args.eps) {
                (Some(n), Some(k), Some(eps)) => (n, k, eps),
                _ => {
                    return Err(Error::Config(
                        "--audit witnesses requires --n, --k, and --eps".into(),
                    ))
                }
            };
            let report = verify_witnesses(n, k, eps)?;
            std::fs::write(&args.output, format!("{report}\n"))?;
            println!("{report}");
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
        None => {
            let config_path = args
                .config
                .as_ref()
                .ok_or_else(|| Error::Config("--config is required without --audit".into()))?;
            let text = std::fs::read_to_string(config_path)?;
            let mut config = ExperimentConfig::parse(&text)?;
            if let Some(seed) = args.seed {
                config.base_seed = seed;
            }
            if let Some(trials) = args.trials {
                config.trials = trials;
                config.validate()?;
            }
            eprintln!("seed={}", config.base_seed);
            let rows = run_grid(&config)?;
            let mut out = Vec::new();
            write_csv(&config, &rows, &mut out)?;
            std::fs::write(&args.output, out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
