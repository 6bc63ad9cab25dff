//! `abcdoo generate | measure | ckb`
//!
//! Exit codes: 0 on success, 2 for rejected input, 3 when generation fails.
//! `ABCDOO_THREADS` sets the number of worker threads.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abcdoo::ckb::{generate_ckb, CkbSpec};
use abcdoo::generator::{generate, GenerateOptions};
use abcdoo::io::{self, MeasureOptions};
use abcdoo::sampling::PowerLawSpec;
use abcdoo::{ExecMode, LabeledNetwork};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::ParamArgs;

const THREADS_VAR: &str = "ABCDOO_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("missing required parameter `{0}`")]
    Missing(&'static str),

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{THREADS_VAR} must be a positive integer, got `{0}`")]
    Threads(String),

    #[error(transparent)]
    Core(#[from] abcdoo::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_validation() => 3,
            CliError::Json(_) | CliError::Io(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "abcdoo", version, about = "Overlapping-community benchmark graph generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a graph with overlapping communities
    Generate(GenerateArgs),
    /// Measure a labelled network and write CSV statistics
    Measure(MeasureArgs),
    /// Generate a bipartite-affiliation (CKB) membership file
    Ckb(CkbArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// TOML file with parameter keys; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
    /// Degree sequence file, one degree per line
    #[arg(long)]
    degrees: Option<PathBuf>,
    /// Primary community sizes, one per line
    #[arg(long)]
    community_sizes: Option<PathBuf>,
    #[arg(long, short = 'o')]
    out_dir: PathBuf,
    /// Also write reference-layer coordinates
    #[arg(long)]
    coordinates: bool,
    /// Also write per-edge provenance tags
    #[arg(long)]
    provenance: bool,
    /// Also write the measurement CSVs into `<out-dir>/stats`
    #[arg(long)]
    stats: bool,
    /// Also write per-phase wall-clock timings
    #[arg(long)]
    timings: bool,
    /// Disable data parallelism
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    memberships: PathBuf,
    #[arg(long)]
    provenance: Option<PathBuf>,
    #[arg(long, short = 'o')]
    out_dir: PathBuf,
    /// Smallest overlap considered by the intersection-density profile
    #[arg(long, default_value_t = 25)]
    min_overlap: u64,
    /// Largest overlap relative to the smaller community
    #[arg(long, default_value_t = 0.5)]
    ratio_cap: f64,
    /// Number of internal edge fractions kept per node
    #[arg(long, default_value_t = 5)]
    ief_k: usize,
}

#[derive(Args, Debug)]
struct CkbArgs {
    #[arg(long)]
    n: usize,
    /// Exponent of the memberships-per-node law
    #[arg(long)]
    omega: f64,
    #[arg(long, default_value_t = 1)]
    omega_min: u32,
    #[arg(long)]
    omega_max: u32,
    /// Exponent of the community size law
    #[arg(long)]
    beta: f64,
    #[arg(long = "s")]
    min_community: u32,
    #[arg(long = "S")]
    max_community: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short = 'o')]
    out_dir: PathBuf,
    /// Also write the measurement CSVs into `<out-dir>/stats`
    #[arg(long)]
    stats: bool,
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(value) = std::env::var(THREADS_VAR) {
        let threads: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::Threads(value.clone()))?;
        abcdoo::exec::init_thread_pool(threads)?;
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn run_generate(args: GenerateArgs) -> Result<(), CliError> {
    let base = match &args.config {
        Some(path) => ParamArgs::from_toml_file(path)?,
        None => ParamArgs::default(),
    };
    let params = base.overridden_by(args.params).resolve()?;
    let options = GenerateOptions {
        exec: if args.sequential {
            ExecMode::Sequential
        } else {
            ExecMode::Parallel
        },
        degrees: args.degrees.as_deref().map(io::read_sequence).transpose()?,
        primary_sizes: args.community_sizes.as_deref().map(io::read_sequence).transpose()?,
        ..Default::default()
    };
    let net = generate(&params, &options)?;

    let dir = &args.out_dir;
    fs::create_dir_all(dir)?;
    io::write_edges(&dir.join("edges.tsv"), &net.edges)?;
    io::write_memberships(&dir.join("memberships.tsv"), &net.memberships)?;
    write_json(&dir.join("summary.json"), &net.summary)?;
    if args.coordinates {
        io::write_coordinates(&dir.join("coordinates.tsv"), &net.points)?;
    }
    if args.provenance {
        io::write_provenance(&dir.join("provenance.tsv"), &net.edges, &net.provenance)?;
    }
    if args.timings {
        let timings: serde_json::Map<String, serde_json::Value> = net
            .timings
            .iter()
            .map(|(phase, t)| (phase.clone(), t.as_secs_f64().into()))
            .collect();
        write_json(&dir.join("timings.json"), &timings)?;
    }
    if args.stats {
        io::write_metrics(&dir.join("stats"), &net.to_labeled(), &MeasureOptions::default())?;
    }
    log::info!(
        "{} nodes, {} edges, {} communities; achieved rho {:.4}, realized xi {:.4}",
        net.summary.nodes,
        net.summary.edges,
        net.summary.communities,
        net.summary.achieved_rho,
        net.summary.realized_xi
    );
    Ok(())
}

fn run_measure(args: MeasureArgs) -> Result<(), CliError> {
    for path in [&args.edges, &args.memberships].into_iter().chain(args.provenance.as_ref()) {
        if !path.is_file() {
            return Err(CliError::Read {
                path: path.clone(),
                source: std::io::ErrorKind::NotFound.into(),
            });
        }
    }
    let net = io::read_labeled_network(&args.edges, &args.memberships, args.provenance.as_deref())?;
    let options = MeasureOptions {
        min_overlap: args.min_overlap,
        ratio_cap: args.ratio_cap,
        ief_k: args.ief_k,
    };
    io::write_metrics(&args.out_dir, &net, &options)?;
    Ok(())
}

fn run_ckb(args: CkbArgs) -> Result<(), CliError> {
    let spec = CkbSpec {
        n: args.n,
        membership_law: PowerLawSpec::new(args.omega, args.omega_min, args.omega_max)?,
        size_law: PowerLawSpec::new(args.beta, args.min_community, args.max_community)?,
        seed: args.seed,
    };
    let ckb = generate_ckb(&spec)?;
    let dir = &args.out_dir;
    fs::create_dir_all(dir)?;
    io::write_memberships(&dir.join("memberships.tsv"), &ckb.memberships)?;
    write_json(&dir.join("ckb_stats.json"), &ckb.stats)?;
    if args.stats {
        let net = LabeledNetwork::new(
            args.n,
            Vec::new(),
            ckb.memberships,
            (1..=ckb.stats.communities as u64).collect(),
            None,
        )?;
        io::write_metrics(&dir.join("stats"), &net, &MeasureOptions::default())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Generate(args) => run_generate(args),
        Command::Measure(args) => run_measure(args),
        Command::Ckb(args) => run_ckb(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
