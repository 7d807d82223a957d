//! Batch runner for the block-encoding pipelines.
//!
//! Exit codes: 0 on success, 2 on a config or input problem, 3 when a
//! pipeline fails numerically.

mod config;
mod output;
mod pipelines;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use config::{CliError, CliResult, ExperimentConfig, Format, Normalize, Pipeline};

#[derive(Parser)]
#[command(name = "blockenc", version, about = "Run block-encoding pipelines and write reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline named in the config file.
    Run(Common),
    PcaPower(Common),
    PcaGd(Common),
    Solve(Common),
    SimulateDirect(Common),
    SimulateOde(Common),
    GroundState(Common),
    Energies(Common),
    Fit(Common),
    Costs(Common),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    /// `<param>=<v1,v2,...>`
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, value_enum)]
    normalize: Option<Normalize>,
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    vector: Option<PathBuf>,
    /// `<key>=<value>`, repeatable; the value is read as JSON when it parses.
    #[arg(long = "param")]
    params: Vec<String>,
    /// Include the wall time, which makes reports differ between reruns.
    #[arg(long)]
    timing: bool,
}

fn split_pair(raw: &str, flag: &str) -> CliResult<(String, String)> {
    raw.split_once('=')
        .filter(|(k, _)| !k.is_empty())
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .ok_or_else(|| CliError::Validation(format!("--{flag} expects <key>=<value>, got `{raw}`")))
}

fn build_config(pipeline: Option<Pipeline>, args: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = match (&args.config, pipeline) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(p)) => ExperimentConfig::empty(p),
        (None, None) => return Err(CliError::Validation("`run` needs --config".into())),
    };
    if let Some(p) = pipeline {
        if args.config.is_some() && cfg.pipeline != p {
            return Err(CliError::Validation(format!(
                "config names pipeline {} but the subcommand is {p}",
                cfg.pipeline
            )));
        }
    }
    if args.matrix.is_some() {
        cfg.matrix = args.matrix.clone();
    }
    if args.dataset.is_some() {
        cfg.dataset = args.dataset.clone();
    }
    if args.vector.is_some() {
        cfg.vector = args.vector.clone();
    }
    for raw in &args.params {
        let (k, v) = split_pair(raw, "param")?;
        let v = serde_json::from_str(&v).unwrap_or(Value::String(v));
        cfg.parameters.insert(k, v);
    }
    if let Some(seed) = args.seed {
        cfg.parameters.insert("seed".into(), Value::from(seed));
    }
    if let Some(n) = args.normalize {
        cfg.parameters.insert("normalize".into(), serde_json::to_value(n).expect("enum serializes"));
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if args.out.is_some() {
        cfg.output = args.out.clone();
    }
    cfg.with_seed()
}

fn run_one(cfg: &ExperimentConfig) -> CliResult<pipelines::Run> {
    let start = Instant::now();
    let mut run = pipelines::dispatch(cfg)?;
    run.report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(run)
}

fn execute(pipeline: Option<Pipeline>, args: &Common) -> CliResult<()> {
    let cfg = build_config(pipeline, args)?;
    match &args.sweep {
        None => {
            let run = run_one(&cfg)?;
            output::emit(cfg.output.as_deref(), &output::render(&run, cfg.format, args.timing))
        }
        Some(spec) => {
            let (axis, values) = split_pair(spec, "sweep")?;
            output::sweep(&cfg, &axis, &values, args.timing, run_one)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (pipeline, args) = match &cli.command {
        Command::Run(a) => (None, a),
        Command::PcaPower(a) => (Some(Pipeline::PcaPower), a),
        Command::PcaGd(a) => (Some(Pipeline::PcaGd), a),
        Command::Solve(a) => (Some(Pipeline::Solve), a),
        Command::SimulateDirect(a) => (Some(Pipeline::SimulateDirect), a),
        Command::SimulateOde(a) => (Some(Pipeline::SimulateOde), a),
        Command::GroundState(a) => (Some(Pipeline::GroundState), a),
        Command::Energies(a) => (Some(Pipeline::Energies), a),
        Command::Fit(a) => (Some(Pipeline::Fit), a),
        Command::Costs(a) => (Some(Pipeline::Costs), a),
    };
    match execute(pipeline, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
