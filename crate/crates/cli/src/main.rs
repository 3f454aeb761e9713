//! Command-line runner: seeded scenario batches, matrix classification, and
//! mean-topology estimation.
//!
//! Exit code 0 means every run converged and every verification passed; any
//! failure prints a machine-readable JSON list and exits nonzero.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use selftrig_core::graph::has_delta_spanning_tree;
use selftrig_core::harness::{
    analyze_matrix_file, builtin_scenario, estimate_mean_topology, run_scenario,
    scenario_failures, ScenarioConfig, TopologySpec,
};
use selftrig_core::matrix::SquareMat;

/// True when the off-diagonal magnitudes of a Laplacian-shaped matrix carry a
/// spanning tree at any positive weight.
fn base_has_spanning_tree(laplacian: &SquareMat) -> bool {
    let n = laplacian.n();
    let mut weights = SquareMat::zeros(n);
    let mut smallest = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let w = -laplacian.get(i, j);
                if w > 0.0 {
                    weights.set(i, j, w);
                    smallest = smallest.min(w);
                }
            }
        }
    }
    smallest.is_finite() && has_delta_spanning_tree(&weights, smallest).0
}

#[derive(Parser)]
#[command(
    name = "selftrig",
    about = "Structure-based self-triggered consensus: simulate, analyze, estimate",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario batch over its seed list.
    Run(RunArgs),
    /// Classify a matrix file at one or more thresholds.
    Analyze(AnalyzeArgs),
    /// Estimate the mean topology of i.i.d. row families.
    Estimate(EstimateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config file (JSON).
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario name (e.g. paper-sec4).
    #[arg(long)]
    scenario: Option<String>,
    /// Override the config's seed list: comma-separated values and inclusive
    /// ranges, e.g. "1,2,5-10".
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<Seeds>,
    /// Output directory for per-seed artifacts and the aggregate CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(text: &str) -> Result<Seeds, String> {
    let mut seeds = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = part.split_once('-') {
            let lo: u64 = lo.trim().parse().map_err(|_| format!("bad seed `{lo}`"))?;
            let hi: u64 = hi.trim().parse().map_err(|_| format!("bad seed `{hi}`"))?;
            if lo > hi {
                return Err(format!("empty range `{part}`"));
            }
            seeds.extend(lo..=hi);
        } else {
            seeds.push(part.parse().map_err(|_| format!("bad seed `{part}`"))?);
        }
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(Seeds(seeds))
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Matrix file: JSON row-major array of arrays.
    #[arg(long)]
    matrix: PathBuf,
    /// Comma-separated thresholds, e.g. "0.1,0.4".
    #[arg(long, value_parser = parse_deltas)]
    delta: Deltas,
}

#[derive(Clone)]
struct Deltas(Vec<f64>);

fn parse_deltas(text: &str) -> Result<Deltas, String> {
    let values: Result<Vec<f64>, _> = text
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(str::parse)
        .collect();
    let values = values.map_err(|e| format!("bad threshold list: {e}"))?;
    if values.is_empty() {
        return Err("no thresholds given".into());
    }
    Ok(Deltas(values))
}

#[derive(Args)]
struct EstimateArgs {
    /// Scenario config whose topology carries i.i.d. row families.
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario name instead of a config file.
    #[arg(long)]
    scenario: Option<String>,
    /// Number of row draws per agent.
    #[arg(long)]
    samples: usize,
    /// Spanning-tree threshold for the mean-graph verdict.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Sampling seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn load_config(
    config: &Option<PathBuf>,
    scenario: &Option<String>,
) -> anyhow::Result<ScenarioConfig> {
    match (config, scenario) {
        (Some(path), None) => ScenarioConfig::from_file(path)
            .with_context(|| format!("loading config {}", path.display())),
        (None, Some(name)) => {
            builtin_scenario(name).with_context(|| format!("unknown built-in scenario `{name}`"))
        }
        _ => bail!("exactly one of --config and --scenario is required"),
    }
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<ExitCode> {
    let mut config = load_config(&args.config, &args.scenario)?;
    if let Some(Seeds(seeds)) = &args.seeds {
        config.seeds = seeds.clone();
    }
    // Scaled switching only guarantees consensus when the base graph has a
    // spanning tree; this is not enforced, so note it up front.
    if let TopologySpec::Scaled { laplacian, .. } = &config.topology {
        if !base_has_spanning_tree(laplacian) {
            eprintln!(
                "note: base coupling graph has no spanning tree; convergence is not guaranteed"
            );
        }
    }
    let summaries = run_scenario(&config, args.out.as_deref())?;
    let converged = summaries.iter().filter(|s| s.converged).count();
    eprintln!(
        "{}/{} seeds converged, {} events total",
        converged,
        summaries.len(),
        summaries.iter().map(|s| s.event_count).sum::<usize>()
    );
    let failures = scenario_failures(&summaries);
    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{}", serde_json::to_string_pretty(&failures)?);
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> anyhow::Result<ExitCode> {
    let report = analyze_matrix_file(&args.matrix, &args.delta.0)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_estimate(args: &EstimateArgs) -> anyhow::Result<ExitCode> {
    let config = load_config(&args.config, &args.scenario)?;
    let TopologySpec::IidRows { families } = &config.topology else {
        bail!("estimate requires a config with an iid-rows topology");
    };
    let estimate = estimate_mean_topology(families, args.samples, args.seed, args.delta)?;
    println!("{}", serde_json::to_string_pretty(&estimate)?);
    Ok(ExitCode::SUCCESS)
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Estimate(args) => cmd_estimate(args),
    }
}
