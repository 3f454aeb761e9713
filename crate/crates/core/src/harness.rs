//! Scenario configuration, seeded Monte Carlo orchestration, and report
//! emission.
//!
//! A scenario is one JSON document: mode, topology, margins, interval rule,
//! initial-condition spec, horizon, seed list, and convergence tolerance.
//! Each seed runs as an independent job (parallel via rayon, one derived RNG
//! universe per seed) and writes its artifacts under `seed-<seed>/`:
//! `trajectory.csv`, `events.jsonl`, `reduced.json` (distributed modes), and
//! `summary.json`. The aggregate `summary.csv` is written after all jobs
//! complete. Identical config and seed list yields byte-identical outputs.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{has_delta_spanning_tree, Laplacian};
use crate::matrix::SquareMat;
use crate::reduction::{extract_reduced, verify_reduction, ReductionParams};
use crate::rng::{derived_rng, global_rng, Purpose};
use crate::sim::{
    disagreement, run_centralized, run_centralized_switching, run_distributed,
    run_distributed_iid, run_distributed_scaled, CentralizedParams, DistributedParams, DtRule,
    EventLog, LaplacianFamily, RowFamily, Trajectory,
};
use crate::stochastic::{
    delta_coefficient, is_scrambling, is_sia_power_oracle, is_sia_sufficient, lambda_coefficient,
    StochasticMatrix, POSITIVITY_EPS,
};

/// Default number of uniform grid samples added to the trajectory export.
pub const DEFAULT_GRID_SAMPLES: usize = 200;

/// Power cap of the SIA oracle when invoked from matrix analysis.
pub const ANALYZE_SIA_POWER_CAP: usize = 10_000;

/// Row-spread tolerance of the SIA oracle when invoked from matrix analysis.
pub const ANALYZE_SIA_TOL: f64 = 1e-9;

/// Scheduler family a scenario runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Centralized,
    CentralizedSwitching,
    Distributed,
    DistributedScaled,
    DistributedIid,
}

impl Mode {
    pub fn is_distributed(self) -> bool {
        matches!(
            self,
            Mode::Distributed | Mode::DistributedScaled | Mode::DistributedIid
        )
    }
}

/// Topology specification: a Laplacian, a Laplacian family, a scaled base, or
/// per-agent row families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TopologySpec {
    Fixed {
        laplacian: SquareMat,
    },
    Family {
        laplacians: Vec<SquareMat>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        l_min: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        l_max: Option<f64>,
    },
    Scaled {
        laplacian: SquareMat,
        eps_min: f64,
        eps_max: f64,
    },
    IidRows {
        families: Vec<RowFamily>,
    },
}

impl TopologySpec {
    pub fn agent_count(&self) -> usize {
        match self {
            TopologySpec::Fixed { laplacian } | TopologySpec::Scaled { laplacian, .. } => {
                laplacian.n()
            }
            TopologySpec::Family { laplacians, .. } => {
                laplacians.first().map_or(0, SquareMat::n)
            }
            TopologySpec::IidRows { families } => families.len(),
        }
    }
}

/// Per-agent or shared scheduling margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaSpec {
    Scalar(f64),
    PerAgent(Vec<f64>),
}

impl DeltaSpec {
    pub fn per_agent(&self, n: usize) -> Vec<f64> {
        match self {
            DeltaSpec::Scalar(d) => vec![*d; n],
            DeltaSpec::PerAgent(v) => v.clone(),
        }
    }
}

/// Initial-condition specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum X0Spec {
    Explicit { values: Vec<f64> },
    UniformRandom { low: f64, high: f64 },
}

fn default_grid_samples() -> usize {
    DEFAULT_GRID_SAMPLES
}

fn default_dt_rule() -> DtRule {
    DtRule::UniformRandom
}

/// One scenario: everything needed to reproduce a batch of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub topology: TopologySpec,
    pub delta: DeltaSpec,
    #[serde(default = "default_dt_rule")]
    pub dt_rule: DtRule,
    pub x0: X0Spec,
    pub horizon: f64,
    pub seeds: Vec<u64>,
    pub tolerance: f64,
    #[serde(default = "default_grid_samples")]
    pub grid_samples: usize,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ScenarioConfig = serde_json::from_str(text)?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn agent_count(&self) -> usize {
        self.topology.agent_count()
    }

    /// Field-level validation; runs before any simulation starts.
    pub fn validate(&self) -> Result<()> {
        let n = self.agent_count();
        if n == 0 {
            return Err(Error::config("topology", "no agents"));
        }
        match (&self.mode, &self.topology) {
            (Mode::Centralized, TopologySpec::Fixed { .. })
            | (Mode::CentralizedSwitching, TopologySpec::Family { .. })
            | (Mode::Distributed, TopologySpec::Fixed { .. })
            | (Mode::DistributedScaled, TopologySpec::Scaled { .. })
            | (Mode::DistributedIid, TopologySpec::IidRows { .. }) => {}
            (mode, _) => {
                return Err(Error::config(
                    "topology",
                    format!("topology kind does not match mode {mode:?}"),
                ));
            }
        }
        match &self.topology {
            TopologySpec::Fixed { laplacian } | TopologySpec::Scaled { laplacian, .. } => {
                Laplacian::new(laplacian.clone())
                    .map_err(|e| Error::config("topology.laplacian", e.to_string()))?;
            }
            TopologySpec::Family { laplacians, .. } => {
                if laplacians.is_empty() {
                    return Err(Error::config("topology.laplacians", "empty family"));
                }
                for (k, m) in laplacians.iter().enumerate() {
                    if m.n() != n {
                        return Err(Error::config(
                            "topology.laplacians",
                            format!("member {k} has dimension {}, expected {n}", m.n()),
                        ));
                    }
                    Laplacian::new(m.clone()).map_err(|e| {
                        Error::config(format!("topology.laplacians[{k}]"), e.to_string())
                    })?;
                }
            }
            TopologySpec::IidRows { families } => {
                for (agent, family) in families.iter().enumerate() {
                    family
                        .validate_for_agent(agent, n)
                        .map_err(|e| {
                            Error::config(format!("topology.families[{agent}]"), e.to_string())
                        })?;
                }
            }
        }
        if let TopologySpec::Scaled {
            eps_min, eps_max, ..
        } = &self.topology
        {
            if !(*eps_min > 0.0 && eps_min <= eps_max) {
                return Err(Error::config(
                    "topology.eps",
                    format!("bounds [{eps_min}, {eps_max}] must satisfy 0 < min <= max"),
                ));
            }
        }
        let deltas = self.delta.per_agent(n);
        if deltas.len() != n {
            return Err(Error::config(
                "delta",
                format!("{} margins for {n} agents", deltas.len()),
            ));
        }
        for (i, d) in deltas.iter().enumerate() {
            if !(*d > 0.0 && *d < 0.5) {
                return Err(Error::config(
                    "delta",
                    format!("delta[{i}] = {d} outside the open interval (0, 1/2)"),
                ));
            }
        }
        self.dt_rule
            .validate()
            .map_err(|e| Error::config("dt_rule", e.to_string()))?;
        match &self.x0 {
            X0Spec::Explicit { values } => {
                if values.len() != n {
                    return Err(Error::config(
                        "x0.values",
                        format!("{} values for {n} agents", values.len()),
                    ));
                }
            }
            X0Spec::UniformRandom { low, high } => {
                // NaN bounds must fail, so compare via partial_cmp.
                if low.partial_cmp(high) != Some(std::cmp::Ordering::Less) {
                    return Err(Error::config(
                        "x0",
                        format!("empty range [{low}, {high})"),
                    ));
                }
            }
        }
        if self.horizon < 0.0 {
            return Err(Error::config("horizon", "negative horizon"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "empty seed list"));
        }
        if self.tolerance.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::config("tolerance", "must be positive"));
        }
        Ok(())
    }

    fn make_x0(&self, seed: u64) -> Vec<f64> {
        match &self.x0 {
            X0Spec::Explicit { values } => values.clone(),
            X0Spec::UniformRandom { low, high } => {
                let n = self.agent_count();
                let mut rng = global_rng(seed, Purpose::InitialState);
                (0..n).map(|_| rng.gen_range(*low..*high)).collect()
            }
        }
    }
}

/// The built-in four-agent stochastically switching scenario: each agent owns
/// two admissible rows with unit diagonal, selects uniformly at each of its
/// updates, and runs with margin 0.1 on a 50 s horizon over seeds 1..=100.
pub fn paper_sec4_config() -> ScenarioConfig {
    let families = vec![
        RowFamily {
            rows: vec![vec![1.0, -1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, -1.0]],
            diag_min: 1.0,
            diag_max: 1.0,
        },
        RowFamily {
            rows: vec![vec![-1.0, 1.0, 0.0, 0.0], vec![0.0, 1.0, -1.0, 0.0]],
            diag_min: 1.0,
            diag_max: 1.0,
        },
        RowFamily {
            rows: vec![vec![0.0, -1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0, -1.0]],
            diag_min: 1.0,
            diag_max: 1.0,
        },
        RowFamily {
            rows: vec![vec![0.0, -1.0, 0.0, 1.0], vec![0.0, 0.0, -1.0, 1.0]],
            diag_min: 1.0,
            diag_max: 1.0,
        },
    ];
    ScenarioConfig {
        mode: Mode::DistributedIid,
        topology: TopologySpec::IidRows { families },
        delta: DeltaSpec::Scalar(0.1),
        dt_rule: DtRule::UniformRandom,
        x0: X0Spec::UniformRandom {
            low: 0.0,
            high: 10.0,
        },
        horizon: 50.0,
        seeds: (1..=100).collect(),
        tolerance: 1e-3,
        grid_samples: DEFAULT_GRID_SAMPLES,
    }
}

/// Look up a named built-in scenario.
pub fn builtin_scenario(name: &str) -> Option<ScenarioConfig> {
    match name {
        "paper-sec4" => Some(paper_sec4_config()),
        _ => None,
    }
}

/// Per-seed outcome of a scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    /// True iff the final disagreement is below the scenario tolerance.
    pub converged: bool,
    /// Earliest sampled time after which disagreement stays below tolerance.
    pub time_to_tolerance: Option<f64>,
    pub event_count: usize,
    pub final_disagreement: f64,
    /// Reduction audit findings (0 for centralized modes).
    pub reduction_violations: usize,
}

/// Sorted, deduplicated sample times: breakpoints plus a uniform grid.
fn sample_times(traj: &Trajectory, grid_samples: usize) -> Vec<f64> {
    let mut times = traj.breakpoint_times();
    let horizon = traj.horizon();
    if grid_samples >= 2 && horizon > 0.0 {
        for i in 0..grid_samples {
            times.push(horizon * i as f64 / (grid_samples - 1) as f64);
        }
    } else {
        times.push(horizon);
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("times are not NaN"));
    times.dedup();
    times
}

fn write_trajectory_csv(traj: &Trajectory, grid_samples: usize, out: &mut impl Write) -> Result<()> {
    let n = traj.n();
    write!(out, "time")?;
    for i in 0..n {
        write!(out, ",agent_{i}")?;
    }
    writeln!(out)?;
    for t in sample_times(traj, grid_samples) {
        let state = traj.state_at(t)?;
        write!(out, "{t}")?;
        for v in state {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn time_to_tolerance(traj: &Trajectory, grid_samples: usize, tol: f64) -> Option<f64> {
    let times = sample_times(traj, grid_samples);
    let mut earliest = None;
    for &t in times.iter().rev() {
        let spread = traj.disagreement_at(t).ok()?;
        if spread < tol {
            earliest = Some(t);
        } else {
            break;
        }
    }
    earliest
}

struct SeedRun {
    summary: RunSummary,
    traj: Trajectory,
    log: EventLog,
    reduced_json: Option<String>,
}

fn run_seed(config: &ScenarioConfig, seed: u64) -> Result<SeedRun> {
    let n = config.agent_count();
    let x0 = config.make_x0(seed);
    let deltas = config.delta.per_agent(n);

    let (traj, log, reduction_params) = match (&config.mode, &config.topology) {
        (Mode::Centralized, TopologySpec::Fixed { laplacian }) => {
            let l = Laplacian::new(laplacian.clone())?;
            let params = CentralizedParams {
                delta: deltas[0],
                dt_rule: config.dt_rule,
            };
            let (traj, log) = run_centralized(&l, &params, &x0, config.horizon, seed)?;
            (traj, log, None)
        }
        (Mode::CentralizedSwitching, TopologySpec::Family {
            laplacians,
            l_min,
            l_max,
        }) => {
            let members: Vec<Laplacian> = laplacians
                .iter()
                .map(|m| Laplacian::new(m.clone()))
                .collect::<Result<_>>()?;
            let family = match (l_min, l_max) {
                (Some(lo), Some(hi)) => LaplacianFamily::with_bounds(members, *lo, *hi)?,
                _ => LaplacianFamily::new(members)?,
            };
            let params = CentralizedParams {
                delta: deltas[0],
                dt_rule: config.dt_rule,
            };
            let (traj, log) =
                run_centralized_switching(&family, &params, &x0, config.horizon, seed)?;
            (traj, log, None)
        }
        (Mode::Distributed, TopologySpec::Fixed { laplacian }) => {
            let l = Laplacian::new(laplacian.clone())?;
            let params = DistributedParams {
                deltas: deltas.clone(),
                dt_rule: config.dt_rule,
            };
            let (traj, log) = run_distributed(&l, &params, &x0, config.horizon, seed)?;
            let rp = ReductionParams::from_laplacian(&l, &deltas);
            (traj, log, Some(rp))
        }
        (Mode::DistributedScaled, TopologySpec::Scaled {
            laplacian,
            eps_min,
            eps_max,
        }) => {
            let l = Laplacian::new(laplacian.clone())?;
            let params = DistributedParams {
                deltas: deltas.clone(),
                dt_rule: config.dt_rule,
            };
            let (traj, log) = run_distributed_scaled(
                &l,
                *eps_min,
                *eps_max,
                &params,
                &x0,
                config.horizon,
                seed,
            )?;
            let rp = ReductionParams::from_scaled(&l, *eps_min, *eps_max, &deltas);
            (traj, log, Some(rp))
        }
        (Mode::DistributedIid, TopologySpec::IidRows { families }) => {
            let params = DistributedParams {
                deltas: deltas.clone(),
                dt_rule: config.dt_rule,
            };
            let (traj, log) =
                run_distributed_iid(families, &params, &x0, config.horizon, seed)?;
            let rp = ReductionParams::from_iid(families, &deltas);
            (traj, log, Some(rp))
        }
        _ => {
            return Err(Error::config("topology", "mode/topology mismatch"));
        }
    };

    let final_disagreement = disagreement(&traj.state_at(config.horizon)?);
    let converged = final_disagreement < config.tolerance;

    let (reduction_violations, reduced_json) = match reduction_params {
        Some(rp) => match extract_reduced(&log, &traj, &rp) {
            Ok(reduced) => {
                let report = verify_reduction(&reduced, &rp.deltas);
                (report.violation_count(), Some(reduced.to_json()?))
            }
            // Extraction refusing the log is itself a verification failure.
            Err(_) => (1, None),
        },
        None => (0, None),
    };

    let summary = RunSummary {
        seed,
        converged,
        time_to_tolerance: time_to_tolerance(&traj, config.grid_samples, config.tolerance),
        event_count: log.event_count(),
        final_disagreement,
        reduction_violations,
    };
    Ok(SeedRun {
        summary,
        traj,
        log,
        reduced_json,
    })
}

fn write_seed_artifacts(run: &SeedRun, config: &ScenarioConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = Vec::new();
    write_trajectory_csv(&run.traj, config.grid_samples, &mut csv)?;
    fs::write(dir.join("trajectory.csv"), csv)?;

    let mut jsonl = Vec::new();
    run.log.write_jsonl(&mut jsonl)?;
    fs::write(dir.join("events.jsonl"), jsonl)?;

    if let Some(reduced) = &run.reduced_json {
        fs::write(dir.join("reduced.json"), reduced)?;
    }
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&run.summary)?,
    )?;
    Ok(())
}

fn format_option(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn write_summary_csv(summaries: &[RunSummary], out: &mut impl Write) -> Result<()> {
    writeln!(
        out,
        "seed,converged,time_to_tolerance,event_count,final_disagreement,reduction_violations"
    )?;
    for s in summaries {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.seed,
            s.converged,
            format_option(s.time_to_tolerance),
            s.event_count,
            s.final_disagreement,
            s.reduction_violations
        )?;
    }
    Ok(())
}

/// Run every seed of a scenario (in parallel), optionally writing the
/// artifact tree under `out_dir`. Summaries come back in seed-list order.
pub fn run_scenario(config: &ScenarioConfig, out_dir: Option<&Path>) -> Result<Vec<RunSummary>> {
    config.validate()?;
    let runs: Vec<SeedRun> = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let run = run_seed(config, seed)?;
            if let Some(dir) = out_dir {
                write_seed_artifacts(&run, config, &dir.join(format!("seed-{seed}")))?;
            }
            Ok(run)
        })
        .collect::<Result<_>>()?;
    let summaries: Vec<RunSummary> = runs.into_iter().map(|r| r.summary).collect();
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        let mut csv = Vec::new();
        write_summary_csv(&summaries, &mut csv)?;
        fs::write(dir.join("summary.csv"), csv)?;
    }
    Ok(summaries)
}

/// A machine-readable failure entry for the CLI exit path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    pub seed: u64,
    pub reason: String,
}

/// Failures across a batch: non-convergence or reduction violations.
pub fn scenario_failures(summaries: &[RunSummary]) -> Vec<FailureRecord> {
    let mut failures = Vec::new();
    for s in summaries {
        if !s.converged {
            failures.push(FailureRecord {
                seed: s.seed,
                reason: format!(
                    "did not converge: final disagreement {}",
                    s.final_disagreement
                ),
            });
        }
        if s.reduction_violations > 0 {
            failures.push(FailureRecord {
                seed: s.seed,
                reason: format!("{} reduction violations", s.reduction_violations),
            });
        }
    }
    failures
}

/// Classification of one matrix at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaVerdict {
    pub delta: f64,
    /// Delta-scrambling verdict (None when the matrix is not stochastic).
    pub scrambling_delta: Option<bool>,
    /// Structural SIA sufficient condition (None when not stochastic).
    pub sia_sufficient: Option<bool>,
    /// Power-iteration oracle verdict (None when not stochastic).
    pub sia_oracle: Option<bool>,
    /// Delta-spanning-tree verdict on the off-diagonal structure.
    pub spanning_tree_delta: bool,
    /// Witnessing root when a spanning tree exists.
    pub root: Option<usize>,
}

/// Full classification report for one matrix over a threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub matrix: Vec<Vec<f64>>,
    pub is_stochastic: bool,
    pub delta_coeff: Option<f64>,
    pub lambda_coeff: Option<f64>,
    pub verdicts: Vec<DeltaVerdict>,
}

/// Classify a matrix at each threshold of the grid. Thresholds must be
/// nonnegative; zero means "strictly positive entries".
pub fn analyze_matrix(matrix: &SquareMat, grid: &[f64]) -> Result<AnalysisReport> {
    for &d in grid {
        if d < 0.0 {
            return Err(Error::invalid("delta", format!("{d} < 0")));
        }
    }
    let stochastic = StochasticMatrix::new(matrix.clone()).ok();
    let (delta_coeff, lambda_coeff) = match &stochastic {
        Some(s) => (Some(delta_coefficient(s)), Some(lambda_coefficient(s))),
        None => (None, None),
    };
    let verdicts = grid
        .iter()
        .map(|&delta| {
            let effective = if delta > 0.0 { delta } else { POSITIVITY_EPS };
            let (tree, root) = has_delta_spanning_tree(matrix, effective);
            DeltaVerdict {
                delta,
                scrambling_delta: stochastic.as_ref().map(|s| is_scrambling(s, delta)),
                sia_sufficient: stochastic.as_ref().map(|s| is_sia_sufficient(s, effective)),
                sia_oracle: stochastic
                    .as_ref()
                    .map(|s| is_sia_power_oracle(s, ANALYZE_SIA_POWER_CAP, ANALYZE_SIA_TOL)),
                spanning_tree_delta: tree,
                root,
            }
        })
        .collect();
    Ok(AnalysisReport {
        matrix: matrix.to_rows(),
        is_stochastic: stochastic.is_some(),
        delta_coeff,
        lambda_coeff,
        verdicts,
    })
}

/// Load a square matrix from a JSON file (row-major arrays of arrays) and
/// classify it over the grid.
pub fn analyze_matrix_file(path: &Path, grid: &[f64]) -> Result<AnalysisReport> {
    let matrix: SquareMat = serde_json::from_str(&fs::read_to_string(path)?)?;
    analyze_matrix(&matrix, grid)
}

/// Empirical mean topology of i.i.d. row families.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanTopologyEstimate {
    /// Empirical mean row per agent, assembled as a Laplacian-shaped matrix.
    pub mean: Vec<Vec<f64>>,
    pub samples: usize,
    /// Threshold the spanning-tree verdict was evaluated at.
    pub delta: f64,
    pub has_tree: bool,
    pub root: Option<usize>,
}

/// Estimate the mean Laplacian of per-agent row families by uniform sampling
/// and check its off-diagonal magnitudes for a delta-spanning tree.
pub fn estimate_mean_topology(
    families: &[RowFamily],
    samples: usize,
    seed: u64,
    delta: f64,
) -> Result<MeanTopologyEstimate> {
    if samples == 0 {
        return Err(Error::invalid("samples", "at least one sample required"));
    }
    let n = families.len();
    for (agent, family) in families.iter().enumerate() {
        family.validate_for_agent(agent, n)?;
    }
    let mut mean = vec![vec![0.0; n]; n];
    for (agent, family) in families.iter().enumerate() {
        let mut rng = derived_rng(seed, agent, Purpose::Sampling);
        for _ in 0..samples {
            let index = rng.gen_range(0..family.rows.len());
            for (j, v) in family.rows[index].iter().enumerate() {
                mean[agent][j] += v;
            }
        }
        for v in &mut mean[agent] {
            *v /= samples as f64;
        }
    }
    let (has_tree, root) = mean_tree_verdict(&mean, delta)?;
    Ok(MeanTopologyEstimate {
        mean,
        samples,
        delta,
        has_tree,
        root,
    })
}

/// Mean of the rows recorded in an event log (initial rows plus every
/// post-update row), assembled per agent.
pub fn mean_rows_from_log(log: &EventLog) -> Vec<Vec<f64>> {
    let n = log.n;
    let mut sums: Vec<Vec<f64>> = log.initial_rows.clone();
    let mut counts = vec![1usize; n];
    for event in &log.events {
        for u in &event.updates {
            for (j, v) in u.row.iter().enumerate() {
                sums[u.agent][j] += v;
            }
            counts[u.agent] += 1;
        }
    }
    for (row, count) in sums.iter_mut().zip(counts) {
        for v in row.iter_mut() {
            *v /= count as f64;
        }
    }
    sums
}

/// Spanning-tree verdict of a mean Laplacian's off-diagonal magnitudes.
pub fn mean_tree_verdict(mean: &[Vec<f64>], delta: f64) -> Result<(bool, Option<usize>)> {
    let n = mean.len();
    let mut weights = SquareMat::zeros(n);
    for (i, row) in mean.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotSquare {
                rows: n,
                row: i,
                cols: row.len(),
            });
        }
        for (j, &v) in row.iter().enumerate() {
            if i != j {
                weights.set(i, j, -v);
            }
        }
    }
    Ok(has_delta_spanning_tree(&weights, delta))
}
