//! Reduction of a distributed run to its delayed discrete-time recursion.
//!
//! The auxiliary sequence `y(k)` collects every agent's last broadcast value
//! at the k-th network event. Between its own updates an agent's control is
//! frozen, so when agent `i` updates at step `k+1` after `d_ik` intervening
//! network events its new broadcast is
//!
//! ```text
//! y_i(k+1) = (1 - dt * l_ii) y_i(k) + sum_{j != i} (-dt * l_ij) y_j(k - d_ik)
//! ```
//!
//! with `dt` its whole inter-update interval and the row taken in force on
//! that interval. Nonupdating agents keep identity rows. The coefficients are
//! nonnegative with unit row sums and zero-delay diagonal at least `delta_i`,
//! and `B(k)` (diagonal from the zero-delay block, off-diagonals summed over
//! delays) is exactly `dt`-scaled coupling mass, so the whole delayed-system
//! convergence machinery applies to the extracted run.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::delayed::FiniteSchedule;
use crate::error::{Error, Result};
use crate::graph::{has_delta_spanning_tree, Laplacian};
use crate::matrix::SquareMat;
use crate::sim::{EventLog, Trajectory};

/// Tolerance for replaying the extracted recursion against the simulation.
pub const REPLAY_TOL: f64 = 1e-9;

/// Tolerance on extracted coefficient row sums.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Admissible range of one agent's diagonal coupling across a run.
/// Fixed topologies have `lo == hi`; leaders have both zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagRange {
    pub lo: f64,
    pub hi: f64,
}

impl DiagRange {
    pub fn fixed(l_ii: f64) -> Self {
        DiagRange { lo: l_ii, hi: l_ii }
    }

    fn schedulable(&self) -> bool {
        self.hi > 0.0
    }
}

/// The structural bounds of a run: extreme inter-update intervals and the
/// integer bounds derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructuralBounds {
    /// Shortest possible inter-update interval, `min_i delta_i / hi_i`.
    pub delta_min: f64,
    /// Longest possible inter-update interval, `max_i (1 - delta_i) / lo_i`.
    pub delta_max: f64,
    /// Smallest positive integer with `h' * delta_min >= delta_max`.
    pub h_prime: usize,
    /// Delay bound `tau = (n - 1)(h' + 1)`.
    pub tau: usize,
    /// Window length `h = n(h' + 1)`: every agent updates at least once in
    /// any h consecutive network events.
    pub h: usize,
    /// Independence gap `N = n(h' + 1)` for blockwise-independent schedules.
    #[serde(rename = "N")]
    pub independence_gap: usize,
}

/// Compute the structural bounds from per-agent margins and diagonal ranges.
/// Leaders (zero diagonal range) are excluded from the extremes.
pub fn compute_bounds(deltas: &[f64], diag: &[DiagRange], n: usize) -> Result<StructuralBounds> {
    if deltas.len() != n || diag.len() != n {
        return Err(Error::invalid(
            "bounds",
            format!(
                "{} margins and {} ranges for {n} agents",
                deltas.len(),
                diag.len()
            ),
        ));
    }
    let mut delta_min = f64::INFINITY;
    let mut delta_max: f64 = 0.0;
    let mut schedulable = 0usize;
    for (i, (d, range)) in deltas.iter().zip(diag).enumerate() {
        if !range.schedulable() {
            continue;
        }
        if range.lo <= 0.0 {
            return Err(Error::invalid(
                "diag",
                format!("agent {i}: schedulable agent with nonpositive lower bound {}", range.lo),
            ));
        }
        schedulable += 1;
        delta_min = delta_min.min(d / range.hi);
        delta_max = delta_max.max((1.0 - d) / range.lo);
    }
    if schedulable == 0 {
        return Err(Error::invalid("diag", "no schedulable agent"));
    }
    // Smallest positive integer with h' * delta_min >= delta_max, with a
    // relative slack so exact ratios survive binary rounding.
    let ratio = delta_max / delta_min;
    let mut h_prime = (ratio.floor() as usize).saturating_sub(1).max(1);
    while (h_prime as f64) * delta_min + delta_max * 1e-12 < delta_max {
        h_prime += 1;
    }
    Ok(StructuralBounds {
        delta_min,
        delta_max,
        h_prime,
        tau: (n - 1) * (h_prime + 1),
        h: n * (h_prime + 1),
        independence_gap: n * (h_prime + 1),
    })
}

/// Margins plus diagonal ranges: everything the reduction needs to know about
/// the scheduler that produced a log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionParams {
    pub deltas: Vec<f64>,
    pub diag: Vec<DiagRange>,
}

impl ReductionParams {
    pub fn from_laplacian(l: &Laplacian, deltas: &[f64]) -> Self {
        ReductionParams {
            deltas: deltas.to_vec(),
            diag: (0..l.n()).map(|i| DiagRange::fixed(l.diag(i))).collect(),
        }
    }

    pub fn from_scaled(base: &Laplacian, eps_min: f64, eps_max: f64, deltas: &[f64]) -> Self {
        ReductionParams {
            deltas: deltas.to_vec(),
            diag: (0..base.n())
                .map(|i| DiagRange {
                    lo: eps_min * base.diag(i),
                    hi: eps_max * base.diag(i),
                })
                .collect(),
        }
    }

    pub fn from_iid(families: &[crate::sim::RowFamily], deltas: &[f64]) -> Self {
        ReductionParams {
            deltas: deltas.to_vec(),
            diag: families
                .iter()
                .map(|f| DiagRange {
                    lo: f.diag_min,
                    hi: f.diag_max,
                })
                .collect(),
        }
    }

    pub fn bounds(&self, n: usize) -> Result<StructuralBounds> {
        compute_bounds(&self.deltas, &self.diag, n)
    }
}

/// One step of the reduced recursion: the sparse coefficient matrices (delay
/// to matrix, absent delays are zero), the structure matrix `B(k)`, and the
/// realized per-updater delays.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedStep {
    /// Network event time this step corresponds to.
    pub time: f64,
    /// `A^d(k)` by delay `d`; delay 0 always present (identity rows for
    /// nonupdaters plus the updaters' self coefficients).
    pub coeffs: BTreeMap<usize, SquareMat>,
    /// `B(k)`: zero-delay diagonal, off-diagonals summed over delays.
    pub b: SquareMat,
    /// Realized delay `d_ik` per updating agent.
    pub delays: BTreeMap<usize, usize>,
}

/// A distributed run in delayed discrete-time form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedRun {
    pub bounds: StructuralBounds,
    /// Broadcast vectors `y(0) ... y(K)`.
    pub y: Vec<Vec<f64>>,
    pub steps: Vec<ReducedStep>,
}

impl ReducedRun {
    pub fn n(&self) -> usize {
        self.y.first().map_or(0, Vec::len)
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Materialize step `k` as the dense list `A^0 ... A^tau`.
    pub fn coeff_list(&self, k: usize) -> Vec<SquareMat> {
        let n = self.n();
        let max_delay = self
            .steps
            .iter()
            .flat_map(|s| s.coeffs.keys().copied())
            .max()
            .unwrap_or(0)
            .max(self.bounds.tau);
        let mut list = vec![SquareMat::zeros(n); max_delay + 1];
        for (&d, m) in &self.steps[k].coeffs {
            list[d] = m.clone();
        }
        list
    }

    /// The whole run as a finite coefficient schedule for direct iteration.
    pub fn as_schedule(&self) -> Result<FiniteSchedule> {
        let steps = (0..self.steps.len()).map(|k| self.coeff_list(k)).collect();
        FiniteSchedule::new(steps)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Rebuild the delayed recursion from a distributed run's log and trajectory.
///
/// Aborts if the coefficient form disagrees with the simulated breakpoint
/// values beyond [`REPLAY_TOL`], naming the offending agent and step.
pub fn extract_reduced(
    log: &EventLog,
    traj: &Trajectory,
    params: &ReductionParams,
) -> Result<ReducedRun> {
    let n = log.n;
    let bounds = params.bounds(n)?;
    let y0 = traj.state_at(0.0)?;
    let mut y = vec![y0];
    let mut rows_in_force = log.initial_rows.clone();
    let mut last_update_step = vec![0usize; n];
    let mut steps = Vec::with_capacity(log.events.len());

    for (k, event) in log.events.iter().enumerate() {
        let mut a0 = SquareMat::identity(n);
        let mut coeffs: BTreeMap<usize, SquareMat> = BTreeMap::new();
        let mut delays = BTreeMap::new();
        let mut next_y = y[k].clone();

        for u in &event.updates {
            let i = u.agent;
            let row = &rows_in_force[i];
            let l_ii = row[i];
            let d_ik = k - last_update_step[i];
            let self_coeff = 1.0 - u.dt * l_ii;
            a0.set(i, i, self_coeff);

            let mut reconstructed = self_coeff * y[k][i];
            let delayed_y = &y[k - d_ik];
            if d_ik == 0 {
                for (j, &l_ij) in row.iter().enumerate() {
                    if j != i {
                        let c = -u.dt * l_ij;
                        a0.set(i, j, c);
                        reconstructed += c * delayed_y[j];
                    }
                }
            } else {
                let target = coeffs.entry(d_ik).or_insert_with(|| SquareMat::zeros(n));
                for (j, &l_ij) in row.iter().enumerate() {
                    if j != i {
                        let c = -u.dt * l_ij;
                        target.set(i, j, c);
                        reconstructed += c * delayed_y[j];
                    }
                }
            }

            let simulated = traj.agent_state_at(i, event.time)?;
            let error = (reconstructed - simulated).abs();
            if error > REPLAY_TOL {
                return Err(Error::ReplayMismatch {
                    step: k,
                    agent: i,
                    reconstructed,
                    simulated,
                    error,
                    tol: REPLAY_TOL,
                });
            }
            next_y[i] = simulated;
            delays.insert(i, d_ik);
            rows_in_force[i] = u.row.clone();
            last_update_step[i] = k + 1;
        }

        // B(k): diagonal from the zero-delay block, off-diagonal mass summed
        // across delays.
        let mut b = SquareMat::zeros(n);
        for i in 0..n {
            b.set(i, i, a0.get(i, i));
            for j in 0..n {
                if i != j {
                    b.set(i, j, a0.get(i, j));
                }
            }
        }
        for m in coeffs.values() {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        b.set(i, j, b.get(i, j) + m.get(i, j));
                    }
                }
            }
        }
        coeffs.insert(0, a0);

        steps.push(ReducedStep {
            time: event.time,
            coeffs,
            b,
            delays,
        });
        y.push(next_y);
    }

    Ok(ReducedRun { bounds, y, steps })
}

/// A single verification finding.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    RowSum {
        step: usize,
        row: usize,
        sum: f64,
    },
    DiagonalBelowMargin {
        step: usize,
        agent: usize,
        value: f64,
        margin: f64,
    },
    ReplayMismatch {
        step: usize,
        agent: usize,
        error: f64,
    },
    DelayExceeded {
        step: usize,
        agent: usize,
        delay: usize,
        tau: usize,
    },
    UpdateGapExceeded {
        step: usize,
        agent: usize,
        gap: usize,
        h: usize,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::RowSum { step, row, sum } => {
                write!(f, "step {step}: row {row} sums to {sum}")
            }
            Violation::DiagonalBelowMargin {
                step,
                agent,
                value,
                margin,
            } => write!(
                f,
                "step {step}: agent {agent} zero-delay diagonal {value} below margin {margin}"
            ),
            Violation::ReplayMismatch { step, agent, error } => {
                write!(f, "step {step}: agent {agent} replay error {error}")
            }
            Violation::DelayExceeded {
                step,
                agent,
                delay,
                tau,
            } => write!(f, "step {step}: agent {agent} delay {delay} > tau {tau}"),
            Violation::UpdateGapExceeded {
                step,
                agent,
                gap,
                h,
            } => write!(f, "step {step}: agent {agent} update gap {gap} > h {h}"),
        }
    }
}

/// Outcome of replaying and auditing a reduced run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub steps_checked: usize,
    pub max_replay_error: f64,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.violations.len()
    }
}

/// Replay the y-recursion from `y(0)` using only the extracted coefficients
/// and audit every structural claim: agreement with the simulation-derived
/// sequence, row sums, zero-delay diagonals against the smallest margin,
/// realized delays against `tau`, and per-agent update gaps against `h`.
pub fn verify_reduction(reduced: &ReducedRun, deltas: &[f64]) -> VerificationReport {
    let n = reduced.n();
    let min_margin = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let mut violations = Vec::new();
    let mut max_replay_error: f64 = 0.0;

    let mut replayed: Vec<Vec<f64>> = vec![reduced.y[0].clone()];
    let mut last_update_step = vec![0usize; n];

    for (k, step) in reduced.steps.iter().enumerate() {
        let mut next = vec![0.0; n];
        for (i, next_i) in next.iter_mut().enumerate() {
            let mut row_sum = 0.0;
            let mut acc = 0.0;
            for (&d, m) in &step.coeffs {
                let source = &replayed[k - d.min(k)];
                for (j, &src) in source.iter().enumerate() {
                    let c = m.get(i, j);
                    row_sum += c;
                    acc += c * src;
                }
            }
            *next_i = acc;
            if (row_sum - 1.0).abs() > ROW_SUM_TOL {
                violations.push(Violation::RowSum {
                    step: k,
                    row: i,
                    sum: row_sum,
                });
            }
            let a0_ii = step
                .coeffs
                .get(&0)
                .map(|m| m.get(i, i))
                .unwrap_or_default();
            if a0_ii < min_margin - 1e-12 {
                violations.push(Violation::DiagonalBelowMargin {
                    step: k,
                    agent: i,
                    value: a0_ii,
                    margin: min_margin,
                });
            }
            let error = (*next_i - reduced.y[k + 1][i]).abs();
            max_replay_error = max_replay_error.max(error);
            if error > REPLAY_TOL {
                violations.push(Violation::ReplayMismatch {
                    step: k,
                    agent: i,
                    error,
                });
            }
        }
        for (&agent, &delay) in &step.delays {
            if delay > reduced.bounds.tau {
                violations.push(Violation::DelayExceeded {
                    step: k,
                    agent,
                    delay,
                    tau: reduced.bounds.tau,
                });
            }
            let gap = k + 1 - last_update_step[agent];
            if gap > reduced.bounds.h {
                violations.push(Violation::UpdateGapExceeded {
                    step: k,
                    agent,
                    gap,
                    h: reduced.bounds.h,
                });
            }
            last_update_step[agent] = k + 1;
        }
        replayed.push(next);
    }

    VerificationReport {
        steps_checked: reduced.steps.len(),
        max_replay_error,
        violations,
    }
}

/// Check that every full window of `h + 1` consecutive steps dominates the
/// coupling structure: the window sum of `B` carries at least
/// `delta_min * (-l_ij)` on every off-diagonal entry and has a
/// `delta`-spanning tree. Returns true vacuously when the run is shorter than
/// one window or has a single agent.
pub fn window_b_domination_check(
    reduced: &ReducedRun,
    l: &Laplacian,
    bounds: &StructuralBounds,
    delta: f64,
) -> bool {
    let n = reduced.n();
    if n <= 1 {
        return true;
    }
    let window = bounds.h + 1;
    if reduced.steps.len() < window {
        return true;
    }
    for start in 0..=(reduced.steps.len() - window) {
        let mut sum = SquareMat::zeros(n);
        for step in &reduced.steps[start..start + window] {
            sum.add_scaled(1.0, &step.b);
        }
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let needed = bounds.delta_min * (-l.as_mat().get(i, j));
                    if sum.get(i, j) < needed - 1e-12 {
                        return false;
                    }
                }
            }
        }
        if !has_delta_spanning_tree(&sum, delta).0 {
            return false;
        }
    }
    true
}
