//! Direct iteration of the delayed discrete-time consensus recursion
//!
//! ```text
//! x_i(k+1) = sum_{l=0..tau} sum_j a_ij^l(k) x_j(k-l)
//! ```
//!
//! with nonnegative coefficients whose row sums (across all delays) equal
//! one. This is the brute-force ground truth that continuous-time runs are
//! verified against after reduction.

use std::collections::VecDeque;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::has_delta_spanning_tree;
use crate::matrix::SquareMat;

/// Tolerance on the per-row coefficient sums of a delayed step.
pub const COEFF_ROW_SUM_TOL: f64 = 1e-9;

/// Default iteration cap for [`DelayedSystem::run_to_consensus`]; far beyond
/// any convergence horizon observed at desk scale.
pub const DEFAULT_MAX_STEPS: usize = 100_000;

/// Supplies the coefficient matrices `A^0(k) ... A^tau(k)` for each step.
/// Returning `None` ends a finite schedule.
pub trait CoeffProvider {
    /// Agent count.
    fn dim(&self) -> usize;
    /// Delay bound `tau` (the provider yields `tau + 1` matrices per step).
    fn delay_bound(&self) -> usize;
    /// Coefficients for step `k`, or `None` when the schedule is exhausted.
    fn coeffs(&mut self, step: usize) -> Option<Vec<SquareMat>>;
}

/// A finite coefficient schedule, loadable from JSON as a list of steps, each
/// a list of `tau + 1` row-major matrices.
#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "Vec<Vec<SquareMat>>")]
pub struct FiniteSchedule {
    n: usize,
    tau: usize,
    steps: Vec<Vec<SquareMat>>,
}

impl FiniteSchedule {
    pub fn new(steps: Vec<Vec<SquareMat>>) -> Result<Self> {
        let first = steps
            .first()
            .ok_or_else(|| Error::invalid("steps", "empty schedule"))?;
        let per_step = first.len();
        if per_step == 0 {
            return Err(Error::invalid("steps", "step 0 has no matrices"));
        }
        let n = first[0].n();
        for (k, step) in steps.iter().enumerate() {
            if step.len() != per_step {
                return Err(Error::invalid(
                    "steps",
                    format!("step {k} has {} matrices, expected {per_step}", step.len()),
                ));
            }
            for (l, m) in step.iter().enumerate() {
                if m.n() != n {
                    return Err(Error::DimensionMismatch {
                        left: n,
                        right: m.n(),
                    });
                }
                // Standing assumption of the delayed form: no self-delays.
                if l >= 1 {
                    for i in 0..n {
                        if m.get(i, i) != 0.0 {
                            return Err(Error::CoefficientRow {
                                step: k,
                                row: i,
                                message: format!(
                                    "has nonzero self-delay coefficient {} at delay {l}",
                                    m.get(i, i)
                                ),
                            });
                        }
                    }
                }
            }
        }
        Ok(FiniteSchedule {
            n,
            tau: per_step - 1,
            steps,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Repeat this schedule forever.
    pub fn cycle(self) -> PeriodicSchedule {
        PeriodicSchedule { inner: self }
    }
}

impl TryFrom<Vec<Vec<SquareMat>>> for FiniteSchedule {
    type Error = Error;
    fn try_from(steps: Vec<Vec<SquareMat>>) -> Result<Self> {
        FiniteSchedule::new(steps)
    }
}

impl CoeffProvider for FiniteSchedule {
    fn dim(&self) -> usize {
        self.n
    }

    fn delay_bound(&self) -> usize {
        self.tau
    }

    fn coeffs(&mut self, step: usize) -> Option<Vec<SquareMat>> {
        self.steps.get(step).cloned()
    }
}

/// A finite schedule repeated periodically.
#[derive(Debug, Clone)]
pub struct PeriodicSchedule {
    inner: FiniteSchedule,
}

impl CoeffProvider for PeriodicSchedule {
    fn dim(&self) -> usize {
        self.inner.n
    }

    fn delay_bound(&self) -> usize {
        self.inner.tau
    }

    fn coeffs(&mut self, step: usize) -> Option<Vec<SquareMat>> {
        self.inner.steps.get(step % self.inner.steps.len()).cloned()
    }
}

/// Closure-backed provider for randomized schedules in tests and harnesses.
pub struct FnProvider<F> {
    n: usize,
    tau: usize,
    f: F,
}

impl<F> FnProvider<F>
where
    F: FnMut(usize) -> Option<Vec<SquareMat>>,
{
    pub fn new(n: usize, tau: usize, f: F) -> Self {
        FnProvider { n, tau, f }
    }
}

impl<F> CoeffProvider for FnProvider<F>
where
    F: FnMut(usize) -> Option<Vec<SquareMat>>,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn delay_bound(&self) -> usize {
        self.tau
    }

    fn coeffs(&mut self, step: usize) -> Option<Vec<SquareMat>> {
        (self.f)(step)
    }
}

/// Outcome of running a delayed system toward consensus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    /// Whether the window spread fell below tolerance.
    pub converged: bool,
    /// Steps actually taken.
    pub steps: usize,
    /// Spread over the delay window when iteration stopped.
    pub final_spread: f64,
}

/// The delayed system: a coefficient provider plus the rolling window of the
/// last `tau + 1` states. Single-owner mutable during iteration.
pub struct DelayedSystem<P> {
    n: usize,
    tau: usize,
    provider: P,
    /// `history[l]` is `x(k - l)`; front is the newest state.
    history: VecDeque<Vec<f64>>,
    step: usize,
}

impl<P: CoeffProvider> DelayedSystem<P> {
    /// Start from `x0`, replicating it across the whole delay window.
    pub fn new(provider: P, x0: Vec<f64>) -> Result<Self> {
        let tau = provider.delay_bound();
        let window = vec![x0; tau + 1];
        Self::with_window(provider, window)
    }

    /// Start from an explicit window `[x(0), x(-1), ..., x(-tau)]`.
    pub fn with_window(provider: P, window: Vec<Vec<f64>>) -> Result<Self> {
        let n = provider.dim();
        let tau = provider.delay_bound();
        if window.len() != tau + 1 {
            return Err(Error::invalid(
                "window",
                format!("expected {} vectors, got {}", tau + 1, window.len()),
            ));
        }
        for x in &window {
            if x.len() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: x.len(),
                });
            }
        }
        Ok(DelayedSystem {
            n,
            tau,
            provider,
            history: window.into(),
            step: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    /// Current state `x(k)`.
    pub fn state(&self) -> &[f64] {
        &self.history[0]
    }

    /// Max minus min over the whole delay window. The window is the system's
    /// true state, and its spread is the quantity that shrinks monotonically.
    pub fn window_spread(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in &self.history {
            for &v in x {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        hi - lo
    }

    /// Advance one step. Returns the new state, or `None` if the provider's
    /// schedule ended. Validates nonnegativity, the positive-diagonal
    /// requirement on `A^0`, and per-row coefficient sums.
    pub fn step(&mut self) -> Result<Option<&[f64]>> {
        let Some(coeffs) = self.provider.coeffs(self.step) else {
            return Ok(None);
        };
        let next = self.apply(&coeffs)?;
        self.history.pop_back();
        self.history.push_front(next);
        self.step += 1;
        Ok(Some(&self.history[0]))
    }

    fn apply(&self, coeffs: &[SquareMat]) -> Result<Vec<f64>> {
        if coeffs.len() != self.tau + 1 {
            return Err(Error::invalid(
                "coeffs",
                format!("expected {} matrices, got {}", self.tau + 1, coeffs.len()),
            ));
        }
        let mut next = vec![0.0; self.n];
        for (i, next_i) in next.iter_mut().enumerate() {
            let mut row_sum = 0.0;
            let mut acc = 0.0;
            for (l, a) in coeffs.iter().enumerate() {
                if a.n() != self.n {
                    return Err(Error::DimensionMismatch {
                        left: self.n,
                        right: a.n(),
                    });
                }
                for j in 0..self.n {
                    let c = a.get(i, j);
                    if c < 0.0 {
                        return Err(Error::CoefficientRow {
                            step: self.step,
                            row: i,
                            message: format!("negative coefficient {c} at delay {l}, column {j}"),
                        });
                    }
                    row_sum += c;
                    acc += c * self.history[l][j];
                }
            }
            if (row_sum - 1.0).abs() > COEFF_ROW_SUM_TOL {
                return Err(Error::CoefficientRow {
                    step: self.step,
                    row: i,
                    message: format!("sums to {row_sum}, expected 1 within {COEFF_ROW_SUM_TOL}"),
                });
            }
            if coeffs[0].get(i, i) <= 0.0 {
                return Err(Error::CoefficientRow {
                    step: self.step,
                    row: i,
                    message: format!(
                        "zero-delay diagonal {} is not positive",
                        coeffs[0].get(i, i)
                    ),
                });
            }
            *next_i = acc;
        }
        Ok(next)
    }

    /// Iterate until the window spread falls below `tol`, the schedule ends,
    /// or `max_steps` is reached.
    pub fn run_to_consensus(&mut self, tol: f64, max_steps: usize) -> Result<RunOutcome> {
        if tol <= 0.0 {
            return Err(Error::invalid("tol", format!("{tol} must be positive")));
        }
        let mut taken = 0;
        loop {
            let spread = self.window_spread();
            if spread < tol {
                return Ok(RunOutcome {
                    converged: true,
                    steps: taken,
                    final_spread: spread,
                });
            }
            if taken >= max_steps || self.step()?.is_none() {
                let spread = self.window_spread();
                return Ok(RunOutcome {
                    converged: spread < tol,
                    steps: taken,
                    final_spread: spread,
                });
            }
            taken += 1;
        }
    }
}

/// Collapse one step's coefficients to the structure matrix `B(k)`:
/// the diagonal comes from `A^0` alone and each off-diagonal entry is the
/// total mass across delays. With no self-delay coefficients this coincides
/// with the plain entrywise sum of all `A^l(k)`.
pub fn build_b(coeffs: &[SquareMat]) -> Result<SquareMat> {
    let first = coeffs
        .first()
        .ok_or_else(|| Error::invalid("coeffs", "empty coefficient list"))?;
    let n = first.n();
    let mut b = SquareMat::zeros(n);
    for i in 0..n {
        b.set(i, i, first.get(i, i));
        for (l, a) in coeffs.iter().enumerate() {
            if a.n() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: a.n(),
                });
            }
            let _ = l;
            for j in 0..n {
                if i != j {
                    b.set(i, j, b.get(i, j) + a.get(i, j));
                }
            }
        }
    }
    Ok(b)
}

/// Sum `B(m)` over `h` steps starting at `k` and test the window sum for a
/// delta-spanning tree.
pub fn window_tree_check<P: CoeffProvider>(
    provider: &mut P,
    k: usize,
    h: usize,
    delta: f64,
) -> Result<bool> {
    if h == 0 {
        return Err(Error::invalid("h", "window length must be at least 1"));
    }
    let n = provider.dim();
    let mut sum = SquareMat::zeros(n);
    for m in k..k + h {
        let Some(coeffs) = provider.coeffs(m) else {
            break;
        };
        sum.add_scaled(1.0, &build_b(&coeffs)?);
    }
    Ok(has_delta_spanning_tree(&sum, delta).0)
}
