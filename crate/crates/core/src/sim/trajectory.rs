//! Exact piecewise-linear trajectories.
//!
//! Slopes are constant between an agent's breakpoints, so states advance as
//! `value + slope * dt` with no integration error. Breakpoint values are
//! stored once and shared by the segments on either side, which makes the
//! continuity invariant structural.

use serde::Serialize;

use crate::error::{Error, Result};

/// One breakpoint of an agent's path: the exact state at `t` and the slope
/// that holds until the next breakpoint (or the horizon).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakpoint {
    pub t: f64,
    pub value: f64,
    pub slope: f64,
}

/// A single agent's piecewise-linear path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentPath {
    breaks: Vec<Breakpoint>,
}

impl AgentPath {
    fn new(t: f64, value: f64, slope: f64) -> Self {
        AgentPath {
            breaks: vec![Breakpoint { t, value, slope }],
        }
    }

    fn push(&mut self, t: f64, value: f64, slope: f64) {
        debug_assert!(t > self.breaks.last().map_or(f64::NEG_INFINITY, |b| b.t));
        self.breaks.push(Breakpoint { t, value, slope });
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breaks
    }

    /// State at `t >= breaks[0].t` by linear evaluation inside the containing
    /// segment; exact at breakpoints.
    fn eval(&self, t: f64) -> f64 {
        let idx = match self
            .breaks
            .binary_search_by(|b| b.t.partial_cmp(&t).expect("no NaN times"))
        {
            Ok(exact) => return self.breaks[exact].value,
            Err(0) => 0,
            Err(after) => after - 1,
        };
        let b = &self.breaks[idx];
        b.value + b.slope * (t - b.t)
    }
}

/// Per-agent piecewise-linear state history over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    horizon: f64,
    agents: Vec<AgentPath>,
}

impl Trajectory {
    /// Start all agents at `t = 0` with the given values and slopes.
    pub(crate) fn start(x0: &[f64], slopes: &[f64], horizon: f64) -> Self {
        let agents = x0
            .iter()
            .zip(slopes)
            .map(|(&v, &s)| AgentPath::new(0.0, v, s))
            .collect();
        Trajectory { horizon, agents }
    }

    /// Record a breakpoint for one agent.
    pub(crate) fn record(&mut self, agent: usize, t: f64, value: f64, slope: f64) {
        self.agents[agent].push(t, value, slope);
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn agent(&self, i: usize) -> &AgentPath {
        &self.agents[i]
    }

    /// One agent's state at time `t`.
    pub fn agent_state_at(&self, agent: usize, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(self.agents[agent].eval(t))
    }

    /// Full state vector at time `t`.
    pub fn state_at(&self, t: f64) -> Result<Vec<f64>> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(self.agents.iter().map(|a| a.eval(t)).collect())
    }

    /// Disagreement `max_i x_i(t) - min_i x_i(t)` at time `t`.
    pub fn disagreement_at(&self, t: f64) -> Result<f64> {
        Ok(disagreement(&self.state_at(t)?))
    }

    /// Sorted, deduplicated union of all agents' breakpoint times.
    pub fn breakpoint_times(&self) -> Vec<f64> {
        let mut times: Vec<f64> = self
            .agents
            .iter()
            .flat_map(|a| a.breaks.iter().map(|b| b.t))
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).expect("no NaN times"));
        times.dedup();
        times
    }
}

/// Spread of a state vector: `max_i x_i - min_i x_i` (zero for empty input).
pub fn disagreement(x: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in x {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        0.0
    } else {
        hi - lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disagreement_examples() {
        assert_eq!(disagreement(&[0.5, 0.5]), 0.0);
        assert_eq!(disagreement(&[0.0, 1.0]), 1.0);
        assert_eq!(disagreement(&[1.0, 4.0, 2.0]), 3.0);
    }

    #[test]
    fn state_at_is_exact_at_breakpoints_and_linear_inside() {
        let mut traj = Trajectory::start(&[0.0], &[1.0], 2.0);
        traj.record(0, 1.0, 1.0, -2.0);
        assert_eq!(traj.agent_state_at(0, 0.0).unwrap(), 0.0);
        assert_eq!(traj.agent_state_at(0, 0.5).unwrap(), 0.5);
        assert_eq!(traj.agent_state_at(0, 1.0).unwrap(), 1.0);
        assert_eq!(traj.agent_state_at(0, 1.25).unwrap(), 0.5);
    }

    #[test]
    fn constant_trajectory_everywhere() {
        let traj = Trajectory::start(&[3.0, 3.0], &[0.0, 0.0], 5.0);
        for t in [0.0, 1.3, 5.0] {
            assert_eq!(traj.state_at(t).unwrap(), vec![3.0, 3.0]);
        }
    }

    #[test]
    fn out_of_range_queries_fail() {
        let traj = Trajectory::start(&[0.0], &[0.0], 1.0);
        assert!(traj.state_at(-0.1).is_err());
        assert!(traj.state_at(1.1).is_err());
    }
}
