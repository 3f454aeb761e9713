//! Distributed self-triggered engine.
//!
//! Each agent runs its own clock. At one of its update instants the agent
//! reads every neighbor's last broadcast value, (re)samples its coupling row
//! if the mode switches topologies, freezes the resulting control until its
//! next update, and schedules that update `dt` ahead with
//! `dt in [delta_i / l_ii, (1 - delta_i) / l_ii]`. Broadcasts arriving in
//! between are ignored until the agent's own next update. Agents whose
//! diagonal coupling is zero (leaders) never update at all.
//!
//! Agents scheduled for exactly the same instant are merged into a single
//! network event: all of them settle their values against the old broadcasts
//! first, then all recompute controls against the refreshed broadcasts.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::rng::{derived_rng, Purpose};
use crate::sim::events::{AgentUpdate, EventLog, UpdateEvent};
use crate::sim::params::DistributedParams;
use crate::sim::topology::{RowFamily, RowSource};
use crate::sim::trajectory::Trajectory;

/// Queue time: totally ordered f64 (simulation times are never NaN).
#[derive(Debug, Clone, Copy, PartialEq)]
struct QueueTime(f64);

impl Eq for QueueTime {}

impl PartialOrd for QueueTime {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueTime {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .partial_cmp(&other.0)
            .expect("simulation times are not NaN")
    }
}

struct AgentState {
    /// Exact state at `t_last`.
    value: f64,
    /// Slope held since `t_last`.
    slope: f64,
    /// Time of this agent's last own update (0 before the first).
    t_last: f64,
    /// Scheduled length of the running interval.
    pending_dt: f64,
    /// Row in force on the running interval.
    row: Vec<f64>,
}

struct Streams {
    dt: Vec<ChaCha8Rng>,
    eps: Vec<ChaCha8Rng>,
    row: Vec<ChaCha8Rng>,
}

impl Streams {
    fn new(seed: u64, n: usize) -> Self {
        Streams {
            dt: (0..n).map(|i| derived_rng(seed, i, Purpose::Dt)).collect(),
            eps: (0..n).map(|i| derived_rng(seed, i, Purpose::Eps)).collect(),
            row: (0..n)
                .map(|i| derived_rng(seed, i, Purpose::RowSelect))
                .collect(),
        }
    }
}

fn dot(row: &[f64], x: &[f64]) -> f64 {
    row.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn run_loop(
    source: RowSource<'_>,
    params: &DistributedParams,
    x0: &[f64],
    horizon: f64,
    seed: u64,
) -> Result<(Trajectory, EventLog)> {
    source.validate()?;
    let n = source.n();
    params.validate(n)?;
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: x0.len(),
        });
    }
    if horizon < 0.0 {
        return Err(Error::invalid("horizon", format!("{horizon} < 0")));
    }

    let mut streams = Streams::new(seed, n);
    let mut broadcast = x0.to_vec();

    // Sample the rows in force on [0, first own update) and compute the
    // initial frozen controls.
    let mut agents: Vec<AgentState> = Vec::with_capacity(n);
    for (i, &x) in x0.iter().enumerate() {
        let row = source.sample(i, &mut streams.eps[i], &mut streams.row[i]);
        agents.push(AgentState {
            value: x,
            slope: 0.0,
            t_last: 0.0,
            pending_dt: f64::INFINITY,
            row,
        });
    }
    for agent in &mut agents {
        agent.slope = -dot(&agent.row, &broadcast);
    }

    let slopes: Vec<f64> = agents.iter().map(|a| a.slope).collect();
    let mut traj = Trajectory::start(x0, &slopes, horizon);
    let mut log = EventLog::new(n, horizon, agents.iter().map(|a| a.row.clone()).collect());

    let mut queue: BinaryHeap<Reverse<(QueueTime, usize)>> = BinaryHeap::new();
    for (i, agent) in agents.iter_mut().enumerate() {
        let l_ii = agent.row[i];
        if l_ii > 0.0 {
            let dt = params.dt_rule.draw(
                params.deltas[i] / l_ii,
                (1.0 - params.deltas[i]) / l_ii,
                &mut streams.dt[i],
            );
            agent.pending_dt = dt;
            queue.push(Reverse((QueueTime(dt), i)));
        }
    }

    while let Some(&Reverse((QueueTime(t), _))) = queue.peek() {
        if t > horizon {
            break;
        }
        // Merge every agent scheduled for exactly this instant.
        let mut updaters = Vec::new();
        while let Some(&Reverse((QueueTime(tt), agent))) = queue.peek() {
            if tt == t {
                queue.pop();
                updaters.push(agent);
            } else {
                break;
            }
        }
        updaters.sort_unstable();

        // Settle values at the event instant and broadcast them. Ties settle
        // against the pre-event broadcasts, exactly like distinct steps of
        // the reduced recursion merged into one.
        let mut ended_dt = Vec::with_capacity(updaters.len());
        for &i in &updaters {
            let a = &mut agents[i];
            ended_dt.push(a.pending_dt);
            a.value += a.slope * a.pending_dt;
            a.t_last = t;
            broadcast[i] = a.value;
        }

        // Refresh rows and controls against the updated broadcasts, schedule
        // the next updates, and record the merged event.
        let mut updates = Vec::with_capacity(updaters.len());
        for (&i, &dt_ended) in updaters.iter().zip(&ended_dt) {
            let row = source.sample(i, &mut streams.eps[i], &mut streams.row[i]);
            let slope = -dot(&row, &broadcast);
            let a = &mut agents[i];
            a.row = row.clone();
            a.slope = slope;
            traj.record(i, t, a.value, slope);
            let l_ii = row[i];
            if l_ii > 0.0 {
                let dt = params.dt_rule.draw(
                    params.deltas[i] / l_ii,
                    (1.0 - params.deltas[i]) / l_ii,
                    &mut streams.dt[i],
                );
                a.pending_dt = dt;
                queue.push(Reverse((QueueTime(t + dt), i)));
            }
            updates.push(AgentUpdate {
                agent: i,
                dt: dt_ended,
                row,
            });
        }
        log.events.push(UpdateEvent { time: t, updates });
    }

    Ok((traj, log))
}

/// Distributed run on a fixed Laplacian.
pub fn run_distributed(
    l: &Laplacian,
    params: &DistributedParams,
    x0: &[f64],
    horizon: f64,
    seed: u64,
) -> Result<(Trajectory, EventLog)> {
    run_loop(RowSource::Fixed(l), params, x0, horizon, seed)
}

/// Distributed run where agent `i` rescales its base row by a factor drawn
/// from `[eps_min, eps_max]` at each of its updates.
pub fn run_distributed_scaled(
    base: &Laplacian,
    eps_min: f64,
    eps_max: f64,
    params: &DistributedParams,
    x0: &[f64],
    horizon: f64,
    seed: u64,
) -> Result<(Trajectory, EventLog)> {
    run_loop(
        RowSource::Scaled {
            base,
            eps_min,
            eps_max,
        },
        params,
        x0,
        horizon,
        seed,
    )
}

/// Distributed run where agent `i` redraws its whole row uniformly from its
/// family at each of its updates.
pub fn run_distributed_iid(
    families: &[RowFamily],
    params: &DistributedParams,
    x0: &[f64],
    horizon: f64,
    seed: u64,
) -> Result<(Trajectory, EventLog)> {
    run_loop(RowSource::Iid(families), params, x0, horizon, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::params::DtRule;

    fn uniform_params(n: usize, delta: f64) -> DistributedParams {
        DistributedParams::uniform(n, delta, DtRule::UniformRandom)
    }

    #[test]
    fn single_agent_stays_constant() {
        let l = Laplacian::from_rows(vec![vec![0.0]]).unwrap();
        let (traj, log) = run_distributed(&l, &uniform_params(1, 0.1), &[4.2], 10.0, 3).unwrap();
        assert_eq!(log.event_count(), 0);
        assert_eq!(traj.state_at(10.0).unwrap(), vec![4.2]);
    }

    #[test]
    fn follower_converges_monotonically_to_leader() {
        // Leader row zero, follower couples with weight 1: the follower's
        // broadcast obeys x2 <- (1 - dt) x2 + dt x1 with dt in [0.1, 0.9].
        let l = Laplacian::from_rows(vec![vec![0.0, 0.0], vec![-1.0, 1.0]]).unwrap();
        let (traj, log) = run_distributed(&l, &uniform_params(2, 0.1), &[5.0, 1.0], 30.0, 11)
            .unwrap();
        assert!(log.event_count() > 5);
        // Only the follower ever updates.
        for event in &log.events {
            assert_eq!(event.agents().collect::<Vec<_>>(), vec![1]);
        }
        // Monotone approach toward the leader's constant state.
        let mut prev = 1.0;
        for b in traj.agent(1).breakpoints().iter().skip(1) {
            assert!(b.value >= prev - 1e-12 && b.value <= 5.0 + 1e-12);
            prev = b.value;
        }
        assert!((traj.agent_state_at(1, 30.0).unwrap() - 5.0).abs() < 1e-3);
        assert_eq!(traj.agent_state_at(0, 30.0).unwrap(), 5.0);
    }

    #[test]
    fn directed_cycle_reaches_consensus() {
        let l = Laplacian::from_rows(vec![
            vec![1.0, -1.0, 0.0],
            vec![0.0, 1.0, -1.0],
            vec![-1.0, 0.0, 1.0],
        ])
        .unwrap();
        for seed in 0..20 {
            let (traj, _) = run_distributed(
                &l,
                &uniform_params(3, 0.1),
                &[0.0, 5.0, -3.0],
                100.0,
                seed,
            )
            .unwrap();
            assert!(
                traj.disagreement_at(100.0).unwrap() < 1e-3,
                "seed {seed} did not converge"
            );
        }
    }

    #[test]
    fn identical_seeds_give_identical_runs() {
        let l = Laplacian::from_rows(vec![
            vec![1.0, -1.0, 0.0],
            vec![0.0, 1.0, -1.0],
            vec![-1.0, 0.0, 1.0],
        ])
        .unwrap();
        let a = run_distributed(&l, &uniform_params(3, 0.2), &[1.0, 2.0, 3.0], 25.0, 99).unwrap();
        let b = run_distributed(&l, &uniform_params(3, 0.2), &[1.0, 2.0, 3.0], 25.0, 99).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        // Bit-identical serialized artifacts as well.
        assert_eq!(
            a.1.to_jsonl_string().unwrap(),
            b.1.to_jsonl_string().unwrap()
        );
    }

    #[test]
    fn scaled_with_unit_factor_reproduces_plain_run() {
        let l = Laplacian::from_rows(vec![
            vec![2.0, -2.0, 0.0],
            vec![-0.5, 1.5, -1.0],
            vec![-1.0, 0.0, 1.0],
        ])
        .unwrap();
        let params = uniform_params(3, 0.15);
        let plain = run_distributed(&l, &params, &[0.0, 1.0, 2.0], 20.0, 5).unwrap();
        let scaled =
            run_distributed_scaled(&l, 1.0, 1.0, &params, &[0.0, 1.0, 2.0], 20.0, 5).unwrap();
        assert_eq!(plain.0, scaled.0);
        assert_eq!(plain.1, scaled.1);
    }

    #[test]
    fn singleton_families_reproduce_plain_run() {
        let l = Laplacian::from_rows(vec![
            vec![1.0, -1.0, 0.0],
            vec![0.0, 1.0, -1.0],
            vec![-1.0, 0.0, 1.0],
        ])
        .unwrap();
        let params = uniform_params(3, 0.1);
        let families: Vec<RowFamily> = (0..3)
            .map(|i| RowFamily::singleton(i, l.row(i).to_vec()))
            .collect();
        let plain = run_distributed(&l, &params, &[3.0, -1.0, 0.5], 20.0, 21).unwrap();
        let iid = run_distributed_iid(&families, &params, &[3.0, -1.0, 0.5], 20.0, 21).unwrap();
        assert_eq!(plain.0, iid.0);
        assert_eq!(plain.1, iid.1);
    }

    #[test]
    fn scaled_intervals_respect_per_event_bounds() {
        let l = Laplacian::from_rows(vec![
            vec![1.0, -1.0, 0.0],
            vec![0.0, 1.0, -1.0],
            vec![-1.0, 0.0, 1.0],
        ])
        .unwrap();
        let params = uniform_params(3, 0.1);
        let (_, log) =
            run_distributed_scaled(&l, 0.5, 2.0, &params, &[0.0, 1.0, 2.0], 30.0, 13).unwrap();
        assert!(log.event_count() > 10);
        // The row in force during the ended interval is the previous record.
        let mut rows_in_force: Vec<Vec<f64>> = log.initial_rows.clone();
        for event in &log.events {
            for u in &event.updates {
                let l_ii = rows_in_force[u.agent][u.agent];
                let lo = 0.1 / l_ii;
                let hi = 0.9 / l_ii;
                assert!(
                    u.dt >= lo - 1e-12 && u.dt <= hi + 1e-12,
                    "dt {} outside [{lo}, {hi}]",
                    u.dt
                );
                rows_in_force[u.agent] = u.row.clone();
            }
        }
    }

    #[test]
    fn fixed_fraction_ties_merge_into_network_events() {
        // Identical margins, diagonals, and rule: every agent updates at the
        // same instants, so each event carries the whole network.
        let l = Laplacian::from_rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let params = DistributedParams::uniform(2, 0.25, DtRule::FixedFraction { fraction: 0.5 });
        let (_, log) = run_distributed(&l, &params, &[0.0, 1.0], 3.0, 1).unwrap();
        assert!(log.event_count() > 0);
        for event in &log.events {
            assert_eq!(event.agents().collect::<Vec<_>>(), vec![0, 1]);
        }
    }

    #[test]
    fn consensus_initial_condition_stays_put() {
        let l = Laplacian::from_rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let (traj, _) = run_distributed(&l, &uniform_params(2, 0.1), &[2.0, 2.0], 10.0, 17)
            .unwrap();
        for t in [0.0, 3.3, 10.0] {
            assert_eq!(traj.state_at(t).unwrap(), vec![2.0, 2.0]);
        }
    }
}
