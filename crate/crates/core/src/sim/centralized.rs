//! Centralized self-triggered engine.
//!
//! The whole network shares one update clock. On `[t_k, t_{k+1})` every state
//! moves with the constant slope `-(L^k x(t_k))_i`, so the event update is the
//! exact affine map `x(t_{k+1}) = x(t_k) + dt_k * slope`. The interval is
//! drawn from `[delta / l_max^k, (1 - delta) / l_max^k]`.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::rng::{global_rng, Purpose};
use crate::sim::events::{AgentUpdate, EventLog, UpdateEvent};
use crate::sim::params::CentralizedParams;
use crate::sim::topology::LaplacianFamily;
use crate::sim::trajectory::Trajectory;

enum LapSource<'a> {
    Single(&'a Laplacian),
    Family(&'a LaplacianFamily),
}

impl<'a> LapSource<'a> {
    fn n(&self) -> usize {
        match self {
            LapSource::Single(l) => l.n(),
            LapSource::Family(f) => f.n(),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, event: usize) -> Result<&'a Laplacian> {
        match self {
            LapSource::Single(l) => Ok(l),
            LapSource::Family(f) => f.draw(rng, event),
        }
    }
}

fn slope_of(l: &Laplacian, x: &[f64]) -> Vec<f64> {
    l.as_mat().mul_vec(x).into_iter().map(|v| -v).collect()
}

fn run_loop(
    source: LapSource<'_>,
    params: &CentralizedParams,
    x0: &[f64],
    horizon: f64,
    seed: u64,
) -> Result<(Trajectory, EventLog)> {
    params.validate()?;
    let n = source.n();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: x0.len(),
        });
    }
    if horizon < 0.0 {
        return Err(Error::invalid("horizon", format!("{horizon} < 0")));
    }

    let mut dt_rng = global_rng(seed, Purpose::Dt);
    let mut topo_rng = global_rng(seed, Purpose::Topology);

    let mut current = source.draw(&mut topo_rng, 0)?;
    let l_max0 = current.diag_max();
    if l_max0 <= 0.0 {
        return Err(Error::invalid(
            "laplacian",
            "l_max = 0: fully decoupled network cannot run centralized",
        ));
    }

    let mut x = x0.to_vec();
    let mut slope = slope_of(current, &x);
    let mut traj = Trajectory::start(&x, &slope, horizon);
    let mut log = EventLog::new(
        n,
        horizon,
        (0..n).map(|i| current.row(i).to_vec()).collect(),
    );

    let mut t = 0.0;
    let mut event = 0usize;
    loop {
        let l_max = current.diag_max();
        let dt = params
            .dt_rule
            .draw(params.delta / l_max, (1.0 - params.delta) / l_max, &mut dt_rng);
        let t_next = t + dt;
        if t_next > horizon {
            break;
        }
        event += 1;
        for (xi, si) in x.iter_mut().zip(&slope) {
            *xi += dt * si;
        }
        let next = source.draw(&mut topo_rng, event)?;
        let next_l_max = next.diag_max();
        if next_l_max <= 0.0 {
            return Err(Error::invalid(
                "laplacian",
                format!("event {event}: drawn Laplacian has l_max = 0"),
            ));
        }
        slope = slope_of(next, &x);
        let mut updates = Vec::with_capacity(n);
        for i in 0..n {
            traj.record(i, t_next, x[i], slope[i]);
            updates.push(AgentUpdate {
                agent: i,
                dt,
                row: next.row(i).to_vec(),
            });
        }
        log.events.push(UpdateEvent {
            time: t_next,
            updates,
        });
        current = next;
        t = t_next;
    }

    Ok((traj, log))
}

/// Run the centralized scheduler on a fixed Laplacian.
pub fn run_centralized(
    l: &Laplacian,
    params: &CentralizedParams,
    x0: &[f64],
    horizon: f64,
    seed: u64,
) -> Result<(Trajectory, EventLog)> {
    run_loop(LapSource::Single(l), params, x0, horizon, seed)
}

/// Run the centralized scheduler drawing a fresh Laplacian from `family` at
/// every network event.
pub fn run_centralized_switching(
    family: &LaplacianFamily,
    params: &CentralizedParams,
    x0: &[f64],
    horizon: f64,
    seed: u64,
) -> Result<(Trajectory, EventLog)> {
    run_loop(LapSource::Family(family), params, x0, horizon, seed)
}
