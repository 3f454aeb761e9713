//! Topology providers: where each agent's coupling row comes from.
//!
//! Three kinds cover the switching variants. A fixed Laplacian hands every
//! agent its row unchanged. A scaled provider multiplies the base row by a
//! per-update scaling factor. An i.i.d. provider resamples the whole row from
//! a per-agent family at each of that agent's updates. Centralized switching
//! instead draws a whole Laplacian per network event from a family.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Laplacian;

/// Row-sum tolerance when validating family membership.
const ROW_SUM_TOL: f64 = 1e-9;

/// A per-agent family of admissible coupling rows. Every row must have its
/// diagonal entry inside `[diag_min, diag_max]`, nonpositive entries
/// elsewhere, and zero sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFamily {
    /// Candidate rows; selection is uniform.
    pub rows: Vec<Vec<f64>>,
    /// Lower diagonal bound `a_i > 0`.
    pub diag_min: f64,
    /// Upper diagonal bound `b_i >= a_i`.
    pub diag_max: f64,
}

impl RowFamily {
    /// Family with one fixed row (degenerate distribution).
    pub fn singleton(agent: usize, row: Vec<f64>) -> Self {
        let d = row[agent];
        RowFamily {
            rows: vec![row],
            diag_min: d,
            diag_max: d,
        }
    }

    /// Check that every row belongs to the admissible set of agent `i`.
    pub fn validate_for_agent(&self, agent: usize, n: usize) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::RowOutsideFamily {
                agent,
                index: 0,
                message: "family has no rows".into(),
            });
        }
        if !(self.diag_min > 0.0 && self.diag_min <= self.diag_max) {
            return Err(Error::RowOutsideFamily {
                agent,
                index: 0,
                message: format!(
                    "diagonal bounds [{}, {}] must satisfy 0 < a <= b",
                    self.diag_min, self.diag_max
                ),
            });
        }
        for (index, row) in self.rows.iter().enumerate() {
            let fail = |message: String| Error::RowOutsideFamily {
                agent,
                index,
                message,
            };
            if row.len() != n {
                return Err(fail(format!("row length {} for {n} agents", row.len())));
            }
            let d = row[agent];
            if !(self.diag_min..=self.diag_max).contains(&d) {
                return Err(fail(format!(
                    "diagonal {d} outside [{}, {}]",
                    self.diag_min, self.diag_max
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if j != agent && v > 0.0 {
                    return Err(fail(format!("positive off-diagonal {v} at column {j}")));
                }
            }
            let sum: f64 = row.iter().sum();
            if sum.abs() > ROW_SUM_TOL {
                return Err(fail(format!("row sums to {sum}, expected 0")));
            }
        }
        Ok(())
    }
}

/// Per-agent row source for the distributed engines. Sampling happens at
/// `t = 0` and again at each of the agent's own updates.
#[derive(Debug, Clone)]
pub enum RowSource<'a> {
    /// Rows of one fixed Laplacian.
    Fixed(&'a Laplacian),
    /// Base rows scaled by a per-update factor drawn from
    /// `[eps_min, eps_max]`.
    Scaled {
        base: &'a Laplacian,
        eps_min: f64,
        eps_max: f64,
    },
    /// Independent uniform draws from per-agent row families.
    Iid(&'a [RowFamily]),
}

impl<'a> RowSource<'a> {
    pub fn n(&self) -> usize {
        match self {
            RowSource::Fixed(l) | RowSource::Scaled { base: l, .. } => l.n(),
            RowSource::Iid(families) => families.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RowSource::Fixed(_) => Ok(()),
            RowSource::Scaled {
                eps_min, eps_max, ..
            } => {
                if !(*eps_min > 0.0 && eps_min <= eps_max) {
                    return Err(Error::invalid(
                        "eps",
                        format!("bounds [{eps_min}, {eps_max}] must satisfy 0 < min <= max"),
                    ));
                }
                Ok(())
            }
            RowSource::Iid(families) => {
                let n = families.len();
                for (agent, family) in families.iter().enumerate() {
                    family.validate_for_agent(agent, n)?;
                }
                Ok(())
            }
        }
    }

    /// Sample agent `i`'s row. `eps_rng` feeds scaling draws, `row_rng` feeds
    /// family selection; each kind touches only its own stream so degenerate
    /// configurations stay aligned with the plain distributed run.
    pub(crate) fn sample(
        &self,
        agent: usize,
        eps_rng: &mut ChaCha8Rng,
        row_rng: &mut ChaCha8Rng,
    ) -> Vec<f64> {
        match self {
            RowSource::Fixed(l) => l.row(agent).to_vec(),
            RowSource::Scaled {
                base,
                eps_min,
                eps_max,
            } => {
                let eps = eps_rng.gen_range(*eps_min..=*eps_max);
                base.row(agent).iter().map(|&v| eps * v).collect()
            }
            RowSource::Iid(families) => {
                let family = &families[agent];
                let index = row_rng.gen_range(0..family.rows.len());
                family.rows[index].clone()
            }
        }
    }
}

/// Laplacian family for centralized switching: one member is drawn uniformly
/// at each network event. `l_max` of every drawn member must stay inside the
/// declared `[l_min, l_max_bound]` band.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianFamily {
    laplacians: Vec<Laplacian>,
    l_min: f64,
    l_max_bound: f64,
}

impl LaplacianFamily {
    /// Derive the band from the members themselves.
    pub fn new(laplacians: Vec<Laplacian>) -> Result<Self> {
        if laplacians.is_empty() {
            return Err(Error::invalid("laplacians", "empty family"));
        }
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for l in &laplacians {
            let m = l.diag_max();
            lo = lo.min(m);
            hi = hi.max(m);
        }
        Self::with_bounds(laplacians, lo, hi)
    }

    /// Declare the band explicitly; members violating it abort at draw time.
    pub fn with_bounds(laplacians: Vec<Laplacian>, l_min: f64, l_max_bound: f64) -> Result<Self> {
        if laplacians.is_empty() {
            return Err(Error::invalid("laplacians", "empty family"));
        }
        if !(l_min > 0.0 && l_min <= l_max_bound) {
            return Err(Error::invalid(
                "l_bounds",
                format!("[{l_min}, {l_max_bound}] must satisfy 0 < min <= max"),
            ));
        }
        let n = laplacians[0].n();
        for l in &laplacians {
            if l.n() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: l.n(),
                });
            }
        }
        Ok(LaplacianFamily {
            laplacians,
            l_min,
            l_max_bound,
        })
    }

    pub fn n(&self) -> usize {
        self.laplacians[0].n()
    }

    pub fn members(&self) -> &[Laplacian] {
        &self.laplacians
    }

    pub(crate) fn draw(&self, rng: &mut ChaCha8Rng, event: usize) -> Result<&Laplacian> {
        let index = rng.gen_range(0..self.laplacians.len());
        let l = &self.laplacians[index];
        let l_max = l.diag_max();
        if !(self.l_min..=self.l_max_bound).contains(&l_max) {
            return Err(Error::ProviderBounds {
                event,
                l_max,
                l_min: self.l_min,
                l_max_bound: self.l_max_bound,
            });
        }
        Ok(l)
    }
}
