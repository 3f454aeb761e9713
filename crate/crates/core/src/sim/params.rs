//! Scheduler parameters: the structural margins `delta` and the rule mapping
//! an admissible interval to a concrete inter-update time.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How an inter-update interval is picked from its admissible range
/// `[delta / l, (1 - delta) / l]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DtRule {
    /// Uniform draw over the admissible interval (the default).
    UniformRandom,
    /// Deterministic point `lo + fraction * (hi - lo)`; useful for worked
    /// examples and reproducible schedules.
    FixedFraction { fraction: f64 },
}

impl DtRule {
    pub fn validate(&self) -> Result<()> {
        if let DtRule::FixedFraction { fraction } = self {
            if !(0.0..=1.0).contains(fraction) {
                return Err(Error::invalid(
                    "dt_rule.fraction",
                    format!("{fraction} outside [0, 1]"),
                ));
            }
        }
        Ok(())
    }

    /// Draw from `[lo, hi]`. Uniform draws consume the stream; fixed
    /// fractions never touch it.
    pub(crate) fn draw(&self, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            DtRule::UniformRandom => rng.gen_range(lo..=hi),
            DtRule::FixedFraction { fraction } => lo + fraction * (hi - lo),
        }
    }
}

fn check_delta(value: f64, name: &'static str) -> Result<()> {
    if !(value > 0.0 && value < 0.5) {
        return Err(Error::invalid(
            name,
            format!("{value} outside the open interval (0, 1/2)"),
        ));
    }
    Ok(())
}

/// Parameters for the centralized schedulers: one network-wide margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralizedParams {
    /// Margin `delta` in (0, 1/2); intervals live in
    /// `[delta / l_max, (1 - delta) / l_max]`.
    pub delta: f64,
    pub dt_rule: DtRule,
}

impl CentralizedParams {
    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta, "delta")?;
        self.dt_rule.validate()
    }
}

/// Parameters for the distributed schedulers: one margin per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributedParams {
    /// Per-agent margins `delta_i` in (0, 1/2); agent `i` draws intervals
    /// from `[delta_i / l_ii, (1 - delta_i) / l_ii]`.
    pub deltas: Vec<f64>,
    pub dt_rule: DtRule,
}

impl DistributedParams {
    /// Same margin for every agent.
    pub fn uniform(n: usize, delta: f64, dt_rule: DtRule) -> Self {
        DistributedParams {
            deltas: vec![delta; n],
            dt_rule,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.deltas.len() != n {
            return Err(Error::invalid(
                "deltas",
                format!("{} margins for {n} agents", self.deltas.len()),
            ));
        }
        for &d in &self.deltas {
            check_delta(d, "deltas")?;
        }
        self.dt_rule.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_must_sit_strictly_inside_the_half_interval() {
        for bad in [0.0, 0.5, 0.6, -0.1] {
            let p = CentralizedParams {
                delta: bad,
                dt_rule: DtRule::UniformRandom,
            };
            assert!(p.validate().is_err(), "delta = {bad} accepted");
        }
        let ok = CentralizedParams {
            delta: 0.4,
            dt_rule: DtRule::UniformRandom,
        };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn fixed_fraction_is_deterministic() {
        use crate::rng::{global_rng, Purpose};
        let rule = DtRule::FixedFraction { fraction: 0.5 };
        let mut rng = global_rng(1, Purpose::Dt);
        assert_eq!(rule.draw(0.4, 0.6, &mut rng), 0.5);
    }
}
