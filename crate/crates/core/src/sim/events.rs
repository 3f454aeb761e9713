//! Update-event logs.
//!
//! A log is the globally ordered sequence of network update events. Agents
//! whose scheduled times coincide are merged into one event (ties broken and
//! listed by agent index). Each per-agent record carries the length of the
//! inter-update interval that just ended and the coupling row in force after
//! the update; the rows in force before any event are kept in the log header.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One agent's share of a (possibly merged) update event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentUpdate {
    /// Updating agent.
    pub agent: usize,
    /// Length of the inter-update interval that ended at this event.
    pub dt: f64,
    /// Coupling row in force after the update.
    pub row: Vec<f64>,
}

/// A network update event: all agents updating at the same instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateEvent {
    /// Event time in seconds.
    pub time: f64,
    /// Per-agent records, sorted by agent index.
    pub updates: Vec<AgentUpdate>,
}

impl UpdateEvent {
    /// Agent indices updating at this event.
    pub fn agents(&self) -> impl Iterator<Item = usize> + '_ {
        self.updates.iter().map(|u| u.agent)
    }
}

/// Header line of the JSONL export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LogHeader {
    n: usize,
    horizon: f64,
    initial_rows: Vec<Vec<f64>>,
}

/// Globally ordered event log of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    /// Agent count.
    pub n: usize,
    /// Simulated horizon in seconds.
    pub horizon: f64,
    /// Per-agent coupling rows in force on `[0, first update)`.
    pub initial_rows: Vec<Vec<f64>>,
    /// Events in time order.
    pub events: Vec<UpdateEvent>,
}

impl EventLog {
    pub(crate) fn new(n: usize, horizon: f64, initial_rows: Vec<Vec<f64>>) -> Self {
        EventLog {
            n,
            horizon,
            initial_rows,
            events: Vec::new(),
        }
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    /// Write as JSON lines: a header line followed by one event per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let header = LogHeader {
            n: self.n,
            horizon: self.horizon,
            initial_rows: self.initial_rows.clone(),
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for event in &self.events {
            serde_json::to_writer(&mut out, event)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
    }

    /// Times are nondecreasing across the log (strictly increasing between
    /// merged events by construction).
    pub fn times_are_ordered(&self) -> bool {
        self.events.windows(2).all(|w| w[0].time < w[1].time)
    }
}
