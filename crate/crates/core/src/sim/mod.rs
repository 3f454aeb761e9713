//! Continuous-time self-triggered simulation.
//!
//! All engines integrate exactly: controls are piecewise constant, states are
//! piecewise linear, and event updates are single multiply-adds. There is no
//! ODE solver anywhere, so equivalence checks against the reduced discrete
//! systems are limited only by float rounding.

mod centralized;
mod distributed;
mod events;
mod params;
mod topology;
mod trajectory;

pub use centralized::{run_centralized, run_centralized_switching};
pub use distributed::{run_distributed, run_distributed_iid, run_distributed_scaled};
pub use events::{AgentUpdate, EventLog, UpdateEvent};
pub use params::{CentralizedParams, DistributedParams, DtRule};
pub use topology::{LaplacianFamily, RowFamily, RowSource};
pub use trajectory::{disagreement, AgentPath, Breakpoint, Trajectory};
