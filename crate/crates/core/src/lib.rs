//! Discrete-event simulator for IEEE 802.11e HCCA uplink video.
//!
//! Two TXOP policies are modelled side by side: the reference HCCA scheduler,
//! which grants each stream a fixed TXOP sized from its TSPEC, and a dynamic
//! scheduler that sizes each grant from the next-frame size the station
//! reports in the QS field of its previous data frame.
//!
//! The crate is organised bottom-up:
//!
//! * [`trace`] parses and synthesises MPEG-4 frame-size traces,
//! * [`tspec`] derives traffic specifications from them,
//! * [`mac`] holds the 802.11b airtime model,
//! * [`scheduler`] implements SI selection, TXOP sizing and admission,
//! * [`engine`] runs the polling timeline and records an event log,
//! * [`metrics`] reduces logs to delay, throughput and TXOP figures,
//! * [`scenario`], [`batch`] and [`report`] drive experiments and write CSV.

pub mod batch;
pub mod engine;
mod error;
pub mod mac;
pub mod metrics;
pub mod report;
pub mod scenario;
pub mod scheduler;
pub mod trace;
pub mod tspec;

pub use engine::{run, EventKind, EventLog, LogRecord, SimConfig, SimResult, StationConfig};
pub use error::{Error, Result};
pub use mac::PhyMacParams;
pub use metrics::MetricsBundle;
pub use scheduler::SchedulerKind;
pub use trace::{VideoFrame, VideoTrace};
pub use tspec::Tspec;

/// Simulation time in microseconds.
pub type Micros = u64;

/// Index of a station in the configured station list.
pub type StationId = u32;
