//! Discrete-event simulator for peer-to-peer file swarms whose members talk
//! over two competing transport flavours: delay-based LEDBAT (uTP) and
//! loss-based TCP. Every peer sits behind its own droptail access bottleneck,
//! so the interesting dynamics — standing queues, starvation, completion-time
//! spread — all emerge from the queueing model rather than from tuned knobs.
//!
//! Layering, bottom to top:
//!
//! * [`engine`] — the event loop: virtual clock, binary-heap queue,
//!   cancellation, deterministic tie-breaking.
//! * [`transport`] — packets, the access-link FIFO, congestion controllers,
//!   and reliable per-direction byte streams ([`net::Net`] wires them up).
//! * [`swarm`] — torrent mechanics: chunk selection, choking, request
//!   pipelining, completion tracking.
//! * [`flows`] — small two-node harnesses for studying a controller in
//!   isolation (single flow, TCP-vs-LEDBAT duel).
//! * [`metrics`] / [`report`] — distributions, shares, regressions, CSV
//!   emission.
//! * [`config`] / [`presets`] — scenario description and the named setups.
//!
//! Everything is deterministic: one `u64` seed fans out into named RNG
//! substreams, and identical (config, seed) pairs produce byte-identical
//! reports.

pub mod config;
pub mod engine;
pub mod error;
pub mod flows;
pub mod metrics;
pub mod net;
pub mod presets;
pub mod report;
pub mod rng;
pub mod run;
pub mod swarm;
pub mod time;
pub mod transport;

pub use config::ScenarioConfig;
pub use engine::{Engine, EventHandle};
pub use error::{ConfigError, RunError};
pub use report::SimulationReport;
pub use time::SimTime;
