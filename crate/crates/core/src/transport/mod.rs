//! Transport building blocks: packet model, the access-link droptail FIFO,
//! and the two congestion controllers (delay-based LEDBAT, loss-based TCP).

pub mod ledbat;
pub mod link;
pub mod packet;
pub mod tcp;

pub use ledbat::LedbatState;
pub use link::{AccessLink, DequeueSample, Enqueue};
pub use packet::*;
pub use tcp::{TcpFlavor, TcpPhase, TcpState};

/// On-wire size cap for data packets (bytes).
pub const MTU: u32 = 1500;
/// Transport + network framing carried by each data packet.
pub const HEADER_BYTES: u32 = 52;
/// Payload bytes per full-size data packet.
pub const MSS: u32 = MTU - HEADER_BYTES; // 1448
/// Pure acknowledgement wire size.
pub const ACK_BYTES: u32 = 40;
/// Swarm control message (request / HAVE / choke) wire size.
pub const CONTROL_BYTES: u32 = 100;
