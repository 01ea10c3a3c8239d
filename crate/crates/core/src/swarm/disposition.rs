//! Transport disposition bitmask and pairwise connection negotiation.
//!
//! Each peer advertises which transports it attempts outgoing and accepts
//! incoming. A pair can talk uTP (TCP) iff either side's outgoing flag meets
//! the other's incoming flag; when both are feasible, uTP wins by fiat and
//! the surviving connection carries data in both directions regardless of
//! who opened it.

use crate::transport::packet::Protocol;

pub const OUT_TCP: u8 = 1;
pub const OUT_UTP: u8 = 2;
pub const IN_TCP: u8 = 4;
pub const IN_UTP: u8 = 8;
/// Carried for fidelity; no behavioral effect (wire format is out of scope).
pub const NEW_HEADER: u8 = 16;

pub const DEFAULT: u8 = 31;
pub const TCP_ONLY: u8 = 5;
pub const UTP_ONLY: u8 = 10;
pub const PREFER_TCP: u8 = 13;
pub const PREFER_UTP: u8 = 14;

pub fn utp_feasible(a: u8, b: u8) -> bool {
    (a & OUT_UTP != 0 && b & IN_UTP != 0) || (b & OUT_UTP != 0 && a & IN_UTP != 0)
}

pub fn tcp_feasible(a: u8, b: u8) -> bool {
    (a & OUT_TCP != 0 && b & IN_TCP != 0) || (b & OUT_TCP != 0 && a & IN_TCP != 0)
}

/// Protocol the pair settles on: uTP preferred whenever feasible, TCP as
/// fallback, None if no outgoing/incoming flags match in either direction.
pub fn negotiate(a: u8, b: u8) -> Option<Protocol> {
    if utp_feasible(a, b) {
        Some(Protocol::Utp)
    } else if tcp_feasible(a, b) {
        Some(Protocol::Tcp)
    } else {
        None
    }
}
