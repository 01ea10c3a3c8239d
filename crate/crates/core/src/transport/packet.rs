//! Packet model. Packets are plain values that travel through the event
//! queue; the only state they carry besides payload identity is the send
//! timestamp, from which the receiver measures one-way delay.

use crate::time::SimTime;

pub type PeerId = u32;
pub type ConnId = u32;
pub type ChunkId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Utp,
    Tcp,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Utp => "utp",
            Protocol::Tcp => "tcp",
        }
    }
}

/// What the bytes of a data segment mean to the application.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Payload {
    /// Anonymous bulk data (two-node flow harnesses).
    Bulk,
    /// A slice of one 16 KiB block: `offset` is the first byte of the
    /// segment within the block.
    Block {
        chunk: ChunkId,
        block: u32,
        offset: u32,
    },
}

/// Fire-and-forget swarm signaling; rides the same FIFO as data but outside
/// congestion control and without retransmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Request { chunk: ChunkId, block: u32 },
    /// Withdraw an earlier request (the block timed out and was re-requested
    /// elsewhere); the uploader drops it if the serve has not started.
    Cancel { chunk: ChunkId, block: u32 },
    Have { chunk: ChunkId },
    Choke,
    Unchoke,
}

#[derive(Debug, Clone)]
pub enum Body {
    Data {
        conn: ConnId,
        /// Byte offset of this segment in the direction's stream.
        seq: u64,
        len: u32,
        payload: Payload,
        /// Retransmissions are excluded from RTT sampling at the sender.
        retx: bool,
    },
    Ack {
        conn: ConnId,
        /// Next byte the receiver expects (cumulative).
        cum: u64,
        /// One-way delay of the data packet this ack answers, measured at
        /// the receiver against virtual time (no clock drift).
        owd: SimTime,
        /// Echo of the answered segment for RTT sampling.
        echo_seq: u64,
        echo_sent_at: SimTime,
        echo_retx: bool,
    },
    Control {
        conn: ConnId,
        msg: Control,
    },
}

#[derive(Debug, Clone)]
pub struct Packet {
    pub src: PeerId,
    pub dst: PeerId,
    /// Bytes of queue space and serialization time this packet costs.
    pub wire: u32,
    pub sent_at: SimTime,
    pub body: Body,
}

impl Packet {
    pub fn is_data(&self) -> bool {
        matches!(self.body, Body::Data { .. })
    }

    /// One-way delay as the receiver computes it.
    pub fn owd_at(&self, now: SimTime) -> SimTime {
        now - self.sent_at
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::{ACK_BYTES, CONTROL_BYTES, HEADER_BYTES, MSS, MTU};

    #[test]
    fn size_constants_are_consistent() {
        assert_eq!(MSS + HEADER_BYTES, MTU);
        assert_eq!(MSS, 1448);
        assert!(ACK_BYTES < CONTROL_BYTES);
        assert!(CONTROL_BYTES < MTU);
    }

    #[test]
    fn owd_is_receive_minus_send() {
        let p = Packet {
            src: 0,
            dst: 1,
            wire: MTU,
            sent_at: SimTime(1_000),
            body: Body::Data {
                conn: 0,
                seq: 0,
                len: MSS,
                payload: Payload::Bulk,
                retx: false,
            },
        };
        assert_eq!(p.owd_at(SimTime(13_500)), SimTime(12_500));
    }
}
