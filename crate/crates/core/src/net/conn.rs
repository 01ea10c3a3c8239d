//! Reliable byte-stream state for one connection: per-direction sequence
//! space, cumulative acks, retransmission bookkeeping, and the congestion
//! controller driving each sender.

use crate::time::SimTime;
use crate::transport::packet::{ChunkId, Payload, PeerId, Protocol};
use crate::transport::{LedbatState, TcpState};
use std::collections::VecDeque;

/// Either congestion controller behind one interface point.
#[derive(Debug, Clone)]
pub enum Cc {
    Ledbat(LedbatState),
    Tcp(TcpState),
}

impl Cc {
    pub fn cwnd(&self) -> f64 {
        match self {
            Cc::Ledbat(s) => s.cwnd,
            Cc::Tcp(s) => s.cwnd,
        }
    }

    pub fn mss(&self) -> f64 {
        match self {
            Cc::Ledbat(s) => s.mss(),
            Cc::Tcp(s) => s.mss(),
        }
    }

    pub fn on_idle_restart(&mut self) {
        match self {
            Cc::Ledbat(s) => s.on_idle_restart(),
            Cc::Tcp(s) => s.on_idle_restart(),
        }
    }
}

/// An outstanding (sent, not yet cumulatively acked) segment.
#[derive(Debug, Clone)]
pub struct Seg {
    pub seq: u64,
    pub len: u32,
    pub payload: Payload,
    pub sent_at: SimTime,
    pub retx: bool,
}

/// Application payload waiting to be segmented: the unsent remainder of one
/// block (`next_off..end`), or an endless bulk source for flow harnesses.
#[derive(Debug, Clone, Copy)]
pub struct PendingBlock {
    pub chunk: ChunkId,
    pub block: u32,
    pub next_off: u32,
    pub end: u32,
    /// Any byte of this block has entered the sequence space. Such a block
    /// must finish (cancel/choke may not drop it), or the stream would skip
    /// bytes the receiver is waiting on. Survives a go-back-N rewind, where
    /// `next_off` alone would look unstarted again.
    pub started: bool,
}

/// Merged half-open byte ranges; tracks which stream bytes have arrived so
/// duplicates can be measured and the cumulative ack point advanced.
#[derive(Debug, Default, Clone)]
pub struct RangeSet {
    ranges: Vec<(u64, u64)>,
}

impl RangeSet {
    /// Inserts [lo, hi) and returns how many of those bytes were new.
    pub fn insert(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo < hi);
        let mut novel = hi - lo;
        for &(a, b) in &self.ranges {
            let ol = lo.max(a);
            let oh = hi.min(b);
            if ol < oh {
                novel -= oh - ol;
            }
        }
        // merge: collect overlapping/adjacent neighbours into one span
        let mut lo = lo;
        let mut hi = hi;
        self.ranges.retain(|&(a, b)| {
            if a <= hi && b >= lo {
                lo = lo.min(a);
                hi = hi.max(b);
                false
            } else {
                true
            }
        });
        let pos = self.ranges.partition_point(|&(a, _)| a < lo);
        self.ranges.insert(pos, (lo, hi));
        novel
    }

    /// End of the contiguous prefix starting at byte 0.
    pub fn contiguous_from_zero(&self) -> u64 {
        match self.ranges.first() {
            Some(&(0, e)) => e,
            _ => 0,
        }
    }

    pub fn span_count(&self) -> usize {
        self.ranges.len()
    }
}

/// One direction of a connection. The sending half lives at `Connection::
/// peers[d]`, the receiving half at the opposite endpoint; both halves are
/// stored here because the run is single-threaded and the pairing is fixed.
#[derive(Debug)]
pub struct DirectionState {
    // --- sender half ---
    pub cc: Cc,
    pub snd_nxt: u64,
    pub snd_una: u64,
    pub segs: VecDeque<Seg>,
    pub sendq: VecDeque<PendingBlock>,
    /// Endless bulk source (flow harnesses); drained after `sendq`.
    pub bulk_backlog: bool,
    pub dup_acks: u32,
    /// NewReno recovery point: cumulative acks below this do not exit
    /// recovery, and duplicate acks below it cannot start a new one.
    pub recover: u64,
    pub in_recovery: bool,
    pub srtt_us: Option<f64>,
    pub rto_backoff: u32,
    pub rto_timer: Option<crate::engine::EventHandle>,
    pub last_activity: SimTime,
    // --- sender counters ---
    pub sent_payload_bytes: u64,
    pub retx_segments: u64,
    // --- receiver half (state about bytes this direction delivered) ---
    pub rcv: RangeSet,
    pub rcv_nxt: u64,
    pub dup_bytes_rcvd: u64,
    /// Novel payload bytes delivered to the receiving application.
    pub delivered_bytes: u64,
}

impl DirectionState {
    pub fn new(cc: Cc) -> Self {
        DirectionState {
            cc,
            snd_nxt: 0,
            snd_una: 0,
            segs: VecDeque::new(),
            sendq: VecDeque::new(),
            bulk_backlog: false,
            dup_acks: 0,
            recover: 0,
            in_recovery: false,
            srtt_us: None,
            rto_backoff: 0,
            rto_timer: None,
            last_activity: SimTime::ZERO,
            sent_payload_bytes: 0,
            retx_segments: 0,
            rcv: RangeSet::default(),
            rcv_nxt: 0,
            dup_bytes_rcvd: 0,
            delivered_bytes: 0,
        }
    }

    pub fn flight(&self) -> u64 {
        self.snd_nxt - self.snd_una
    }

    /// Retransmission timeout with exponential backoff, capped.
    pub fn rto(&self, cap: SimTime) -> SimTime {
        let base_us = match self.srtt_us {
            Some(srtt) => (4.0 * srtt).max(200_000.0),
            None => 1_000_000.0,
        };
        let backed = base_us * f64::from(1u32 << self.rto_backoff.min(6));
        SimTime((backed as u64).min(cap.as_micros()))
    }

    pub fn observe_rtt(&mut self, rtt_us: f64) {
        self.srtt_us = Some(match self.srtt_us {
            Some(s) => 0.875 * s + 0.125 * rtt_us,
            None => rtt_us,
        });
    }

    /// Next payload slice ≤ mss bytes, if any demand exists.
    pub fn peek_next_slice(&self, mss: u32) -> Option<(Payload, u32)> {
        if let Some(pb) = self.sendq.front() {
            let len = (pb.end - pb.next_off).min(mss);
            return Some((
                Payload::Block {
                    chunk: pb.chunk,
                    block: pb.block,
                    offset: pb.next_off,
                },
                len,
            ));
        }
        if self.bulk_backlog {
            return Some((Payload::Bulk, mss));
        }
        None
    }

    /// Consumes what `peek_next_slice` returned.
    pub fn advance_slice(&mut self, len: u32) {
        if let Some(pb) = self.sendq.front_mut() {
            pb.started = true;
            pb.next_off += len;
            debug_assert!(pb.next_off <= pb.end);
            if pb.next_off == pb.end {
                self.sendq.pop_front();
            }
        }
        // bulk consumes nothing
    }

    /// Go-back-N rewind after a retransmission timeout: every unacked
    /// segment's payload returns to the front of the send queue in original
    /// order and the sequence space rewinds to `snd_una`, so the pump
    /// re-sends the whole window under the collapsed cwnd instead of waiting
    /// out one timeout per hole. Bulk bytes regenerate on demand. Re-slicing
    /// starts from a former segment boundary, so segment edges — and with
    /// them the cumulative-ack landing points — are reproduced exactly.
    pub fn rewind_unacked(&mut self) {
        for seg in std::mem::take(&mut self.segs).into_iter().rev() {
            let Payload::Block { chunk, block, offset } = seg.payload else {
                continue;
            };
            if let Some(front) = self.sendq.front_mut() {
                if front.chunk == chunk
                    && front.block == block
                    && front.next_off == offset + seg.len
                {
                    front.next_off = offset;
                    front.started = true;
                    continue;
                }
            }
            self.sendq.push_front(PendingBlock {
                chunk,
                block,
                next_off: offset,
                end: offset + seg.len,
                started: true,
            });
        }
        self.snd_nxt = self.snd_una;
    }

    /// A cumulative ack beyond `snd_nxt` can only be one that left the
    /// receiver before a timeout whose rewind we have since applied: it
    /// covers restored payload still sitting at the front of the send queue.
    /// Consume that prefix — the ack landed on a former segment boundary, so
    /// the byte↔sequence mapping survives — and resume sending from `cum`.
    pub fn absorb_rewound_ack(&mut self, cum: u64) {
        let mut delta = cum - self.snd_nxt;
        while delta > 0 {
            let Some(front) = self.sendq.front_mut() else {
                break; // bulk demand regenerates; nothing queued to skip
            };
            let take = u64::from(front.end - front.next_off).min(delta);
            front.next_off += take as u32;
            delta -= take;
            if front.next_off == front.end {
                self.sendq.pop_front();
            }
        }
        self.snd_nxt = cum;
    }
}

#[derive(Debug)]
pub struct Connection {
    pub id: u32,
    /// peers[0] is endpoint A; direction d sends from peers[d].
    pub peers: [PeerId; 2],
    pub proto: Protocol,
    pub dir: [DirectionState; 2],
    /// Wire bytes (data + acks + control) this connection put on a link.
    pub wire_bytes: u64,
}

impl Connection {
    pub fn dir_of_sender(&self, sender: PeerId) -> usize {
        if self.peers[0] == sender {
            0
        } else {
            debug_assert_eq!(self.peers[1], sender);
            1
        }
    }

    pub fn other(&self, p: PeerId) -> PeerId {
        if self.peers[0] == p {
            self.peers[1]
        } else {
            self.peers[0]
        }
    }
}
