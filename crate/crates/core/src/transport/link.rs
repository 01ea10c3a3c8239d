//! The access bottleneck: a fixed-rate droptail FIFO.
//!
//! Occupancy counts every queued byte including the packet in service; a
//! packet departs `wire_bytes × 8 / capacity` after it reaches the head.
//! The caller owns departure scheduling: `enqueue` says when the link was
//! idle (schedule the first departure), `dequeue` returns the serialization
//! delay of the next head (schedule the follow-up).
//!
//! Each dequeue appends an occupancy sample; queue statistics over these
//! post-dequeue samples are the primary instrument of the whole simulator,
//! so their discipline must not change casually.

use crate::time::SimTime;
use std::collections::VecDeque;

use super::packet::Packet;

/// (time, bytes left, packets left) recorded after each dequeue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DequeueSample {
    pub at: SimTime,
    pub bytes: u64,
    pub pkts: u32,
}

#[derive(Debug, PartialEq, Eq)]
pub enum Enqueue {
    /// Packet joined the FIFO. `link_was_idle` means no departure is
    /// currently scheduled and the caller must schedule one after
    /// `tx_time(pkt.wire)`.
    Queued { link_was_idle: bool },
    Dropped,
}

/// Exact conservation counters: `enqueued = served + dropped + queued`,
/// byte-wise and packet-wise, at all times.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkCounters {
    pub enqueued_pkts: u64,
    pub enqueued_bytes: u64,
    pub served_pkts: u64,
    pub served_bytes: u64,
    pub dropped_pkts: u64,
    pub dropped_bytes: u64,
}

pub struct AccessLink {
    /// Capacity in bits per second.
    pub bps: u64,
    /// Droptail limit in bytes (default capacity × 1 s).
    pub limit_bytes: u64,
    fifo: VecDeque<Packet>,
    q_bytes: u64,
    /// True iff a departure event is scheduled for the current head.
    busy: bool,
    pub counters: LinkCounters,
    pub dequeue_log: Vec<DequeueSample>,
    // time-weighted occupancy: ∫ q_bytes dt and ∫ [q>0] dt
    last_change: SimTime,
    byte_us_integral: u128,
    busy_us: u64,
}

impl AccessLink {
    pub fn new(bps: u64, limit_bytes: u64) -> Self {
        assert!(bps > 0, "link capacity must be positive");
        AccessLink {
            bps,
            limit_bytes,
            fifo: VecDeque::new(),
            q_bytes: 0,
            busy: false,
            counters: LinkCounters::default(),
            dequeue_log: Vec::new(),
            last_change: SimTime::ZERO,
            byte_us_integral: 0,
            busy_us: 0,
        }
    }

    /// Serialization time of `wire` bytes at link rate, rounded up to the
    /// next microsecond (exact for every whole-byte size at ≤ 1 Gbps).
    pub fn tx_time(&self, wire: u32) -> SimTime {
        SimTime((u64::from(wire) * 8 * 1_000_000).div_ceil(self.bps))
    }

    pub fn queued_bytes(&self) -> u64 {
        self.q_bytes
    }

    pub fn queued_pkts(&self) -> u32 {
        self.fifo.len() as u32
    }

    fn advance_integrals(&mut self, now: SimTime) {
        let dt = (now - self.last_change).as_micros();
        self.byte_us_integral += u128::from(self.q_bytes) * u128::from(dt);
        if self.q_bytes > 0 {
            self.busy_us += dt;
        }
        self.last_change = now;
    }

    pub fn enqueue(&mut self, now: SimTime, pkt: Packet) -> Enqueue {
        let wire = u64::from(pkt.wire);
        self.counters.enqueued_pkts += 1;
        self.counters.enqueued_bytes += wire;
        if self.q_bytes + wire > self.limit_bytes {
            self.counters.dropped_pkts += 1;
            self.counters.dropped_bytes += wire;
            return Enqueue::Dropped;
        }
        self.advance_integrals(now);
        self.q_bytes += wire;
        self.fifo.push_back(pkt);
        let link_was_idle = !self.busy;
        self.busy = true;
        Enqueue::Queued { link_was_idle }
    }

    /// Removes the head (it just finished serializing), logs the occupancy
    /// left behind, and returns the serialization delay of the new head if
    /// any. Calling on an empty queue is a contract violation.
    pub fn dequeue(&mut self, now: SimTime) -> (Packet, Option<SimTime>) {
        let pkt = self
            .fifo
            .pop_front()
            .expect("dequeue on empty AccessLink");
        self.advance_integrals(now);
        self.q_bytes -= u64::from(pkt.wire);
        self.counters.served_pkts += 1;
        self.counters.served_bytes += u64::from(pkt.wire);
        self.dequeue_log.push(DequeueSample {
            at: now,
            bytes: self.q_bytes,
            pkts: self.fifo.len() as u32,
        });
        let next = self.fifo.front().map(|head| self.tx_time(head.wire));
        self.busy = next.is_some();
        (pkt, next)
    }

    /// Mean occupancy in bytes weighted by time, over [0, now].
    pub fn time_weighted_mean_bytes(&mut self, now: SimTime) -> f64 {
        self.advance_integrals(now);
        if now == SimTime::ZERO {
            return 0.0;
        }
        self.byte_us_integral as f64 / now.as_micros() as f64
    }

    /// Fraction of [0, now] with a non-empty queue, weighted by time.
    pub fn time_weighted_busy_fraction(&mut self, now: SimTime) -> f64 {
        self.advance_integrals(now);
        if now == SimTime::ZERO {
            return 0.0;
        }
        self.busy_us as f64 / now.as_micros() as f64
    }

    pub fn conservation_holds(&self) -> bool {
        let c = &self.counters;
        c.enqueued_pkts == c.served_pkts + c.dropped_pkts + self.fifo.len() as u64
            && c.enqueued_bytes == c.served_bytes + c.dropped_bytes + self.q_bytes
    }
}
