//! The network fabric: peers' access links, connections, and the event
//! plumbing between them. `Net` owns everything a packet touches between
//! "application queued bytes" and "application received bytes"; the layers
//! above (swarm logic, flow harnesses) react to [`Notice`]s it emits.
//!
//! Path of one data segment: sender pump admits it under cwnd → droptail
//! enqueue on the sender's own uplink (drop here is *the* loss signal) →
//! PacketDeparture after serialization → PacketArrival after the base
//! propagation delay (downlinks are unconstrained) → receiver records the
//! range, hands the payload up, and emits a 40 B ack through its *own*
//! uplink — so acks queue behind reverse-path data, which is a load-bearing
//! part of the model.

pub mod conn;

pub use conn::{Cc, Connection, DirectionState, PendingBlock, RangeSet, Seg};

use crate::engine::Engine;
use crate::time::SimTime;
use crate::transport::link::{AccessLink, Enqueue};
use crate::transport::packet::{Body, ChunkId, ConnId, Control, Packet, Payload, PeerId, Protocol};
use crate::transport::{ACK_BYTES, CONTROL_BYTES, HEADER_BYTES};

/// Event vocabulary for every harness built on the engine.
#[derive(Debug, Clone)]
pub enum Event {
    PacketDeparture { peer: PeerId },
    PacketArrival { pkt: Packet },
    AckArrival { pkt: Packet },
    TimerExpiry { timer: Timer },
    RechokeTick,
    OptimisticUnchokeTick,
    TrackerAnnounce,
    MetricsSample,
}

#[derive(Debug, Clone, Copy)]
pub enum Timer {
    Rto { conn: ConnId, dir: u8 },
    /// Periodic sweep for block requests that have gone unanswered.
    RequestScan,
    /// Fixed-horizon runs (flow harnesses) end here.
    EndOfRun,
}

/// What the fabric tells the layer above after handling an event.
#[derive(Debug, Clone, Copy)]
pub enum Notice {
    /// A data segment reached `to`. `novel` is how many of its bytes were
    /// not already delivered (retransmission overlap).
    Data {
        conn: ConnId,
        from: PeerId,
        to: PeerId,
        payload: Payload,
        len: u32,
        novel: u32,
    },
    Control {
        conn: ConnId,
        from: PeerId,
        to: PeerId,
        msg: Control,
    },
    /// The sender of `conn` direction `dir` advanced its cumulative ack.
    Acked { conn: ConnId, dir: u8 },
}

pub struct NetConfig {
    /// One-way propagation outside the access queue.
    pub base_owd: SimTime,
    /// Reset cwnd to the initial window after ≥ 1 RTO of sender idleness.
    pub idle_restart: bool,
    /// Upper bound on the backed-off retransmission timeout.
    pub rto_cap: SimTime,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            base_owd: SimTime::from_millis(1),
            idle_restart: true,
            rto_cap: SimTime::from_secs(60),
        }
    }
}

pub struct NetPeer {
    pub link: AccessLink,
}

pub struct Net {
    pub cfg: NetConfig,
    pub peers: Vec<NetPeer>,
    pub conns: Vec<Connection>,
    /// Drained by the caller after each handled event.
    pub notices: Vec<Notice>,
}

impl Net {
    pub fn new(cfg: NetConfig, links: Vec<AccessLink>) -> Self {
        Net {
            cfg,
            peers: links.into_iter().map(|link| NetPeer { link }).collect(),
            conns: Vec::new(),
            notices: Vec::new(),
        }
    }

    pub fn add_conn(&mut self, a: PeerId, b: PeerId, proto: Protocol, cc_a: Cc, cc_b: Cc) -> ConnId {
        debug_assert_ne!(a, b);
        let id = self.conns.len() as ConnId;
        self.conns.push(Connection {
            id,
            peers: [a, b],
            proto,
            dir: [DirectionState::new(cc_a), DirectionState::new(cc_b)],
            wire_bytes: 0,
        });
        id
    }

    /// Queue one block of application payload on `sender`'s half of `conn`
    /// and try to transmit immediately.
    pub fn queue_block(
        &mut self,
        eng: &mut Engine<Event>,
        now: SimTime,
        conn: ConnId,
        sender: PeerId,
        chunk: ChunkId,
        block: u32,
        len: u32,
    ) {
        let ci = conn as usize;
        let d = self.conns[ci].dir_of_sender(sender);
        self.conns[ci].dir[d].sendq.push_back(PendingBlock {
            chunk,
            block,
            next_off: 0,
            end: len,
            started: false,
        });
        self.pump(eng, now, ci, d);
    }

    /// Endless bulk source for flow harnesses.
    pub fn set_bulk_backlog(
        &mut self,
        eng: &mut Engine<Event>,
        now: SimTime,
        conn: ConnId,
        sender: PeerId,
        on: bool,
    ) {
        let ci = conn as usize;
        let d = self.conns[ci].dir_of_sender(sender);
        self.conns[ci].dir[d].bulk_backlog = on;
        if on {
            self.pump(eng, now, ci, d);
        }
    }

    /// Drop queued blocks that have not started transmitting (a choke clears
    /// pending serves); a partially sent block finishes so the stream stays
    /// well-formed. Returns the dropped block ids.
    pub fn clear_unstarted_blocks(&mut self, conn: ConnId, sender: PeerId) -> Vec<(ChunkId, u32)> {
        let ci = conn as usize;
        let d = self.conns[ci].dir_of_sender(sender);
        let q = &mut self.conns[ci].dir[d].sendq;
        let mut dropped = Vec::new();
        q.retain(|pb| {
            if pb.started {
                true
            } else {
                dropped.push((pb.chunk, pb.block));
                false
            }
        });
        dropped
    }

    /// True if `sender` already has this block queued (a duplicate request
    /// need not be served twice).
    pub fn has_queued_block(&self, conn: ConnId, sender: PeerId, chunk: ChunkId, block: u32) -> bool {
        let ci = conn as usize;
        let d = self.conns[ci].dir_of_sender(sender);
        self.conns[ci].dir[d]
            .sendq
            .iter()
            .any(|pb| pb.chunk == chunk && pb.block == block)
    }

    /// Withdraws a queued serve that has not started transmitting (a
    /// cancelled request); one already on the wire finishes so the stream
    /// stays well-formed.
    pub fn cancel_block(&mut self, conn: ConnId, sender: PeerId, chunk: ChunkId, block: u32) {
        let ci = conn as usize;
        let d = self.conns[ci].dir_of_sender(sender);
        self.conns[ci].dir[d]
            .sendq
            .retain(|pb| pb.started || pb.chunk != chunk || pb.block != block);
    }

    /// Fire-and-forget 100 B signaling packet through `from`'s uplink.
    pub fn send_control(
        &mut self,
        eng: &mut Engine<Event>,
        now: SimTime,
        conn: ConnId,
        from: PeerId,
        to: PeerId,
        msg: Control,
    ) {
        let pkt = Packet {
            src: from,
            dst: to,
            wire: CONTROL_BYTES,
            sent_at: now,
            body: Body::Control { conn, msg },
        };
        self.enqueue_pkt(eng, now, pkt);
    }

    /// Handles fabric-owned events; returns non-fabric events to the caller.
    pub fn handle(&mut self, eng: &mut Engine<Event>, now: SimTime, ev: Event) -> Option<Event> {
        match ev {
            Event::PacketDeparture { peer } => {
                self.on_departure(eng, now, peer);
                None
            }
            Event::PacketArrival { pkt } => {
                self.on_arrival(eng, now, pkt);
                None
            }
            Event::AckArrival { pkt } => {
                self.on_ack(eng, now, pkt);
                None
            }
            Event::TimerExpiry { timer: Timer::Rto { conn, dir } } => {
                self.on_rto(eng, now, conn, dir);
                None
            }
            other => Some(other),
        }
    }

    // --- internals ---

    fn enqueue_pkt(&mut self, eng: &mut Engine<Event>, now: SimTime, pkt: Packet) {
        let peer = pkt.src;
        let wire = pkt.wire;
        let conn = match pkt.body {
            Body::Data { conn, .. } | Body::Ack { conn, .. } | Body::Control { conn, .. } => conn,
        };
        let link = &mut self.peers[peer as usize].link;
        match link.enqueue(now, pkt) {
            Enqueue::Queued { link_was_idle } => {
                self.conns[conn as usize].wire_bytes += u64::from(wire);
                if link_was_idle {
                    let delay = link.tx_time(wire);
                    eng.schedule(now + delay, Event::PacketDeparture { peer });
                }
                // Queued behind others: the departure chain reaches it.
            }
            // Data loss surfaces via dup-acks/RTO; control is best-effort.
            Enqueue::Dropped => {}
        }
    }

    fn on_departure(&mut self, eng: &mut Engine<Event>, now: SimTime, peer: PeerId) {
        let link = &mut self.peers[peer as usize].link;
        let (pkt, next) = link.dequeue(now);
        if let Some(delay) = next {
            eng.schedule(now + delay, Event::PacketDeparture { peer });
        }
        let arrive = now + self.cfg.base_owd;
        match pkt.body {
            Body::Ack { .. } => eng.schedule(arrive, Event::AckArrival { pkt }),
            _ => eng.schedule(arrive, Event::PacketArrival { pkt }),
        };
    }

    fn on_arrival(&mut self, eng: &mut Engine<Event>, now: SimTime, pkt: Packet) {
        match pkt.body {
            Body::Data { conn, seq, len, payload, retx } => {
                let owd = now - pkt.sent_at;
                let ci = conn as usize;
                let d = self.conns[ci].dir_of_sender(pkt.src);
                let st = &mut self.conns[ci].dir[d];
                let novel = st.rcv.insert(seq, seq + u64::from(len)) as u32;
                st.dup_bytes_rcvd += u64::from(len - novel);
                st.delivered_bytes += u64::from(novel);
                st.rcv_nxt = st.rcv.contiguous_from_zero();
                let cum = st.rcv_nxt;
                self.notices.push(Notice::Data {
                    conn,
                    from: pkt.src,
                    to: pkt.dst,
                    payload,
                    len,
                    novel,
                });
                let ack = Packet {
                    src: pkt.dst,
                    dst: pkt.src,
                    wire: ACK_BYTES,
                    sent_at: now,
                    body: Body::Ack {
                        conn,
                        cum,
                        owd,
                        echo_seq: seq,
                        echo_sent_at: pkt.sent_at,
                        echo_retx: retx,
                    },
                };
                self.enqueue_pkt(eng, now, ack);
            }
            Body::Control { conn, msg } => {
                self.notices.push(Notice::Control {
                    conn,
                    from: pkt.src,
                    to: pkt.dst,
                    msg,
                });
            }
            Body::Ack { .. } => unreachable!("acks are routed to AckArrival"),
        }
    }

    fn on_ack(&mut self, eng: &mut Engine<Event>, now: SimTime, pkt: Packet) {
        let Body::Ack { conn, cum, owd, echo_sent_at, echo_retx, .. } = pkt.body else {
            unreachable!("AckArrival carries an Ack body")
        };
        let ci = conn as usize;
        // The ack's destination is the data sender of this direction.
        let d = self.conns[ci].dir_of_sender(pkt.dst);
        let st = &mut self.conns[ci].dir[d];

        if cum > st.snd_una {
            let bytes_acked = cum - st.snd_una;
            st.snd_una = cum;
            if cum > st.snd_nxt {
                st.absorb_rewound_ack(cum);
            }
            while let Some(front) = st.segs.front() {
                let end = front.seq + u64::from(front.len);
                if end <= cum {
                    st.segs.pop_front();
                } else {
                    debug_assert!(front.seq >= cum, "cum acks land on segment bounds");
                    break;
                }
            }
            st.dup_acks = 0;
            st.rto_backoff = 0;
            if !echo_retx {
                st.observe_rtt((now - echo_sent_at).as_micros() as f64);
            }
            st.last_activity = now;

            let srtt = st.srtt_us.unwrap_or(0.0);
            let mut retransmit_front = false;
            match &mut st.cc {
                Cc::Tcp(tcp) => {
                    if st.in_recovery {
                        if cum >= st.recover {
                            st.in_recovery = false;
                            tcp.on_recovery_exit(now.as_micros() as f64);
                        } else {
                            // partial ack: next hole goes out immediately,
                            // recovery continues
                            tcp.on_partial_ack(bytes_acked as f64);
                            retransmit_front = true;
                        }
                    } else {
                        tcp.on_ack(bytes_acked as f64, now.as_micros() as f64, srtt);
                    }
                }
                Cc::Ledbat(lb) => {
                    lb.on_ack(owd.as_micros() as f64, bytes_acked as f64);
                }
            }

            if retransmit_front {
                self.retransmit_front(eng, now, ci, d);
            }
            self.rearm_rto(eng, now, ci, d);
            self.pump(eng, now, ci, d);
            self.notices.push(Notice::Acked { conn, dir: d as u8 });
        } else if cum == st.snd_una && st.flight() > 0 {
            st.dup_acks += 1;
            let snd_nxt = st.snd_nxt;
            let una = st.snd_una;
            let mut retransmit = false;
            let mut inflated = false;
            match &mut st.cc {
                Cc::Tcp(tcp) => {
                    if st.in_recovery {
                        tcp.on_dup_in_recovery();
                        inflated = true;
                    } else if st.dup_acks == 3 && una >= st.recover {
                        // A new recovery may start only once the previous
                        // recovery/timeout window is fully acked.
                        tcp.on_triple_dup();
                        st.in_recovery = true;
                        st.recover = snd_nxt;
                        retransmit = true;
                    }
                }
                Cc::Ledbat(lb) => {
                    if st.dup_acks == 3 {
                        // halving is guarded once-per-RTT inside the
                        // controller; the hole is refilled regardless
                        lb.on_loss(una, snd_nxt);
                        retransmit = true;
                    }
                }
            }
            if retransmit {
                self.retransmit_front(eng, now, ci, d);
            }
            if inflated {
                self.pump(eng, now, ci, d);
            }
        }
        // cum < snd_una: stale ack, ignore.
    }

    fn on_rto(&mut self, eng: &mut Engine<Event>, now: SimTime, conn: ConnId, dir: u8) {
        let ci = conn as usize;
        let d = dir as usize;
        let st = &mut self.conns[ci].dir[d];
        st.rto_timer = None;
        if st.flight() == 0 {
            return;
        }
        let snd_nxt = st.snd_nxt;
        match &mut st.cc {
            Cc::Tcp(tcp) => {
                tcp.on_timeout();
                st.in_recovery = false;
            }
            Cc::Ledbat(lb) => lb.on_timeout(snd_nxt),
        }
        // Everything below the pre-timeout frontier counts as retransmission
        // and is barred from starting a fresh fast recovery. max: a second
        // timeout mid-refill must not lower the frontier.
        st.recover = st.recover.max(snd_nxt);
        st.dup_acks = 0;
        st.rto_backoff += 1;
        st.rewind_unacked();
        st.last_activity = now;
        // The pump re-sends the rewound window go-back-N style and re-arms
        // the (backed-off) timer with the first segment out.
        self.pump(eng, now, ci, d);
    }

    fn retransmit_front(&mut self, eng: &mut Engine<Event>, now: SimTime, ci: usize, d: usize) {
        let (src, dst) = {
            let c = &self.conns[ci];
            (c.peers[d], c.peers[1 - d])
        };
        let st = &mut self.conns[ci].dir[d];
        let Some(front) = st.segs.front_mut() else {
            return;
        };
        front.retx = true;
        front.sent_at = now;
        let (seq, len, payload) = (front.seq, front.len, front.payload);
        st.retx_segments += 1;
        st.last_activity = now;
        let conn_id = self.conns[ci].id;
        let pkt = Packet {
            src,
            dst,
            wire: len + HEADER_BYTES,
            sent_at: now,
            body: Body::Data {
                conn: conn_id,
                seq,
                len,
                payload,
                retx: true,
            },
        };
        self.enqueue_pkt(eng, now, pkt);
    }

    fn rearm_rto(&mut self, eng: &mut Engine<Event>, now: SimTime, ci: usize, d: usize) {
        let cap = self.cfg.rto_cap;
        let conn_id = self.conns[ci].id;
        let st = &mut self.conns[ci].dir[d];
        if let Some(h) = st.rto_timer.take() {
            eng.cancel(h);
        }
        if st.flight() == 0 {
            return;
        }
        let delay = st.rto(cap);
        st.rto_timer = Some(eng.schedule(
            now + delay,
            Event::TimerExpiry {
                timer: Timer::Rto {
                    conn: conn_id,
                    dir: d as u8,
                },
            },
        ));
    }

    /// Admits as many segments as the window allows. Also the idle-restart
    /// checkpoint: a sender that was silent for ≥ 1 RTO restarts from the
    /// initial window before transmitting again.
    fn pump(&mut self, eng: &mut Engine<Event>, now: SimTime, ci: usize, d: usize) {
        let (sender, receiver) = {
            let c = &self.conns[ci];
            (c.peers[d], c.peers[1 - d])
        };
        let conn_id = self.conns[ci].id;
        {
            let cap = self.cfg.rto_cap;
            let st = &mut self.conns[ci].dir[d];
            if self.cfg.idle_restart
                && st.flight() == 0
                && st.snd_nxt > 0
                && st.peek_next_slice(st.cc.mss() as u32).is_some()
                && now.saturating_sub(st.last_activity) >= st.rto(cap)
            {
                st.cc.on_idle_restart();
            }
        }
        loop {
            let st = &mut self.conns[ci].dir[d];
            let mss = st.cc.mss() as u32;
            let Some((payload, len)) = st.peek_next_slice(mss) else {
                break;
            };
            if st.flight() as f64 + f64::from(len) > st.cc.cwnd() {
                break;
            }
            st.advance_slice(len);
            let seq = st.snd_nxt;
            // bytes below the recovery point have been sent before
            let retx = seq < st.recover;
            st.snd_nxt += u64::from(len);
            st.segs.push_back(Seg {
                seq,
                len,
                payload,
                sent_at: now,
                retx,
            });
            if retx {
                st.retx_segments += 1;
            } else {
                st.sent_payload_bytes += u64::from(len);
            }
            st.last_activity = now;
            let need_timer = st.rto_timer.is_none();
            let pkt = Packet {
                src: sender,
                dst: receiver,
                wire: len + HEADER_BYTES,
                sent_at: now,
                body: Body::Data {
                    conn: conn_id,
                    seq,
                    len,
                    payload,
                    retx,
                },
            };
            self.enqueue_pkt(eng, now, pkt);
            if need_timer {
                self.rearm_rto(eng, now, ci, d);
            }
        }
    }
}
