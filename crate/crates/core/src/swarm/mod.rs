//! Swarm behavior on top of the network fabric: a flash crowd of leechers
//! joins at t = 0, negotiates one connection per compatible pair, and trades
//! chunks under rate-based choking until every leecher holds the whole file.
//!
//! Scheduling discipline: chunks are picked rarest-first (uniform among
//! ties), one chunk is fetched from one connection at a time, and block
//! requests are pipelined per connection. Requests that go unanswered past
//! an adaptive timeout are re-issued, possibly elsewhere — the resulting
//! duplicate arrivals are counted, never silently lost. Upload slots follow
//! the usual reciprocation scheme: top uploaders-to-me by recent rate (by
//! recent download when I am complete and have nothing to reciprocate),
//! plus one periodically re-rolled optimistic slot that lets newcomers
//! bootstrap.

pub mod disposition;

use crate::config::ScenarioConfig;
use crate::engine::Engine;
use crate::error::RunError;
use crate::net::{Cc, Event, Net, NetConfig, Notice, Timer};
use crate::rng::{self, RngHub};
use crate::time::SimTime;
use crate::transport::link::AccessLink;
use crate::transport::packet::{ChunkId, ConnId, Control, Payload, PeerId, Protocol};
use crate::transport::{LedbatState, TcpState, MSS};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::collections::VecDeque;

/// Class index used for the initial seeds, which belong to no leecher class.
pub const SEED_CLASS: usize = usize::MAX;

/// One in-flight block request.
#[derive(Debug, Clone, Copy)]
pub struct Outstanding {
    pub conn: ConnId,
    pub chunk: ChunkId,
    pub block: u32,
    pub issued_at: SimTime,
}

#[derive(Debug)]
struct ChunkWork {
    done: Vec<bool>,
    done_count: u32,
}

pub struct SwarmPeer {
    pub id: PeerId,
    /// Index into the scenario's class list, or [`SEED_CLASS`].
    pub class: usize,
    pub disposition: u8,
    pub is_seed: bool,
    pub ledbat_target_us: u64,
    pub have: Vec<bool>,
    pub have_count: u32,
    pub completed_at: Option<SimTime>,
    /// Per-chunk count of connected remotes known to hold it.
    pub avail: Vec<u32>,
    pub outstanding: Vec<Outstanding>,
    /// Chunk → connection currently fetching it (at most one per chunk).
    pub assignment: BTreeMap<ChunkId, ConnId>,
    chunk_work: BTreeMap<ChunkId, ChunkWork>,
    /// Partial byte coverage of blocks still being assembled.
    block_bytes: BTreeMap<(ChunkId, u32), crate::net::RangeSet>,
    /// EWMA of request→block-complete latency, gain 1/8.
    pub block_rtt_us: f64,
    rate_winners: Vec<PeerId>,
    optimistic: Option<PeerId>,
    /// Payload bytes discarded as duplicate or already-held.
    pub dup_app_bytes: u64,
}

impl SwarmPeer {
    pub fn complete(&self) -> bool {
        self.have_count as usize == self.have.len()
    }
}

#[derive(Debug, Clone, Copy)]
struct RateSnap {
    at: SimTime,
    rcvd: u64,
    sent: u64,
}

/// Choke/interest bookkeeping for one connection, indexed like
/// `Connection::peers`.
pub struct ConnState {
    /// unchoke_sent[e]: endpoint e currently unchokes the other (the
    /// uploader's ground truth; the downloader learns via messages).
    unchoke_sent: [bool; 2],
    /// unchoked_by_remote[e]: endpoint e has received an Unchoke and no
    /// later Choke.
    unchoked_by_remote: [bool; 2],
    /// remote_have[e]: endpoint e's view of the other endpoint's chunks.
    remote_have: [Vec<bool>; 2],
    hist: [VecDeque<RateSnap>; 2],
}

pub struct Swarm {
    pub cfg: ScenarioConfig,
    pub seed: u64,
    pub net: Net,
    pub peers: Vec<SwarmPeer>,
    pub conn_states: Vec<ConnState>,
    /// Per peer: (remote, conn) sorted by remote id.
    pub conn_index: Vec<Vec<(PeerId, ConnId)>>,
    pub chunk_count: u32,
    pub leecher_total: u32,
    pub complete_leechers: u32,
    pub t_last_completion: Option<SimTime>,
    rng_piece: ChaCha8Rng,
    rng_opt: ChaCha8Rng,
    rng_shuffle: ChaCha8Rng,
    rng_nego: ChaCha8Rng,
}

impl Swarm {
    /// Builds the population and verifies that content can reach every
    /// leecher at all: peers whose disposition isolates them from every
    /// seed-bearing component would stall the run forever, which is a
    /// configuration error reported before any event fires.
    pub fn new(cfg: ScenarioConfig, seed: u64) -> Result<Self, RunError> {
        let chunk_count = cfg.chunk_count();
        let default_target = cfg.transport.ledbat_target_us;

        let mut peers = Vec::new();
        let mut links = Vec::new();
        let mut push_peer = |class: usize, disposition: u8, is_seed: bool, bps: u64, target: u64| {
            let id = peers.len() as PeerId;
            peers.push(SwarmPeer {
                id,
                class,
                disposition,
                is_seed,
                ledbat_target_us: target,
                have: vec![is_seed; chunk_count as usize],
                have_count: if is_seed { chunk_count } else { 0 },
                completed_at: None,
                avail: vec![0; chunk_count as usize],
                outstanding: Vec::new(),
                assignment: BTreeMap::new(),
                chunk_work: BTreeMap::new(),
                block_bytes: BTreeMap::new(),
                block_rtt_us: 1_000_000.0,
                rate_winners: Vec::new(),
                optimistic: None,
                dup_app_bytes: 0,
            });
            links.push(AccessLink::new(bps, cfg.buffer_bytes(bps)));
        };
        for _ in 0..cfg.swarm.seed_count {
            push_peer(
                SEED_CLASS,
                disposition::DEFAULT,
                true,
                cfg.link.access_bps,
                default_target,
            );
        }
        for (ci, class) in cfg.classes.iter().enumerate() {
            let bps = class.uplink_bps.unwrap_or(cfg.link.access_bps);
            let target = class.ledbat_target_us.unwrap_or(default_target);
            for _ in 0..class.count {
                push_peer(ci, class.disposition, false, bps, target);
            }
        }

        Self::check_reachability(&peers)?;

        let hub = RngHub::new(seed);
        let net_cfg = NetConfig {
            base_owd: SimTime::from_micros(cfg.link.base_owd_us),
            idle_restart: cfg.transport.idle_restart,
            ..NetConfig::default()
        };
        let n = peers.len();
        Ok(Swarm {
            cfg,
            seed,
            net: Net::new(net_cfg, links),
            leecher_total: peers.iter().filter(|p| !p.is_seed).count() as u32,
            peers,
            conn_states: Vec::new(),
            conn_index: vec![Vec::new(); n],
            chunk_count,
            complete_leechers: 0,
            t_last_completion: None,
            rng_piece: hub.stream(rng::PIECE_SELECTION),
            rng_opt: hub.stream(rng::OPTIMISTIC_UNCHOKE),
            rng_shuffle: hub.stream(rng::PEER_SHUFFLE),
            rng_nego: hub.stream(rng::CONNECTION_NEGOTIATION),
        })
    }

    /// BFS over the pairwise-feasibility graph from all seeds. The uTP race
    /// can only switch a feasible pair between protocols, never disconnect
    /// it, so reachability is decided by dispositions alone.
    fn check_reachability(peers: &[SwarmPeer]) -> Result<(), RunError> {
        let n = peers.len();
        let mut reach = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| peers[i].is_seed).collect();
        for q in &queue {
            reach[*q] = true;
        }
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if !reach[j]
                    && disposition::negotiate(peers[i].disposition, peers[j].disposition).is_some()
                {
                    reach[j] = true;
                    queue.push_back(j);
                }
            }
        }
        let stranded: Vec<String> = (0..n)
            .filter(|&i| !reach[i])
            .map(|i| format!("peer {} (disposition {})", i, peers[i].disposition))
            .collect();
        if stranded.is_empty() {
            Ok(())
        } else {
            Err(RunError::Deadlock {
                at: SimTime::ZERO,
                diagnostic: format!(
                    "no transport-compatible path from any seed to: {}",
                    stranded.join(", ")
                ),
            })
        }
    }

    /// Schedules the opening events. Tracker contact, the first rechoke and
    /// the first optimistic round all land at t = 0 in that order.
    pub fn start(&self, eng: &mut Engine<Event>) {
        eng.schedule(SimTime::ZERO, Event::TrackerAnnounce);
        eng.schedule(SimTime::ZERO, Event::RechokeTick);
        eng.schedule(SimTime::ZERO, Event::OptimisticUnchokeTick);
        eng.schedule(
            SimTime::from_secs_f64(self.cfg.swarm.request_scan_secs),
            Event::TimerExpiry { timer: Timer::RequestScan },
        );
    }

    pub fn done(&self) -> bool {
        self.complete_leechers == self.leecher_total
    }

    pub fn class_name(&self, peer: PeerId) -> &str {
        let p = &self.peers[peer as usize];
        if p.class == SEED_CLASS {
            "seed"
        } else {
            &self.cfg.classes[p.class].name
        }
    }

    pub fn handle(&mut self, eng: &mut Engine<Event>, at: SimTime, ev: Event) {
        if let Some(ev) = self.net.handle(eng, at, ev) {
            match ev {
                Event::TrackerAnnounce => self.on_tracker(eng, at),
                Event::RechokeTick => self.on_rechoke(eng, at),
                Event::OptimisticUnchokeTick => self.on_optimistic(eng, at),
                Event::TimerExpiry { timer: Timer::RequestScan } => self.on_scan(eng, at),
                Event::TimerExpiry { timer: Timer::EndOfRun } => {}
                other => unreachable!("fabric consumes {other:?}"),
            }
        }
        let notices = std::mem::take(&mut self.net.notices);
        for n in notices {
            match n {
                Notice::Data { conn, to, payload, len, .. } => {
                    self.on_block_data(eng, at, conn, to, payload, len);
                }
                Notice::Control { conn, from, to, msg } => {
                    self.on_control(eng, at, conn, from, to, msg);
                }
                Notice::Acked { .. } => {}
            }
        }
    }

    // --- connection setup ---

    /// Full-mesh negotiation: every compatible pair gets exactly one
    /// connection. Whenever the preferred uTP attempt has a TCP fallback
    /// available, the pair races both transports and the uTP one can lose.
    fn on_tracker(&mut self, eng: &mut Engine<Event>, _at: SimTime) {
        let _ = eng;
        let n = self.peers.len();
        let prob = self.cfg.transport.utp_race_failure_prob;
        for i in 0..n {
            for j in (i + 1)..n {
                let (di, dj) = (self.peers[i].disposition, self.peers[j].disposition);
                let Some(mut proto) = disposition::negotiate(di, dj) else {
                    continue;
                };
                if proto == Protocol::Utp
                    && disposition::tcp_feasible(di, dj)
                    && self.rng_nego.random::<f64>() < prob
                {
                    proto = Protocol::Tcp;
                }
                let mk_cc = |p: &SwarmPeer| match proto {
                    Protocol::Utp => Cc::Ledbat(LedbatState::new(
                        MSS,
                        p.ledbat_target_us,
                        self.cfg.transport.ledbat_gain,
                    )),
                    Protocol::Tcp => Cc::Tcp(TcpState::new(MSS, self.cfg.transport.tcp_flavor)),
                };
                let (cc_i, cc_j) = (mk_cc(&self.peers[i]), mk_cc(&self.peers[j]));
                let id = self
                    .net
                    .add_conn(i as PeerId, j as PeerId, proto, cc_i, cc_j);
                // bitfields are exchanged as part of setup
                self.conn_states.push(ConnState {
                    unchoke_sent: [false; 2],
                    unchoked_by_remote: [false; 2],
                    remote_have: [self.peers[j].have.clone(), self.peers[i].have.clone()],
                    hist: [VecDeque::new(), VecDeque::new()],
                });
                for c in 0..self.chunk_count as usize {
                    if self.peers[j].have[c] {
                        self.peers[i].avail[c] += 1;
                    }
                    if self.peers[i].have[c] {
                        self.peers[j].avail[c] += 1;
                    }
                }
                self.conn_index[i].push((j as PeerId, id));
                self.conn_index[j].push((i as PeerId, id));
            }
        }
    }

    // --- choking ---

    /// True when the remote on `ci`, as endpoint `u` sees it, still lacks a
    /// chunk `u` holds — the receiver-side notion of interest.
    fn remote_wants_from(&self, u: usize, ci: usize) -> bool {
        let e = self.net.conns[ci].dir_of_sender(u as PeerId);
        let view = &self.conn_states[ci].remote_have[e];
        self.peers[u]
            .have
            .iter()
            .zip(view)
            .any(|(mine, theirs)| *mine && !*theirs)
    }

    fn on_rechoke(&mut self, eng: &mut Engine<Event>, at: SimTime) {
        let window = SimTime::from_secs_f64(2.0 * self.cfg.swarm.rechoke_secs);
        for (ci, conn) in self.net.conns.iter().enumerate() {
            let cs = &mut self.conn_states[ci];
            for e in 0..2 {
                cs.hist[e].push_back(RateSnap {
                    at,
                    rcvd: conn.dir[1 - e].delivered_bytes,
                    sent: conn.dir[e].sent_payload_bytes,
                });
                while cs.hist[e].len() >= 2 && cs.hist[e][1].at + window <= at {
                    cs.hist[e].pop_front();
                }
            }
        }

        let slots = self.cfg.swarm.upload_slots as usize;
        for u in 0..self.peers.len() {
            let mut cand: Vec<(u64, PeerId)> = Vec::new();
            for &(remote, ci) in &self.conn_index[u] {
                let ci = ci as usize;
                if !self.remote_wants_from(u, ci) {
                    continue;
                }
                let e = self.net.conns[ci].dir_of_sender(u as PeerId);
                let h = &self.conn_states[ci].hist[e];
                let (front, back) = (h.front().unwrap(), h.back().unwrap());
                // reciprocate download rate; a complete peer ranks by what
                // it manages to push instead
                let rate = if self.peers[u].complete() {
                    back.sent - front.sent
                } else {
                    back.rcvd - front.rcvd
                };
                cand.push((rate, remote));
            }
            cand.shuffle(&mut self.rng_shuffle);
            cand.sort_by(|a, b| b.0.cmp(&a.0)); // stable: ties keep shuffled order
            self.peers[u].rate_winners =
                cand.iter().take(slots.saturating_sub(1)).map(|c| c.1).collect();
            self.apply_unchokes(eng, at, u);
        }
        eng.schedule(
            at + SimTime::from_secs_f64(self.cfg.swarm.rechoke_secs),
            Event::RechokeTick,
        );
    }

    fn on_optimistic(&mut self, eng: &mut Engine<Event>, at: SimTime) {
        for u in 0..self.peers.len() {
            let mut pool: Vec<PeerId> = Vec::new();
            for &(remote, ci) in &self.conn_index[u] {
                if self.peers[u].rate_winners.contains(&remote) {
                    continue;
                }
                if self.remote_wants_from(u, ci as usize) {
                    pool.push(remote);
                }
            }
            self.peers[u].optimistic = if pool.is_empty() {
                None
            } else {
                Some(pool[self.rng_opt.random_range(0..pool.len())])
            };
            self.apply_unchokes(eng, at, u);
        }
        eng.schedule(
            at + SimTime::from_secs_f64(self.cfg.swarm.optimistic_secs),
            Event::OptimisticUnchokeTick,
        );
    }

    /// Sends only the Choke/Unchoke edges between the previous decision and
    /// the current winners+optimistic set; a choke abandons queued serves.
    fn apply_unchokes(&mut self, eng: &mut Engine<Event>, at: SimTime, u: usize) {
        let mut effective = self.peers[u].rate_winners.clone();
        if let Some(o) = self.peers[u].optimistic {
            if !effective.contains(&o) {
                effective.push(o);
            }
        }
        let row = self.conn_index[u].clone();
        for (remote, ci) in row {
            let e = self.net.conns[ci as usize].dir_of_sender(u as PeerId);
            let should = effective.contains(&remote);
            let cur = self.conn_states[ci as usize].unchoke_sent[e];
            if should && !cur {
                self.conn_states[ci as usize].unchoke_sent[e] = true;
                self.net
                    .send_control(eng, at, ci, u as PeerId, remote, Control::Unchoke);
            } else if !should && cur {
                self.conn_states[ci as usize].unchoke_sent[e] = false;
                self.net.clear_unstarted_blocks(ci, u as PeerId);
                self.net
                    .send_control(eng, at, ci, u as PeerId, remote, Control::Choke);
            }
        }
    }

    // --- requesting ---

    /// Re-issues block requests that outlived the adaptive timeout
    /// (4 × smoothed block latency, floored), then tops up every pipeline.
    /// The sweep is the catch-all recovery path for lost requests, lost
    /// serves, and uploads abandoned by a choke.
    fn on_scan(&mut self, eng: &mut Engine<Event>, at: SimTime) {
        for u in 0..self.peers.len() {
            let p = &mut self.peers[u];
            let timeout_us = (4.0 * p.block_rtt_us)
                .max(self.cfg.swarm.request_timeout_floor_secs * 1e6);
            let timeout = SimTime::from_micros(timeout_us as u64);
            let mut expired = Vec::new();
            p.outstanding.retain(|o| {
                if at - o.issued_at >= timeout {
                    expired.push(*o);
                    false
                } else {
                    true
                }
            });
            for o in &expired {
                // free the chunk so the next fill may try another uploader
                if p.assignment.get(&o.chunk) == Some(&o.conn) {
                    p.assignment.remove(&o.chunk);
                }
            }
            // withdraw the abandoned requests so the old uploader does not
            // burn capacity on blocks that will be re-fetched elsewhere
            for o in expired {
                let remote = self.net.conns[o.conn as usize].other(u as PeerId);
                self.net.send_control(
                    eng,
                    at,
                    o.conn,
                    u as PeerId,
                    remote,
                    Control::Cancel { chunk: o.chunk, block: o.block },
                );
            }
        }
        for u in 0..self.peers.len() {
            self.fill_peer(eng, at, u);
        }
        eng.schedule(
            at + SimTime::from_secs_f64(self.cfg.swarm.request_scan_secs),
            Event::TimerExpiry { timer: Timer::RequestScan },
        );
    }

    fn fill_peer(&mut self, eng: &mut Engine<Event>, at: SimTime, u: usize) {
        let row = self.conn_index[u].clone();
        for (remote, ci) in row {
            self.fill_conn(eng, at, u, remote, ci);
        }
    }

    /// Tops the pipeline on one connection up: first more blocks of chunks
    /// already assigned here, then a fresh rarest chunk.
    fn fill_conn(&mut self, eng: &mut Engine<Event>, at: SimTime, u: usize, remote: PeerId, ci: ConnId) {
        if self.peers[u].complete() {
            return;
        }
        let e = self.net.conns[ci as usize].dir_of_sender(u as PeerId);
        if !self.conn_states[ci as usize].unchoked_by_remote[e] {
            return;
        }
        let depth = self.cfg.swarm.pipeline_depth as usize;
        loop {
            let live = self.peers[u].outstanding.iter().filter(|o| o.conn == ci).count();
            if live >= depth {
                return;
            }
            let mut req = None;
            for (&chunk, &c) in &self.peers[u].assignment {
                if c == ci {
                    if let Some(b) = self.next_block(u, chunk) {
                        req = Some((chunk, b));
                        break;
                    }
                }
            }
            if req.is_none() {
                if let Some(chunk) = self.select_chunk(u, ci as usize) {
                    self.peers[u].assignment.insert(chunk, ci);
                    let b = self.next_block(u, chunk).expect("selected chunk is requestable");
                    req = Some((chunk, b));
                }
            }
            let Some((chunk, block)) = req else {
                return;
            };
            self.peers[u].outstanding.push(Outstanding {
                conn: ci,
                chunk,
                block,
                issued_at: at,
            });
            self.net
                .send_control(eng, at, ci, u as PeerId, remote, Control::Request { chunk, block });
        }
    }

    /// Lowest block of `chunk` that is neither done nor requested anywhere.
    fn next_block(&self, u: usize, chunk: ChunkId) -> Option<u32> {
        let p = &self.peers[u];
        let blocks = self.cfg.blocks_in_chunk(chunk);
        let done = p.chunk_work.get(&chunk);
        (0..blocks).find(|&b| {
            !done.is_some_and(|w| w.done[b as usize])
                && !p.outstanding.iter().any(|o| o.chunk == chunk && o.block == b)
        })
    }

    /// Rarest-first over chunks the remote offers and `u` neither holds nor
    /// is fetching; ties are broken uniformly at random.
    pub fn select_chunk(&mut self, u: usize, ci: usize) -> Option<ChunkId> {
        let e = self.net.conns[ci].dir_of_sender(u as PeerId);
        let view = &self.conn_states[ci].remote_have[e];
        let p = &self.peers[u];
        let mut best = u32::MAX;
        let mut ties: Vec<ChunkId> = Vec::new();
        for c in 0..self.chunk_count {
            let cu = c as usize;
            if !view[cu] || p.have[cu] || p.assignment.contains_key(&c) {
                continue;
            }
            if self.next_block(u, c).is_none() {
                continue; // every missing block already requested elsewhere
            }
            let a = p.avail[cu];
            if a < best {
                best = a;
                ties.clear();
                ties.push(c);
            } else if a == best {
                ties.push(c);
            }
        }
        match ties.len() {
            0 => None,
            1 => Some(ties[0]),
            n => Some(ties[self.rng_piece.random_range(0..n)]),
        }
    }

    // --- data and control arrival ---

    fn on_block_data(
        &mut self,
        eng: &mut Engine<Event>,
        at: SimTime,
        _conn: ConnId,
        to: PeerId,
        payload: Payload,
        len: u32,
    ) {
        let Payload::Block { chunk, block, offset } = payload else {
            debug_assert!(false, "swarm peers exchange only block payloads");
            return;
        };
        let u = to as usize;
        let done_already = self.peers[u].have[chunk as usize]
            || self.peers[u]
                .chunk_work
                .get(&chunk)
                .is_some_and(|w| w.done[block as usize]);
        if done_already {
            self.peers[u].dup_app_bytes += u64::from(len);
            return;
        }
        let block_len = self.cfg.block_len(chunk, block);
        let (novel, filled) = {
            let rs = self.peers[u].block_bytes.entry((chunk, block)).or_default();
            let novel = rs.insert(u64::from(offset), u64::from(offset) + u64::from(len));
            (novel, rs.contiguous_from_zero() == u64::from(block_len))
        };
        self.peers[u].dup_app_bytes += u64::from(len) - novel;
        if filled {
            self.peers[u].block_bytes.remove(&(chunk, block));
            self.complete_block(eng, at, u, chunk, block);
        }
    }

    fn complete_block(&mut self, eng: &mut Engine<Event>, at: SimTime, u: usize, chunk: ChunkId, block: u32) {
        let blocks = self.cfg.blocks_in_chunk(chunk);
        {
            let p = &mut self.peers[u];
            let w = p.chunk_work.entry(chunk).or_insert_with(|| ChunkWork {
                done: vec![false; blocks as usize],
                done_count: 0,
            });
            debug_assert!(!w.done[block as usize]);
            w.done[block as usize] = true;
            w.done_count += 1;
            if let Some(pos) = p
                .outstanding
                .iter()
                .position(|o| o.chunk == chunk && o.block == block)
            {
                let o = p.outstanding.remove(pos);
                let sample = (at - o.issued_at).as_micros() as f64;
                p.block_rtt_us = 0.875 * p.block_rtt_us + 0.125 * sample;
            }
            if w.done_count < blocks {
                self.fill_peer(eng, at, u);
                return;
            }
        }
        self.complete_chunk(eng, at, u, chunk);
        self.fill_peer(eng, at, u);
    }

    fn complete_chunk(&mut self, eng: &mut Engine<Event>, at: SimTime, u: usize, chunk: ChunkId) {
        {
            let p = &mut self.peers[u];
            debug_assert!(!p.have[chunk as usize]);
            p.have[chunk as usize] = true;
            p.have_count += 1;
            p.chunk_work.remove(&chunk);
            p.assignment.remove(&chunk);
            p.block_bytes.retain(|&(c, _), _| c != chunk);
            p.outstanding.retain(|o| o.chunk != chunk);
        }
        let row = self.conn_index[u].clone();
        for (remote, ci) in row {
            self.net
                .send_control(eng, at, ci, u as PeerId, remote, Control::Have { chunk });
        }
        let p = &mut self.peers[u];
        if p.complete() && !p.is_seed && p.completed_at.is_none() {
            p.completed_at = Some(at);
            self.complete_leechers += 1;
            self.t_last_completion = Some(at);
        }
    }

    fn on_control(
        &mut self,
        eng: &mut Engine<Event>,
        at: SimTime,
        conn: ConnId,
        from: PeerId,
        to: PeerId,
        msg: Control,
    ) {
        let ci = conn as usize;
        let e = self.net.conns[ci].dir_of_sender(to);
        match msg {
            Control::Request { chunk, block } => {
                // serve only what was actually offered: an unchoked requester
                // and a chunk we hold; duplicates already queued are ignored
                if self.conn_states[ci].unchoke_sent[e]
                    && self.peers[to as usize].have[chunk as usize]
                    && !self.net.has_queued_block(conn, to, chunk, block)
                {
                    let len = self.cfg.block_len(chunk, block);
                    self.net.queue_block(eng, at, conn, to, chunk, block, len);
                }
            }
            Control::Cancel { chunk, block } => {
                self.net.cancel_block(conn, to, chunk, block);
            }
            Control::Have { chunk } => {
                let cs = &mut self.conn_states[ci];
                if !cs.remote_have[e][chunk as usize] {
                    cs.remote_have[e][chunk as usize] = true;
                    self.peers[to as usize].avail[chunk as usize] += 1;
                }
                self.fill_conn(eng, at, to as usize, from, conn);
            }
            Control::Unchoke => {
                self.conn_states[ci].unchoked_by_remote[e] = true;
                self.fill_conn(eng, at, to as usize, from, conn);
            }
            Control::Choke => {
                self.conn_states[ci].unchoked_by_remote[e] = false;
                let p = &mut self.peers[to as usize];
                let mut repooled = Vec::new();
                p.outstanding.retain(|o| {
                    if o.conn == conn {
                        repooled.push(o.chunk);
                        false
                    } else {
                        true
                    }
                });
                // partial block bytes are kept: a later re-request resumes
                p.assignment.retain(|_, c| *c != conn);
                let _ = repooled;
            }
        }
    }

    // --- whole-run driver ---

    /// Runs to all-leechers-complete; the virtual-time cap guards against
    /// runaway configurations.
    pub fn run(&mut self, eng: &mut Engine<Event>) -> Result<SimTime, RunError> {
        self.start(eng);
        let cap = SimTime::from_secs_f64(self.cfg.run.max_sim_secs);
        eng.run_until(self, |eng, sw, at, ev| sw.handle(eng, at, ev), Swarm::done, cap)
    }
}
