//! Per-run summary assembled after a swarm run, and the fixed-format CSV
//! writers behind the command-line interface. All floating-point output is
//! printed with six fixed decimals so byte-identical reruns stay
//! byte-identical on disk.

use crate::engine::EngineStats;
use crate::metrics::{self, QueueStats, StepDist};
use crate::swarm::{disposition, Swarm};
use crate::time::SimTime;
use crate::transport::link::DequeueSample;
use crate::transport::packet::{PeerId, Protocol};
use serde::Serialize;
use std::io::{self, Write};

#[derive(Debug, Clone, Serialize)]
pub struct QueueSummary {
    pub samples: u64,
    /// P(Q > 0) over post-dequeue samples.
    pub p_busy: f64,
    pub mean_bytes: f64,
    pub mean_ms: f64,
}

impl QueueSummary {
    fn empty() -> Self {
        QueueSummary {
            samples: 0,
            p_busy: 0.0,
            mean_bytes: 0.0,
            mean_ms: 0.0,
        }
    }

    /// Pools (bytes, ms) pairs — the ms values are converted per link, so
    /// mixed-capacity populations aggregate correctly.
    fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        if pairs.is_empty() {
            return QueueSummary::empty();
        }
        let n = pairs.len() as f64;
        let busy = pairs.iter().filter(|(b, _)| *b > 0.0).count() as f64;
        QueueSummary {
            samples: pairs.len() as u64,
            p_busy: busy / n,
            mean_bytes: pairs.iter().map(|(b, _)| b).sum::<f64>() / n,
            mean_ms: pairs.iter().map(|(_, m)| m).sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PeerQueueRow {
    pub peer: PeerId,
    pub class: String,
    pub stats: QueueStats,
    /// Time-weighted occupancy over the run (integral discipline, as
    /// opposed to the post-dequeue sampling in `stats`).
    pub tw_mean_bytes: f64,
    pub tw_busy_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassRow {
    pub class: String,
    pub peers: u32,
    /// None for the seed class, which never "completes".
    pub mean_completion_s: Option<f64>,
    pub queue: QueueSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub scenario: String,
    pub seed: u64,
    pub config_digest: String,
    pub duration_s: f64,
    /// (peer, class, completion time) for every leecher, by peer id.
    pub completions: Vec<(PeerId, String, f64)>,
    pub mean_completion_s: f64,
    pub std_completion_s: f64,
    pub completion_dist: StepDist,
    pub tcp_data_share_pct: f64,
    pub utp_data_share_pct: f64,
    pub tcp_wire_share_pct: f64,
    pub utp_wire_share_pct: f64,
    /// Fraction of leechers whose disposition pairs with its own kind over
    /// TCP — the population analogue of the TCP byte share.
    pub tcp_peer_share_pct: f64,
    pub pooled_queue: QueueSummary,
    /// Same pooling restricted to the active phase, t ≤ P90 of completions:
    /// the regime where the swarm as a whole is still working.
    pub active_queue: QueueSummary,
    pub active_horizon_s: f64,
    pub per_peer_queue: Vec<PeerQueueRow>,
    pub per_class: Vec<ClassRow>,
    pub dup_app_bytes: u64,
    pub retx_segments: u64,
    pub enqueued_pkts: u64,
    pub served_pkts: u64,
    pub dropped_pkts: u64,
    pub dropped_bytes: u64,
    /// Packets still sitting in some access queue when the run stopped
    /// (`enqueued = served + dropped + queued_end` holds exactly).
    pub queued_pkts_end: u64,
    pub events_dispatched: u64,
}

/// Builds the summary from a finished swarm. Needs `&mut` only to close the
/// links' time-weighted integrals at the horizon.
pub fn build(swarm: &mut Swarm, stats: EngineStats, t_end: SimTime) -> SimulationReport {
    let duration_s = t_end.as_secs_f64();

    let mut completions = Vec::new();
    for p in &swarm.peers {
        if !p.is_seed {
            let t = p
                .completed_at
                .expect("report is built after all leechers complete")
                .as_secs_f64();
            completions.push((p.id, swarm.class_name(p.id).to_string(), t));
        }
    }
    let times: Vec<f64> = completions.iter().map(|c| c.2).collect();
    let completion_dist = StepDist::from_samples(&times).expect("at least one leecher");
    let active_horizon_s = completion_dist.quantile(0.9);

    // byte shares by carrying protocol
    let (mut tcp_data, mut utp_data, mut tcp_wire, mut utp_wire) = (0u64, 0u64, 0u64, 0u64);
    for c in &swarm.net.conns {
        let data: u64 = c.dir.iter().map(|d| d.delivered_bytes).sum();
        match c.proto {
            Protocol::Tcp => {
                tcp_data += data;
                tcp_wire += c.wire_bytes;
            }
            Protocol::Utp => {
                utp_data += data;
                utp_wire += c.wire_bytes;
            }
        }
    }
    let (tcp_data_share_pct, utp_data_share_pct) =
        metrics::byte_share(tcp_data, utp_data).unwrap_or((0.0, 0.0));
    let (tcp_wire_share_pct, utp_wire_share_pct) =
        metrics::byte_share(tcp_wire, utp_wire).unwrap_or((0.0, 0.0));

    let leechers = swarm.leecher_total as f64;
    let tcp_peers = swarm
        .peers
        .iter()
        .filter(|p| {
            !p.is_seed
                && disposition::negotiate(p.disposition, p.disposition) == Some(Protocol::Tcp)
        })
        .count() as f64;
    let tcp_peer_share_pct = 100.0 * tcp_peers / leechers;

    // queue statistics: per peer, pooled, active-phase, per class
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut active: Vec<(f64, f64)> = Vec::new();
    let mut per_peer_queue = Vec::new();
    let mut class_pairs: Vec<Vec<(f64, f64)>> = vec![Vec::new(); swarm.cfg.classes.len() + 1];
    for p in 0..swarm.peers.len() {
        let class = swarm.class_name(p as PeerId).to_string();
        let class_slot = if swarm.peers[p].is_seed {
            swarm.cfg.classes.len()
        } else {
            swarm.peers[p].class
        };
        let link = &mut swarm.net.peers[p].link;
        let bps = link.bps;
        for s in &link.dequeue_log {
            let pair = (s.bytes as f64, metrics::bytes_to_ms(s.bytes as f64, bps));
            pooled.push(pair);
            if s.at.as_secs_f64() <= active_horizon_s {
                active.push(pair);
            }
            class_pairs[class_slot].push(pair);
        }
        if let Ok(stats) = metrics::queue_stats(&link.dequeue_log, bps) {
            let tw_mean_bytes = link.time_weighted_mean_bytes(t_end);
            let tw_busy_fraction = link.time_weighted_busy_fraction(t_end);
            per_peer_queue.push(PeerQueueRow {
                peer: p as PeerId,
                class,
                stats,
                tw_mean_bytes,
                tw_busy_fraction,
            });
        }
    }

    let mut per_class = Vec::new();
    for (i, c) in swarm.cfg.classes.iter().enumerate() {
        let ts: Vec<f64> = completions
            .iter()
            .filter(|(_, name, _)| *name == c.name)
            .map(|(_, _, t)| *t)
            .collect();
        per_class.push(ClassRow {
            class: c.name.clone(),
            peers: c.count,
            mean_completion_s: (!ts.is_empty()).then(|| metrics::mean(&ts)),
            queue: QueueSummary::from_pairs(&class_pairs[i]),
        });
    }
    per_class.push(ClassRow {
        class: "seed".into(),
        peers: swarm.cfg.swarm.seed_count,
        mean_completion_s: None,
        queue: QueueSummary::from_pairs(&class_pairs[swarm.cfg.classes.len()]),
    });

    let mut counters = crate::transport::link::LinkCounters::default();
    let mut queued_pkts_end = 0u64;
    for p in &swarm.net.peers {
        debug_assert!(p.link.conservation_holds());
        let c = p.link.counters;
        counters.enqueued_pkts += c.enqueued_pkts;
        counters.served_pkts += c.served_pkts;
        counters.dropped_pkts += c.dropped_pkts;
        counters.dropped_bytes += c.dropped_bytes;
        queued_pkts_end += u64::from(p.link.queued_pkts());
    }

    SimulationReport {
        scenario: swarm.cfg.name.clone(),
        seed: swarm.seed,
        config_digest: swarm.cfg.digest_hex(),
        duration_s,
        mean_completion_s: metrics::mean(&times),
        std_completion_s: metrics::std_pop(&times),
        completions,
        completion_dist,
        tcp_data_share_pct,
        utp_data_share_pct,
        tcp_wire_share_pct,
        utp_wire_share_pct,
        tcp_peer_share_pct,
        pooled_queue: QueueSummary::from_pairs(&pooled),
        active_queue: QueueSummary::from_pairs(&active),
        active_horizon_s,
        per_peer_queue,
        per_class,
        dup_app_bytes: swarm.peers.iter().map(|p| p.dup_app_bytes).sum(),
        retx_segments: swarm
            .net
            .conns
            .iter()
            .map(|c| c.dir.iter().map(|d| d.retx_segments).sum::<u64>())
            .sum(),
        enqueued_pkts: counters.enqueued_pkts,
        served_pkts: counters.served_pkts,
        dropped_pkts: counters.dropped_pkts,
        dropped_bytes: counters.dropped_bytes,
        queued_pkts_end,
        events_dispatched: stats.dispatched,
    }
}

// --- CSV writers ---

fn f(x: f64) -> String {
    format!("{x:.6}")
}

pub fn write_report_csv<W: Write>(r: &SimulationReport, w: &mut W) -> io::Result<()> {
    writeln!(
        w,
        "scenario,seed,config_digest,duration_s,mean_completion_s,std_completion_s,\
         tcp_data_share_pct,utp_data_share_pct,tcp_wire_share_pct,utp_wire_share_pct,\
         tcp_peer_share_pct,p_queue_busy,mean_queue_bytes,mean_queue_ms,\
         active_horizon_s,active_p_queue_busy,active_mean_queue_ms,\
         dup_app_bytes,retx_segments,enqueued_pkts,served_pkts,dropped_pkts,dropped_bytes,\
         queued_pkts_end,events_dispatched"
    )?;
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.scenario,
        r.seed,
        r.config_digest,
        f(r.duration_s),
        f(r.mean_completion_s),
        f(r.std_completion_s),
        f(r.tcp_data_share_pct),
        f(r.utp_data_share_pct),
        f(r.tcp_wire_share_pct),
        f(r.utp_wire_share_pct),
        f(r.tcp_peer_share_pct),
        f(r.pooled_queue.p_busy),
        f(r.pooled_queue.mean_bytes),
        f(r.pooled_queue.mean_ms),
        f(r.active_horizon_s),
        f(r.active_queue.p_busy),
        f(r.active_queue.mean_ms),
        r.dup_app_bytes,
        r.retx_segments,
        r.enqueued_pkts,
        r.served_pkts,
        r.dropped_pkts,
        r.dropped_bytes,
        r.queued_pkts_end,
        r.events_dispatched,
    )
}

pub fn write_completion_csv<W: Write>(r: &SimulationReport, w: &mut W) -> io::Result<()> {
    writeln!(w, "peer_id,class,completion_s")?;
    for (peer, class, t) in &r.completions {
        writeln!(w, "{peer},{class},{}", f(*t))?;
    }
    Ok(())
}

pub fn write_queue_csv<W: Write>(log: &[DequeueSample], w: &mut W) -> io::Result<()> {
    writeln!(w, "time_s,queue_bytes,queue_pkts")?;
    for s in log {
        writeln!(w, "{},{},{}", f(s.at.as_secs_f64()), s.bytes, s.pkts)?;
    }
    Ok(())
}

pub fn write_regression_csv<W: Write>(fit: &metrics::LinFit, w: &mut W) -> io::Result<()> {
    writeln!(w, "slope,intercept,r_squared,n_points")?;
    writeln!(
        w,
        "{},{},{},{}",
        f(fit.slope),
        f(fit.intercept),
        f(fit.r_squared),
        fit.n
    )
}

pub fn write_envelope_csv<W: Write>(env: &metrics::Envelope, w: &mut W) -> io::Result<()> {
    writeln!(w, "completion_s,cdf_min,cdf_max")?;
    for i in 0..env.grid.len() {
        writeln!(w, "{},{},{}", f(env.grid[i]), f(env.lo[i]), f(env.hi[i]))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;
    use crate::engine::Engine;

    fn tiny_report() -> SimulationReport {
        let text = "name = \"rpt\"\nseeds = [1]\n\n[file]\nsize_bytes = 65536\nchunk_bytes = 16384\nblock_bytes = 4096\n\n[[class]]\nname = \"c0\"\ncount = 2\ndisposition = 31\n";
        let cfg = ScenarioConfig::from_toml_str(text).unwrap();
        let mut sw = Swarm::new(cfg, 5).unwrap();
        let mut eng = Engine::new();
        let t = sw.run(&mut eng).unwrap();
        build(&mut sw, eng.stats(), t)
    }

    #[test]
    fn report_is_internally_consistent() {
        let r = tiny_report();
        assert_eq!(r.completions.len(), 2);
        assert!((r.tcp_data_share_pct + r.utp_data_share_pct - 100.0).abs() < 1e-9);
        assert!((r.tcp_wire_share_pct + r.utp_wire_share_pct - 100.0).abs() < 1e-9);
        assert!(r.duration_s >= r.mean_completion_s);
        assert!(r.pooled_queue.samples > 0);
        assert!(r.active_queue.samples <= r.pooled_queue.samples);
        // conservation across all links, including what was still queued
        assert_eq!(
            r.enqueued_pkts,
            r.served_pkts + r.dropped_pkts + r.queued_pkts_end
        );
        // every leecher completion is ≤ the run duration
        assert!(r.completions.iter().all(|c| c.2 <= r.duration_s + 1e-9));
        // per-class roll-up covers all leecher classes plus the seed row
        assert_eq!(r.per_class.len(), 2);
        assert_eq!(r.per_class[1].class, "seed");
        assert!(r.per_class[1].mean_completion_s.is_none());
    }

    #[test]
    fn csv_writers_emit_fixed_headers_and_rows() {
        let r = tiny_report();
        let mut buf = Vec::new();
        write_report_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("scenario,seed,config_digest,duration_s"));
        let row = lines.next().unwrap();
        assert_eq!(row.split(',').count(), header.split(',').count());
        assert!(lines.next().is_none(), "single data row");

        let mut buf = Vec::new();
        write_completion_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + r.completions.len());
    }

    #[test]
    fn identical_runs_serialize_identically() {
        let a = tiny_report();
        let b = tiny_report();
        let mut ba = Vec::new();
        let mut bb = Vec::new();
        write_report_csv(&a, &mut ba).unwrap();
        write_report_csv(&b, &mut bb).unwrap();
        assert_eq!(ba, bb, "same seed, byte-identical report");
    }
}
