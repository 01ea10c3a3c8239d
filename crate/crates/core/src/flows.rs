//! Two-node flow harness: long-lived bulk flows from one sender to one
//! receiver across the sender's access bottleneck. This isolates the
//! congestion controllers from swarm dynamics, so their macroscopic claims
//! can be checked directly: a lone delay-based flow should park the queue at
//! its target while filling the link, and the same flow sharing the
//! bottleneck with a loss-based one should yield almost all capacity without
//! hurting aggregate throughput.

use crate::engine::Engine;
use crate::error::RunError;
use crate::net::{Cc, Event, Net, NetConfig, Notice, Timer};
use crate::time::SimTime;
use crate::transport::link::AccessLink;
use crate::transport::packet::{ConnId, Protocol};
use crate::transport::{LedbatState, TcpFlavor, TcpState, MSS};

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FlowSpec {
    pub proto: Protocol,
    /// Activation time; polled at sample granularity.
    pub start_s: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct FlowSetup {
    pub bps: u64,
    pub buffer_secs: f64,
    pub base_owd_us: u64,
    pub duration_s: f64,
    pub ledbat_target_us: u64,
    pub ledbat_gain: f64,
    pub tcp_flavor: TcpFlavor,
    pub sample_ms: u64,
    pub flows: Vec<FlowSpec>,
}

impl Default for FlowSetup {
    fn default() -> Self {
        FlowSetup {
            bps: 1_000_000,
            buffer_secs: 1.0,
            base_owd_us: 1000,
            duration_s: 60.0,
            ledbat_target_us: 100_000,
            ledbat_gain: 1.0,
            tcp_flavor: TcpFlavor::NewReno,
            sample_ms: 100,
            flows: Vec::new(),
        }
    }
}

/// One point of the sampled trajectory (for plots and the browser demo).
#[derive(Debug, Clone, serde::Serialize)]
pub struct FlowSample {
    pub t_s: f64,
    pub queue_bytes: u64,
    pub cwnd: Vec<f64>,
    /// LEDBAT's internal queuing-delay estimate; None for TCP flows.
    pub qd_est_us: Vec<Option<f64>>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct FlowStats {
    pub proto: Protocol,
    pub delivered_bytes: u64,
    pub share_pct: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct FlowReport {
    pub flows: Vec<FlowStats>,
    /// Served wire bits over capacity × duration.
    pub utilization: f64,
    /// Ack-clocked time average of each LEDBAT flow's delay estimate (µs).
    pub qd_time_avg_us: Vec<Option<f64>>,
    pub mean_queue_bytes: f64,
    pub busy_fraction: f64,
    pub samples: Vec<FlowSample>,
}

struct QdTrace {
    last_at: SimTime,
    last_qd: f64,
    integral_us2: f64,
}

struct FlowWorld {
    net: Net,
    conns: Vec<ConnId>,
    started: Vec<bool>,
    specs: Vec<FlowSpec>,
    qd: Vec<Option<QdTrace>>,
    samples: Vec<FlowSample>,
    sample_every: SimTime,
    end: SimTime,
    finished: bool,
}

impl FlowWorld {
    fn poll_starts(&mut self, eng: &mut Engine<Event>, at: SimTime) {
        for f in 0..self.specs.len() {
            if !self.started[f] && SimTime::from_secs_f64(self.specs[f].start_s) <= at {
                self.started[f] = true;
                self.net.set_bulk_backlog(eng, at, self.conns[f], 0, true);
            }
        }
    }

    fn record_sample(&mut self, at: SimTime) {
        let mut cwnd = Vec::with_capacity(self.conns.len());
        let mut qd = Vec::with_capacity(self.conns.len());
        for &c in &self.conns {
            let cc = &self.net.conns[c as usize].dir[0].cc;
            cwnd.push(cc.cwnd());
            qd.push(match cc {
                Cc::Ledbat(lb) => Some(lb.queuing_delay_us()),
                Cc::Tcp(_) => None,
            });
        }
        self.samples.push(FlowSample {
            t_s: at.as_secs_f64(),
            queue_bytes: self.net.peers[0].link.queued_bytes(),
            cwnd,
            qd_est_us: qd,
        });
    }

    fn integrate_qd(&mut self, at: SimTime, flow: usize) {
        let Cc::Ledbat(lb) = &self.net.conns[self.conns[flow] as usize].dir[0].cc else {
            return;
        };
        let cur = lb.queuing_delay_us();
        if let Some(tr) = &mut self.qd[flow] {
            tr.integral_us2 += tr.last_qd * (at - tr.last_at).as_micros() as f64;
            tr.last_at = at;
            tr.last_qd = cur;
        }
    }

    fn handle(&mut self, eng: &mut Engine<Event>, at: SimTime, ev: Event) {
        if let Some(ev) = self.net.handle(eng, at, ev) {
            match ev {
                Event::MetricsSample => {
                    self.poll_starts(eng, at);
                    self.record_sample(at);
                    let next = at + self.sample_every;
                    if next <= self.end {
                        eng.schedule(next, Event::MetricsSample);
                    }
                }
                Event::TimerExpiry { timer: Timer::EndOfRun } => self.finished = true,
                other => unreachable!("flow harness does not use {other:?}"),
            }
        }
        let notices = std::mem::take(&mut self.net.notices);
        for n in notices {
            if let Notice::Acked { conn, dir: 0 } = n {
                if let Some(flow) = self.conns.iter().position(|&c| c == conn) {
                    self.integrate_qd(at, flow);
                }
            }
        }
    }
}

/// Runs the configured flows to the fixed horizon. Fully deterministic: the
/// harness draws no randomness at all.
pub fn run_flows(setup: &FlowSetup) -> Result<FlowReport, RunError> {
    assert!(!setup.flows.is_empty(), "at least one flow required");
    let buffer = (setup.bps as f64 / 8.0 * setup.buffer_secs).round() as u64;
    // symmetric access; the reverse path carries only acks
    let links = vec![
        AccessLink::new(setup.bps, buffer),
        AccessLink::new(setup.bps, buffer),
    ];
    let net_cfg = NetConfig {
        base_owd: SimTime::from_micros(setup.base_owd_us),
        ..NetConfig::default()
    };
    let mut net = Net::new(net_cfg, links);
    let mut conns = Vec::new();
    for spec in &setup.flows {
        let mk = || match spec.proto {
            Protocol::Utp => Cc::Ledbat(LedbatState::new(
                MSS,
                setup.ledbat_target_us,
                setup.ledbat_gain,
            )),
            Protocol::Tcp => Cc::Tcp(TcpState::new(MSS, setup.tcp_flavor)),
        };
        conns.push(net.add_conn(0, 1, spec.proto, mk(), mk()));
    }
    let end = SimTime::from_secs_f64(setup.duration_s);
    let mut world = FlowWorld {
        qd: setup
            .flows
            .iter()
            .map(|s| {
                matches!(s.proto, Protocol::Utp).then(|| QdTrace {
                    last_at: SimTime::from_secs_f64(s.start_s),
                    last_qd: 0.0,
                    integral_us2: 0.0,
                })
            })
            .collect(),
        started: vec![false; setup.flows.len()],
        specs: setup.flows.clone(),
        net,
        conns,
        samples: Vec::new(),
        sample_every: SimTime::from_millis(setup.sample_ms.max(1)),
        end,
        finished: false,
    };

    let mut eng = Engine::new();
    eng.schedule(SimTime::ZERO, Event::MetricsSample);
    eng.schedule(end, Event::TimerExpiry { timer: Timer::EndOfRun });
    eng.run_until(
        &mut world,
        |eng, w, at, ev| w.handle(eng, at, ev),
        |w| w.finished,
        end + SimTime::from_secs(1),
    )?;

    // close the last-value-hold integrals at the horizon
    let qd_time_avg_us = (0..world.specs.len())
        .map(|f| {
            world.integrate_qd(end, f);
            world.qd[f].as_ref().map(|tr| {
                let span = (end - SimTime::from_secs_f64(world.specs[f].start_s)).as_micros();
                tr.integral_us2 / span as f64
            })
        })
        .collect();

    let delivered: Vec<u64> = world
        .conns
        .iter()
        .map(|&c| world.net.conns[c as usize].dir[0].delivered_bytes)
        .collect();
    let total: u64 = delivered.iter().sum();
    let flows = world
        .specs
        .iter()
        .zip(&delivered)
        .map(|(s, &d)| FlowStats {
            proto: s.proto,
            delivered_bytes: d,
            share_pct: if total == 0 {
                0.0
            } else {
                100.0 * d as f64 / total as f64
            },
        })
        .collect();
    let link = &mut world.net.peers[0].link;
    let utilization =
        link.counters.served_bytes as f64 * 8.0 / (setup.bps as f64 * setup.duration_s);
    Ok(FlowReport {
        flows,
        utilization,
        qd_time_avg_us,
        mean_queue_bytes: link.time_weighted_mean_bytes(end),
        busy_fraction: link.time_weighted_busy_fraction(end),
        samples: world.samples,
    })
}
