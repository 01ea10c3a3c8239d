//! Acceptance scoreboard: eleven end-to-end checks, one per criterion the
//! simulator must reproduce, each printing a single `criterion NN PASS/FAIL`
//! line before asserting. Run the whole board with
//!
//! ```text
//! cargo test --release --test acceptance -- --nocapture --test-threads=1
//! ```
//!
//! Criteria 3–9 share one fixture: the six desk-scale scenarios (1 seed +
//! 23 leechers, 10 MiB, 1 Mbps uplinks) × seeds {1, 2, 3}, computed once.

use std::sync::LazyLock;
use swarmsim_core::flows::{run_flows, FlowReport, FlowSetup, FlowSpec};
use swarmsim_core::report::SimulationReport;
use swarmsim_core::swarm::disposition;
use swarmsim_core::transport::packet::Protocol;
use swarmsim_core::{metrics, presets, run};

fn verdict(n: u32, ok: bool, detail: &str) {
    println!("criterion {n:02} {}  {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n:02} failed: {detail}");
}

// --- shared desk fixture -------------------------------------------------

struct Scenario {
    name: &'static str,
    reports: Vec<SimulationReport>,
}

impl Scenario {
    fn mean<F: Fn(&SimulationReport) -> f64>(&self, f: F) -> f64 {
        self.reports.iter().map(f).sum::<f64>() / self.reports.len() as f64
    }
}

static DESK: LazyLock<Vec<Scenario>> = LazyLock::new(|| {
    presets::desk_suite()
        .into_iter()
        .map(|name| {
            let cfg = presets::get(name).expect("desk preset exists");
            let reports = cfg
                .seeds
                .iter()
                .map(|&s| run::run_scenario(&cfg, s).expect("desk run completes"))
                .collect();
            Scenario { name, reports }
        })
        .collect()
});

fn desk(name: &str) -> &'static Scenario {
    DESK.iter().find(|s| s.name == name).expect("scenario in fixture")
}

fn class_mean_completion(r: &SimulationReport, class: &str) -> f64 {
    r.per_class
        .iter()
        .find(|c| c.class == class)
        .and_then(|c| c.mean_completion_s)
        .expect("class present with completions")
}

// --- single- and dual-flow criteria --------------------------------------

fn lone_ledbat(target_us: u64) -> FlowReport {
    run_flows(&FlowSetup {
        bps: 5_000_000,
        buffer_secs: 5.0,
        duration_s: 60.0,
        ledbat_target_us: target_us,
        flows: vec![FlowSpec { proto: Protocol::Utp, start_s: 0.0 }],
        ..FlowSetup::default()
    })
    .expect("single flow runs")
}

#[test]
fn c01_single_ledbat_flow_parks_delay_at_target_and_fills_link() {
    let mut details = Vec::new();
    let mut ok = true;
    for target_us in [100_000u64, 25_000] {
        let r = lone_ledbat(target_us);
        let qd = r.qd_time_avg_us[0].expect("ledbat flow has a delay estimate");
        let rel = (qd - target_us as f64) / target_us as f64;
        ok &= rel.abs() <= 0.20 && r.utilization >= 0.95;
        details.push(format!(
            "target {} ms: qd {:+.1}%, util {:.1}%",
            target_us / 1000,
            100.0 * rel,
            100.0 * r.utilization
        ));
    }
    verdict(1, ok, &details.join("; "));
}

#[test]
fn c02_ledbat_yields_to_tcp_without_sacrificing_utilization() {
    let base = FlowSetup {
        bps: 5_000_000,
        buffer_secs: 1.0,
        duration_s: 120.0,
        ..FlowSetup::default()
    };
    let tcp_alone = run_flows(&FlowSetup {
        flows: vec![FlowSpec { proto: Protocol::Tcp, start_s: 0.0 }],
        ..base.clone()
    })
    .expect("baseline runs");
    let duel = run_flows(&FlowSetup {
        flows: vec![
            FlowSpec { proto: Protocol::Utp, start_s: 0.0 },
            FlowSpec { proto: Protocol::Tcp, start_s: 0.0 },
        ],
        ..base
    })
    .expect("duel runs");
    let share = duel.flows[0].share_pct;
    let ok = share < 10.0 && duel.utilization >= tcp_alone.utilization - 0.02;
    verdict(
        2,
        ok,
        &format!(
            "ledbat share {share:.2}% (< 10%), duel util {:.1}% vs tcp-alone {:.1}%",
            100.0 * duel.utilization,
            100.0 * tcp_alone.utilization
        ),
    );
}

// --- desk-swarm criteria --------------------------------------------------

#[test]
fn c03_mixed_swarm_beats_all_utp_beats_all_tcp() {
    let t31 = desk("desk-homog-default").mean(|r| r.mean_completion_s);
    let t10 = desk("desk-homog-utp").mean(|r| r.mean_completion_s);
    let t5 = desk("desk-homog-tcp").mean(|r| r.mean_completion_s);
    let gap = (t5 - t31) / t5;
    let ok = t31 < t10 && t10 < t5 && gap >= 0.05;
    verdict(
        3,
        ok,
        &format!("E[T] mixed {t31:.1}s < all-uTP {t10:.1}s < all-TCP {t5:.1}s, mixed-vs-TCP gap {:.1}%", 100.0 * gap),
    );
}

#[test]
fn c04_all_tcp_bloats_the_queue_all_utp_keeps_it_near_target() {
    let tcp_ms = desk("desk-homog-tcp").mean(|r| r.pooled_queue.mean_ms);
    let utp_ms = desk("desk-homog-utp").mean(|r| r.pooled_queue.mean_ms);
    let ok = tcp_ms >= 300.0 && utp_ms <= 150.0;
    verdict(
        4,
        ok,
        &format!("mean queuing delay all-TCP {tcp_ms:.0} ms (≥ 300), all-uTP {utp_ms:.0} ms (≤ 150)"),
    );
}

#[test]
fn c05_queues_stay_busy_but_not_saturated_during_the_active_phase() {
    let mut ok = true;
    let mut lo: f64 = 1.0;
    let mut hi: f64 = 0.0;
    for name in ["desk-homog-default", "desk-homog-utp", "desk-homog-tcp"] {
        for r in &desk(name).reports {
            let b = r.active_queue.p_busy;
            ok &= (0.6..=0.95).contains(&b);
            lo = lo.min(b);
            hi = hi.max(b);
        }
    }
    verdict(5, ok, &format!("P(Q>0) across homogeneous runs ∈ [{lo:.2}, {hi:.2}] (required [0.60, 0.95])"));
}

#[test]
fn c06_utp_carries_most_data_under_default_dispositions() {
    let utp = desk("desk-homog-default").mean(|r| r.utp_data_share_pct);
    verdict(6, utp >= 60.0, &format!("uTP data share {utp:.1}% (≥ 60%)"));
}

#[test]
fn c07_byte_share_tracks_peer_share_in_mixed_populations() {
    let mut ok = true;
    let mut details = Vec::new();
    for name in ["desk-heter-75-25", "desk-heter-50-50", "desk-heter-25-75"] {
        let s = desk(name);
        let bytes = s.mean(|r| r.tcp_data_share_pct);
        let peers = s.mean(|r| r.tcp_peer_share_pct);
        ok &= (bytes - peers).abs() <= 15.0;
        details.push(format!("{}: bytes {bytes:.1}% vs peers {peers:.1}%", &name[5..]));
    }
    verdict(7, ok, &format!("{} (within ±15 pp)", details.join("; ")));
}

#[test]
fn c08_transport_preference_classes_finish_together() {
    let mut ok = true;
    let mut details = Vec::new();
    for name in ["desk-heter-75-25", "desk-heter-50-50", "desk-heter-25-75"] {
        let s = desk(name);
        let rel = s.mean(|r| {
            let tcp = class_mean_completion(r, "prefer-tcp");
            let utp = class_mean_completion(r, "prefer-utp");
            (tcp - utp).abs() / r.mean_completion_s
        });
        ok &= rel <= 0.10;
        details.push(format!("{}: {:.1}%", &name[5..], 100.0 * rel));
    }
    verdict(8, ok, &format!("class completion gap {} (≤ 10%)", details.join("; ")));
}

#[test]
fn c09_completion_time_rises_with_tcp_share_and_buffer_grows_with_it() {
    let points: Vec<(f64, f64)> = DESK
        .iter()
        .filter(|s| s.mean(|r| r.tcp_data_share_pct) > 0.0)
        .map(|s| (s.mean(|r| r.tcp_data_share_pct), s.mean(|r| r.mean_completion_s)))
        .collect();
    let fit = metrics::linear_fit(&points).expect("five scenarios with tcp traffic");
    let shares: Vec<f64> = DESK.iter().map(|s| s.mean(|r| r.tcp_data_share_pct)).collect();
    let queues: Vec<f64> = DESK.iter().map(|s| s.mean(|r| r.pooled_queue.mean_bytes)).collect();
    let rho = metrics::spearman(&shares, &queues);
    let ok = points.len() == 5 && fit.slope > 0.0 && rho >= 0.8;
    verdict(
        9,
        ok,
        &format!(
            "E[T] vs share slope {:+.3} s/pp over {} scenarios (> 0), share-vs-queue Spearman {rho:.2} (≥ 0.8)",
            fit.slope,
            points.len()
        ),
    );
}

// --- structural criteria --------------------------------------------------

#[test]
fn c10_negotiation_matches_the_brute_force_truth_table() {
    // independent oracle: uTP wins when either side may open uTP toward the
    // other's uTP acceptance; else TCP by the same rule; else nothing
    let oracle = |a: u8, b: u8| -> Option<Protocol> {
        let utp = (a & 2 != 0 && b & 8 != 0) || (b & 2 != 0 && a & 8 != 0);
        let tcp = (a & 1 != 0 && b & 4 != 0) || (b & 1 != 0 && a & 4 != 0);
        match (utp, tcp) {
            (true, _) => Some(Protocol::Utp),
            (false, true) => Some(Protocol::Tcp),
            (false, false) => None,
        }
    };
    let mut mismatches = 0;
    for a in 0..32u8 {
        for b in 0..32u8 {
            if disposition::negotiate(a, b) != oracle(a, b) {
                mismatches += 1;
            }
        }
    }
    let case1 = disposition::negotiate(13, 14) == Some(Protocol::Utp);
    let case2 = disposition::negotiate(5, 31) == Some(Protocol::Tcp);
    let ok = mismatches == 0 && case1 && case2;
    verdict(
        10,
        ok,
        &format!("32×32 table: {mismatches} mismatches; (13,14)→uTP {case1}; (5,31)→TCP {case2}"),
    );
}

#[test]
fn c11_reruns_are_byte_identical_and_queues_conserve_packets() {
    // determinism: same (config, seed) twice → identical bytes on disk
    let cfg = presets::get("desk-homog-default").unwrap();
    let mut identical = true;
    let mut files = 0;
    {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run::run_scenario_to_dir(&cfg, 1, a.path()).unwrap();
        run::run_scenario_to_dir(&cfg, 1, b.path()).unwrap();
        let dir_a = a.path().join(&cfg.name).join("1");
        let dir_b = b.path().join(&cfg.name).join("1");
        let mut names: Vec<_> = std::fs::read_dir(&dir_a)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        for n in names {
            files += 1;
            identical &= std::fs::read(dir_a.join(&n)).unwrap() == std::fs::read(dir_b.join(&n)).unwrap();
        }
    }
    // conservation, on every desk run: what entered a queue either left it,
    // was dropped, or is still sitting there
    let mut conserved = true;
    let mut runs = 0;
    for s in DESK.iter() {
        for r in &s.reports {
            runs += 1;
            conserved &= r.enqueued_pkts == r.served_pkts + r.dropped_pkts + r.queued_pkts_end;
        }
    }
    let ok = identical && files >= 26 && conserved;
    verdict(
        11,
        ok,
        &format!("{files} files byte-identical across reruns; packet conservation exact in {runs}/18 desk runs"),
    );
}
