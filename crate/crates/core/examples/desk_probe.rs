use swarmsim_core::{presets, run::run_scenario};

fn main() {
    for name in presets::desk_suite() {
        let cfg = presets::get(name).unwrap();
        let mut means = Vec::new();
        let mut first = None;
        for &seed in &cfg.seeds {
            let t0 = std::time::Instant::now();
            let r = run_scenario(&cfg, seed).unwrap();
            means.push(r.mean_completion_s);
            if first.is_none() {
                first = Some((r, t0.elapsed()));
            }
        }
        let (r, dt) = first.unwrap();
        let m = means.iter().sum::<f64>() / means.len() as f64;
        println!("== {name}  ({dt:.1?}/run)");
        println!(
            "   E[T] per seed {:?}  mean {:.1}s",
            means.iter().map(|x| (x * 10.0).round() / 10.0).collect::<Vec<_>>(),
            m
        );
        println!(
            "   shares: tcp_data {:.1}%  utp_data {:.1}%  tcp_wire {:.1}%  tcp_peers {:.1}%",
            r.tcp_data_share_pct, r.utp_data_share_pct, r.tcp_wire_share_pct, r.tcp_peer_share_pct
        );
        println!(
            "   queue pooled: busy {:.2} mean {:.0}B {:.1}ms | active(≤P90={:.0}s): busy {:.2} mean {:.1}ms",
            r.pooled_queue.p_busy, r.pooled_queue.mean_bytes, r.pooled_queue.mean_ms,
            r.active_horizon_s, r.active_queue.p_busy, r.active_queue.mean_ms
        );
        for c in &r.per_class {
            println!(
                "   class {:12} n={:2}  E[T] {:?}",
                c.class, c.peers, c.mean_completion_s.map(|x| (x * 10.0).round() / 10.0)
            );
        }
        println!(
            "   dup_app {}  retx {}  dropped {}  events {}",
            r.dup_app_bytes, r.retx_segments, r.dropped_pkts, r.events_dispatched
        );
    }
}
