//! Browser surface: three calls, each returning a JSON string the demo page
//! plots directly. Simulations run synchronously in the calling thread, so
//! the page sticks to desk-scale scenarios (a run is well under a second).
//!
//! Logic lives in plain functions over `Result<String, String>`; the
//! `#[wasm_bindgen]` exports are shims (JsValue cannot exist off-wasm, so
//! host tests target the plain functions).

use wasm_bindgen::prelude::*;

use swarmsim_core::flows::{run_flows, FlowSetup, FlowSpec};
use swarmsim_core::transport::packet::Protocol;
use swarmsim_core::{presets, run};

fn list_presets_json() -> String {
    let desk: Vec<&str> = presets::names()
        .into_iter()
        .filter(|n| n.starts_with("desk-"))
        .collect();
    serde_json::to_string(&desk).expect("names serialize")
}

fn flow_duel_json(
    mbps: f64,
    buffer_secs: f64,
    target_ms: f64,
    n_tcp: u32,
    n_ledbat: u32,
    duration_s: f64,
) -> Result<String, String> {
    if n_tcp + n_ledbat == 0 {
        return Err("at least one flow".into());
    }
    let mut flows = Vec::new();
    for _ in 0..n_tcp {
        flows.push(FlowSpec { proto: Protocol::Tcp, start_s: 0.0 });
    }
    for _ in 0..n_ledbat {
        flows.push(FlowSpec { proto: Protocol::Utp, start_s: 0.0 });
    }
    let setup = FlowSetup {
        bps: (mbps * 1e6) as u64,
        buffer_secs,
        duration_s,
        ledbat_target_us: (target_ms * 1000.0) as u64,
        flows,
        ..FlowSetup::default()
    };
    let report = run_flows(&setup).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[derive(serde::Serialize)]
struct SwarmDemo {
    scenario: String,
    seed: u64,
    /// Sorted leecher completion times: the empirical CDF.
    completion_times_s: Vec<f64>,
    mean_completion_s: f64,
    tcp_data_share_pct: f64,
    utp_data_share_pct: f64,
    queue_mean_ms: f64,
    queue_p_busy: f64,
    per_class: Vec<ClassDemo>,
}

#[derive(serde::Serialize)]
struct ClassDemo {
    class: String,
    peers: u32,
    mean_completion_s: Option<f64>,
}

fn swarm_race_json(preset: &str, seed: u64) -> Result<String, String> {
    let cfg = presets::get(preset)
        .filter(|_| preset.starts_with("desk-"))
        .ok_or_else(|| format!("unknown desk preset: {preset}"))?;
    let r = run::run_scenario(&cfg, seed).map_err(|e| e.to_string())?;
    let mut times: Vec<f64> = r.completions.iter().map(|&(_, _, t)| t).collect();
    times.sort_by(f64::total_cmp);
    let demo = SwarmDemo {
        scenario: r.scenario,
        seed: r.seed,
        completion_times_s: times,
        mean_completion_s: r.mean_completion_s,
        tcp_data_share_pct: r.tcp_data_share_pct,
        utp_data_share_pct: r.utp_data_share_pct,
        queue_mean_ms: r.pooled_queue.mean_ms,
        queue_p_busy: r.pooled_queue.p_busy,
        per_class: r
            .per_class
            .iter()
            .map(|c| ClassDemo {
                class: c.class.clone(),
                peers: c.peers,
                mean_completion_s: c.mean_completion_s,
            })
            .collect(),
    };
    serde_json::to_string(&demo).map_err(|e| e.to_string())
}

/// Desk-scale preset names as a JSON array.
#[wasm_bindgen]
pub fn list_presets() -> String {
    list_presets_json()
}

/// Bottleneck shared by `n_tcp` loss-based and `n_ledbat` delay-based flows;
/// returns the full sampled trajectory (per-flow cwnd, queue, delay
/// estimates) plus shares and utilization.
#[wasm_bindgen]
pub fn flow_duel(
    mbps: f64,
    buffer_secs: f64,
    target_ms: f64,
    n_tcp: u32,
    n_ledbat: u32,
    duration_s: f64,
) -> Result<String, JsValue> {
    flow_duel_json(mbps, buffer_secs, target_ms, n_tcp, n_ledbat, duration_s)
        .map_err(JsValue::from)
}

/// One seeded run of a desk-scale preset, reduced to what the page plots.
#[wasm_bindgen]
pub fn swarm_race(preset: &str, seed: u64) -> Result<String, JsValue> {
    swarm_race_json(preset, seed).map_err(JsValue::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_json_is_a_desk_only_list() {
        let v: Vec<String> = serde_json::from_str(&list_presets_json()).unwrap();
        assert!(v.iter().all(|n| n.starts_with("desk-")));
        assert!(v.contains(&"desk-homog-default".into()));
    }

    #[test]
    fn flow_duel_reports_shares_and_samples() {
        let j = flow_duel_json(1.0, 1.0, 100.0, 1, 1, 10.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["flows"].as_array().unwrap().len(), 2);
        assert!(v["samples"].as_array().unwrap().len() > 50);
        assert!(v["utilization"].as_f64().unwrap() > 0.5);
    }

    #[test]
    fn swarm_race_rejects_non_desk_scale() {
        assert!(swarm_race_json("homog-default", 1).is_err());
        assert!(swarm_race_json("nope", 1).is_err());
    }

    #[test]
    fn swarm_race_returns_a_sorted_cdf() {
        let j = swarm_race_json("desk-homog-utp-c5", 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        let times: Vec<f64> = v["completion_times_s"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        assert_eq!(times.len(), 23);
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
    }
}
