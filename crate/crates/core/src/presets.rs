//! Named scenario presets.
//!
//! Two scales share every parameter except population and file size:
//!
//! * `desk-*` — 1 seed + 23 leechers, 10 MiB file in 256 KiB chunks.
//!   Runs in seconds; carries the acceptance checks.
//! * full scale — 1 seed + 75 leechers, 100 MiB file in 1 MiB chunks.
//!
//! Population mixes: `homog-default` (all disposition 31), `homog-utp`
//! (all 10), `homog-tcp` (all 5), and `heter-<T>-<U>` with T% of leechers
//! on disposition 13 (TCP-preferring) and U% on 14 (uTP-preferring).
//! `-c2` / `-c5` suffixes raise the access capacity to 2 / 5 Mbps.

use crate::config::{ClassCfg, FileCfg, LinkCfg, ScenarioConfig};

const MIB: u64 = 1024 * 1024;

fn class(name: &str, count: u32, disposition: u8) -> ClassCfg {
    ClassCfg {
        name: name.to_string(),
        count,
        disposition,
        uplink_bps: None,
        ledbat_target_us: None,
    }
}

fn base(name: &str, desk: bool, mbps: u64, classes: Vec<ClassCfg>) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        seeds: vec![1, 2, 3],
        file: if desk {
            FileCfg {
                size_bytes: 10 * MIB,
                chunk_bytes: 256 * 1024,
                block_bytes: 16 * 1024,
            }
        } else {
            FileCfg {
                size_bytes: 100 * MIB,
                chunk_bytes: 1024 * 1024,
                block_bytes: 16 * 1024,
            }
        },
        link: LinkCfg {
            access_bps: mbps * 1_000_000,
            ..LinkCfg::default()
        },
        transport: Default::default(),
        swarm: Default::default(),
        classes,
        run: Default::default(),
    }
}

/// Leecher split for `heter-<T>-<U>`: T% on disposition 13, rest on 14,
/// with the 13-class rounded to the nearest peer.
fn heter_classes(total: u32, tcp_pct: u32) -> Vec<ClassCfg> {
    let tcp = ((total * tcp_pct) as f64 / 100.0).round() as u32;
    vec![
        class("prefer-tcp", tcp, 13),
        class("prefer-utp", total - tcp, 14),
    ]
}

fn build(name: &str) -> Option<ScenarioConfig> {
    let desk = name.starts_with("desk-");
    let rest = name.strip_prefix("desk-").unwrap_or(name);
    let (rest, mbps) = match rest.strip_suffix("-c2") {
        Some(r) => (r, 2),
        None => match rest.strip_suffix("-c5") {
            Some(r) => (r, 5),
            None => (rest, 1),
        },
    };
    let leechers = if desk { 23 } else { 75 };
    let classes = match rest {
        "homog-default" => vec![class("default", leechers, 31)],
        "homog-utp" => vec![class("utp-only", leechers, 10)],
        "homog-tcp" => vec![class("tcp-only", leechers, 5)],
        "heter-75-25" => heter_classes(leechers, 75),
        "heter-50-50" => heter_classes(leechers, 50),
        "heter-25-75" => heter_classes(leechers, 25),
        _ => return None,
    };
    Some(base(name, desk, mbps, classes))
}

/// All preset names, stable order: desk scale first.
pub fn names() -> Vec<&'static str> {
    vec![
        "desk-homog-default",
        "desk-homog-utp",
        "desk-homog-tcp",
        "desk-homog-default-c2",
        "desk-homog-utp-c2",
        "desk-homog-tcp-c2",
        "desk-homog-default-c5",
        "desk-homog-utp-c5",
        "desk-homog-tcp-c5",
        "desk-heter-75-25",
        "desk-heter-50-50",
        "desk-heter-25-75",
        "homog-default",
        "homog-utp",
        "homog-tcp",
        "homog-default-c2",
        "homog-utp-c2",
        "homog-tcp-c2",
        "homog-default-c5",
        "homog-utp-c5",
        "homog-tcp-c5",
        "heter-75-25",
        "heter-50-50",
        "heter-25-75",
    ]
}

/// The six desk-scale scenarios the acceptance suite sweeps.
pub fn desk_suite() -> Vec<&'static str> {
    vec![
        "desk-homog-default",
        "desk-homog-utp",
        "desk-homog-tcp",
        "desk-heter-75-25",
        "desk-heter-50-50",
        "desk-heter-25-75",
    ]
}

pub fn get(name: &str) -> Option<ScenarioConfig> {
    if !names().contains(&name) {
        return None;
    }
    let cfg = build(name)?;
    debug_assert!(cfg.validate().is_ok());
    Some(cfg)
}
