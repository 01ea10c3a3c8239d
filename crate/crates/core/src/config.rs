//! Scenario description: the TOML schema, validation, and a canonical
//! digest that names a configuration in reports. Unknown keys are hard
//! errors — a typo in a disposition value must not silently run a different
//! experiment.

use crate::error::ConfigError;
use crate::transport::TcpFlavor;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// One replication per seed.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub file: FileCfg,
    #[serde(default)]
    pub link: LinkCfg,
    #[serde(default)]
    pub transport: TransportCfg,
    #[serde(default)]
    pub swarm: SwarmCfg,
    /// Leecher classes; the seed(s) are separate and always disposition 31.
    #[serde(rename = "class")]
    pub classes: Vec<ClassCfg>,
    #[serde(default)]
    pub run: RunCfg,
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileCfg {
    pub size_bytes: u64,
    pub chunk_bytes: u32,
    /// Sub-request unit within a chunk.
    #[serde(default = "default_block")]
    pub block_bytes: u32,
}

fn default_block() -> u32 {
    16 * 1024
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkCfg {
    /// Uplink capacity C in bits per second.
    pub access_bps: u64,
    /// Droptail limit B = C × buffer_secs.
    pub buffer_secs: f64,
    /// One-way propagation outside the access queue.
    pub base_owd_us: u64,
}

impl Default for LinkCfg {
    fn default() -> Self {
        LinkCfg {
            access_bps: 1_000_000,
            buffer_secs: 1.0,
            base_owd_us: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportCfg {
    /// LEDBAT queuing-delay setpoint, µs.
    pub ledbat_target_us: u64,
    pub ledbat_gain: f64,
    pub tcp_flavor: TcpFlavor,
    /// Collapse cwnd to the initial window after ≥ 1 RTO of sender silence.
    pub idle_restart: bool,
    /// When both endpoints attempt both transports, the probability that
    /// the uTP attempt fails and the pair falls back to TCP (the handshake
    /// race is not always won by uTP in practice).
    pub utp_race_failure_prob: f64,
}

impl Default for TransportCfg {
    fn default() -> Self {
        TransportCfg {
            ledbat_target_us: 100_000,
            ledbat_gain: 1.0,
            tcp_flavor: TcpFlavor::NewReno,
            idle_restart: true,
            utp_race_failure_prob: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwarmCfg {
    pub seed_count: u32,
    /// Unchoked peers per uploader: slots − 1 rate-based + 1 optimistic.
    pub upload_slots: u32,
    /// Max outstanding block requests per connection.
    pub pipeline_depth: u32,
    pub rechoke_secs: f64,
    pub optimistic_secs: f64,
    /// Period of the sweep that re-issues expired block requests.
    pub request_scan_secs: f64,
    /// Floor of the adaptive re-request timeout.
    pub request_timeout_floor_secs: f64,
}

impl Default for SwarmCfg {
    fn default() -> Self {
        SwarmCfg {
            seed_count: 1,
            upload_slots: 4,
            pipeline_depth: 5,
            rechoke_secs: 10.0,
            optimistic_secs: 30.0,
            request_scan_secs: 1.0,
            request_timeout_floor_secs: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassCfg {
    pub name: String,
    pub count: u32,
    /// Transport disposition bitmask, 0..=31.
    pub disposition: u8,
    /// Override of the link capacity for peers of this class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uplink_bps: Option<u64>,
    /// Override of the LEDBAT target for peers of this class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledbat_target_us: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunCfg {
    /// Safety cap on virtual time; exceeding it is a run error.
    pub max_sim_secs: f64,
}

impl Default for RunCfg {
    fn default() -> Self {
        RunCfg {
            max_sim_secs: 14_400.0,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.name.is_empty() {
            return bad("name must be non-empty".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must be non-empty".into());
        }
        if self.swarm.seed_count == 0 {
            return bad("seed_count must be ≥ 1: content is unobtainable without a seed".into());
        }
        if self.classes.is_empty() || self.classes.iter().map(|c| c.count).sum::<u32>() == 0 {
            return bad("at least one leecher is required".into());
        }
        for c in &self.classes {
            if c.disposition > 31 {
                return bad(format!(
                    "class '{}': disposition {} out of range 0..=31",
                    c.name, c.disposition
                ));
            }
            if c.uplink_bps == Some(0) {
                return bad(format!("class '{}': uplink_bps must be positive", c.name));
            }
        }
        if self.file.size_bytes == 0 || self.file.chunk_bytes == 0 || self.file.block_bytes == 0 {
            return bad("file sizes must be positive".into());
        }
        if self.file.block_bytes > self.file.chunk_bytes {
            return bad("block_bytes must not exceed chunk_bytes".into());
        }
        if self.link.access_bps == 0 {
            return bad("access_bps must be positive".into());
        }
        if !(self.link.buffer_secs > 0.0) {
            return bad("buffer_secs must be positive".into());
        }
        if !(self.transport.ledbat_gain > 0.0) {
            return bad("ledbat_gain must be positive".into());
        }
        if self.transport.ledbat_target_us == 0 {
            return bad("ledbat_target_us must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.transport.utp_race_failure_prob) {
            return bad("utp_race_failure_prob must be within [0, 1]".into());
        }
        if self.swarm.upload_slots == 0 || self.swarm.pipeline_depth == 0 {
            return bad("upload_slots and pipeline_depth must be ≥ 1".into());
        }
        if !(self.swarm.rechoke_secs > 0.0)
            || !(self.swarm.optimistic_secs > 0.0)
            || !(self.swarm.request_scan_secs > 0.0)
        {
            return bad("swarm timer intervals must be positive".into());
        }
        if !(self.run.max_sim_secs > 0.0) {
            return bad("max_sim_secs must be positive".into());
        }
        Ok(())
    }

    /// SHA-256 over the canonical TOML serialization; identifies the exact
    /// experiment in every report.
    pub fn digest_hex(&self) -> String {
        let canon = self.to_toml_string();
        let hash = Sha256::digest(canon.as_bytes());
        let mut out = String::with_capacity(64);
        for b in hash {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    // --- derived geometry ---

    pub fn buffer_bytes(&self, bps: u64) -> u64 {
        (bps as f64 / 8.0 * self.link.buffer_secs).round() as u64
    }

    pub fn leecher_count(&self) -> u32 {
        self.classes.iter().map(|c| c.count).sum()
    }

    pub fn chunk_count(&self) -> u32 {
        self.file
            .size_bytes
            .div_ceil(u64::from(self.file.chunk_bytes)) as u32
    }

    /// Last chunk may be short.
    pub fn chunk_len(&self, chunk: u32) -> u32 {
        let start = u64::from(chunk) * u64::from(self.file.chunk_bytes);
        debug_assert!(start < self.file.size_bytes);
        (self.file.size_bytes - start).min(u64::from(self.file.chunk_bytes)) as u32
    }

    pub fn blocks_in_chunk(&self, chunk: u32) -> u32 {
        self.chunk_len(chunk).div_ceil(self.file.block_bytes)
    }

    /// Last block of a chunk may be short.
    pub fn block_len(&self, chunk: u32, block: u32) -> u32 {
        let cl = self.chunk_len(chunk);
        let start = block * self.file.block_bytes;
        debug_assert!(start < cl);
        (cl - start).min(self.file.block_bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn round_trip_is_identity() {
        for name in presets::names() {
            let cfg = presets::get(name).unwrap();
            let text = cfg.to_toml_string();
            let back = ScenarioConfig::from_toml_str(&text).unwrap();
            assert_eq!(cfg, back, "round trip broke for {name}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let cfg = presets::get("desk-homog-default").unwrap();
        let mut text = cfg.to_toml_string();
        text.push_str("\nmystery_knob = 3\n");
        let err = ScenarioConfig::from_toml_str(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)), "{err}");
    }

    #[test]
    fn zero_seeds_rejected() {
        let mut cfg = presets::get("desk-homog-default").unwrap();
        cfg.swarm.seed_count = 0;
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn out_of_range_disposition_rejected() {
        let mut cfg = presets::get("desk-homog-default").unwrap();
        cfg.classes[0].disposition = 32;
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn buffer_rule_gives_125_kb_at_1mbps() {
        let cfg = presets::get("desk-homog-default").unwrap();
        assert_eq!(cfg.buffer_bytes(1_000_000), 125_000);
    }

    #[test]
    fn digest_is_stable_and_content_sensitive() {
        let a = presets::get("desk-homog-default").unwrap();
        let b = presets::get("desk-homog-default").unwrap();
        assert_eq!(a.digest_hex(), b.digest_hex());
        let mut c = a.clone();
        c.transport.ledbat_target_us = 25_000;
        assert_ne!(a.digest_hex(), c.digest_hex());
        assert_eq!(a.digest_hex().len(), 64);
    }

    #[test]
    fn chunk_geometry_handles_short_tails() {
        let mut cfg = presets::get("desk-homog-default").unwrap();
        cfg.file.size_bytes = 1_000_000; // not a multiple of 256 KiB
        cfg.file.chunk_bytes = 262_144;
        assert_eq!(cfg.chunk_count(), 4);
        assert_eq!(cfg.chunk_len(0), 262_144);
        assert_eq!(cfg.chunk_len(3), 1_000_000 - 3 * 262_144);
        let last = cfg.chunk_count() - 1;
        let lb = cfg.blocks_in_chunk(last) - 1;
        assert_eq!(
            cfg.block_len(last, lb),
            cfg.chunk_len(last) - lb * cfg.file.block_bytes
        );
    }
}
