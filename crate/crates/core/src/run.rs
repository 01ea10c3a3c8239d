//! Whole-run drivers: one scenario/seed to a report, and suites of
//! scenarios × seeds to a results tree on disk.
//!
//! Layout written by the suite driver (and by single runs given an output
//! directory):
//!
//! ```text
//! <out>/<scenario>/<seed>/report.csv        one-row summary
//! <out>/<scenario>/<seed>/completion.csv    per-leecher completion times
//! <out>/<scenario>/<seed>/queue_<peer>.csv  post-dequeue occupancy samples
//! <out>/<scenario>/envelope_completion.csv  across-seed CDF envelope
//! <out>/regression.csv                      TCP-share → mean-queue fit
//! ```
//!
//! Files are written as each run finishes, so a failing scenario leaves the
//! completed ones intact on disk.

use crate::config::ScenarioConfig;
use crate::engine::Engine;
use crate::error::{RunError, SuiteError};
use crate::metrics::{self, LinFit, StepDist};
use crate::report::{self, SimulationReport};
use crate::swarm::Swarm;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

/// Runs one scenario with one seed to completion.
pub fn run_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<SimulationReport, RunError> {
    let mut swarm = Swarm::new(cfg.clone(), seed)?;
    let mut eng = Engine::new();
    let t_end = swarm.run(&mut eng)?;
    Ok(report::build(&mut swarm, eng.stats(), t_end))
}

/// Runs one scenario with one seed and writes its CSV set under
/// `<dir>/<scenario>/<seed>/`.
pub fn run_scenario_to_dir(
    cfg: &ScenarioConfig,
    seed: u64,
    dir: &Path,
) -> Result<SimulationReport, SuiteError> {
    let wrap = |source: RunError| SuiteError::Run {
        scenario: cfg.name.clone(),
        seed,
        source,
    };
    let mut swarm = Swarm::new(cfg.clone(), seed).map_err(wrap)?;
    let mut eng = Engine::new();
    let t_end = swarm.run(&mut eng).map_err(wrap)?;
    let rpt = report::build(&mut swarm, eng.stats(), t_end);

    let run_dir = dir.join(&cfg.name).join(seed.to_string());
    fs::create_dir_all(&run_dir)?;
    let mut w = BufWriter::new(File::create(run_dir.join("report.csv"))?);
    report::write_report_csv(&rpt, &mut w)?;
    let mut w = BufWriter::new(File::create(run_dir.join("completion.csv"))?);
    report::write_completion_csv(&rpt, &mut w)?;
    for (p, peer) in swarm.net.peers.iter().enumerate() {
        let mut w = BufWriter::new(File::create(run_dir.join(format!("queue_{p}.csv")))?);
        report::write_queue_csv(&peer.link.dequeue_log, &mut w)?;
    }
    Ok(rpt)
}

#[derive(Debug)]
pub struct ScenarioSummary {
    pub name: String,
    /// Mean over seeds of the per-run mean completion time.
    pub mean_completion_s: f64,
    pub tcp_data_share_pct: f64,
    pub mean_queue_bytes: f64,
    pub per_seed: Vec<SimulationReport>,
}

#[derive(Debug)]
pub struct SuiteResult {
    pub scenarios: Vec<ScenarioSummary>,
    /// Least squares of mean queue bytes against TCP data share, over the
    /// scenarios that carried any TCP traffic.
    pub regression: Option<LinFit>,
    /// Rank correlation of the same relation over all scenarios.
    pub spearman: f64,
}

fn avg<T, F: Fn(&T) -> f64>(xs: &[T], get: F) -> f64 {
    xs.iter().map(&get).sum::<f64>() / xs.len() as f64
}

/// Runs every scenario with every requested seed. `seeds` overrides each
/// scenario's own list when given; `out` enables the on-disk results tree.
pub fn run_suite(
    scenarios: &[ScenarioConfig],
    seeds: Option<&[u64]>,
    out: Option<&Path>,
) -> Result<SuiteResult, SuiteError> {
    let mut summaries = Vec::new();
    for cfg in scenarios {
        let seed_list: Vec<u64> = match seeds {
            Some(s) => s.to_vec(),
            None => cfg.seeds.clone(),
        };
        let mut per_seed = Vec::new();
        for &seed in &seed_list {
            let rpt = match out {
                Some(dir) => run_scenario_to_dir(cfg, seed, dir)?,
                None => run_scenario(cfg, seed).map_err(|source| SuiteError::Run {
                    scenario: cfg.name.clone(),
                    seed,
                    source,
                })?,
            };
            per_seed.push(rpt);
        }
        if let Some(dir) = out {
            if per_seed.len() >= 2 {
                let dists: Vec<&StepDist> =
                    per_seed.iter().map(|r| &r.completion_dist).collect();
                let env = metrics::envelope_cdf(&dists).expect("≥ 2 reports");
                let mut w = BufWriter::new(File::create(
                    dir.join(&cfg.name).join("envelope_completion.csv"),
                )?);
                report::write_envelope_csv(&env, &mut w)?;
            }
        }
        summaries.push(ScenarioSummary {
            name: cfg.name.clone(),
            mean_completion_s: avg(&per_seed, |r| r.mean_completion_s),
            tcp_data_share_pct: avg(&per_seed, |r| r.tcp_data_share_pct),
            mean_queue_bytes: avg(&per_seed, |r| r.pooled_queue.mean_bytes),
            per_seed,
        });
    }

    let shares: Vec<f64> = summaries.iter().map(|s| s.tcp_data_share_pct).collect();
    let queues: Vec<f64> = summaries.iter().map(|s| s.mean_queue_bytes).collect();
    let spearman = metrics::spearman(&shares, &queues);
    let points: Vec<(f64, f64)> = summaries
        .iter()
        .filter(|s| s.tcp_data_share_pct > 0.0)
        .map(|s| (s.tcp_data_share_pct, s.mean_queue_bytes))
        .collect();
    let regression = metrics::linear_fit(&points).ok();
    if let (Some(dir), Some(fit)) = (out, &regression) {
        let mut w = BufWriter::new(File::create(dir.join("regression.csv"))?);
        report::write_regression_csv(fit, &mut w)?;
    }
    Ok(SuiteResult {
        scenarios: summaries,
        regression,
        spearman,
    })
}
