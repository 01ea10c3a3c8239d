//! `swarmsim` — runs swarm scenarios from presets or TOML files and writes
//! the CSV result tree. Exit codes: 0 success, 2 bad config, 3 failed run.
//! Failures print one JSON object to stderr.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use swarmsim_core::error::SuiteError;
use swarmsim_core::report::SimulationReport;
use swarmsim_core::{presets, run, ScenarioConfig};

#[derive(Parser)]
#[command(name = "swarmsim", version, about = "Swarm transport simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario once and print a summary line.
    Run {
        /// Preset name (see `presets list`) or path to a TOML scenario file.
        config: String,
        /// Seed for this run; defaults to the first seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Write report.csv, completion.csv and queue_<peer>.csv under
        /// <OUT>/<scenario>/<seed>/.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several scenarios across seeds, with per-scenario completion
    /// envelopes and the cross-scenario share-vs-queue regression.
    Suite {
        /// Preset names or TOML paths, at least one.
        #[arg(required = true)]
        configs: Vec<String>,
        /// Comma-separated seed list; overrides each config's own seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Root of the results tree (required: a suite exists to be kept).
        #[arg(long)]
        out: PathBuf,
    },
    /// The built-in scenario library.
    Presets {
        #[command(subcommand)]
        cmd: PresetsCmd,
    },
    /// Parse and validate a scenario, printing its name and digest.
    Validate { config: String },
}

#[derive(Subcommand)]
enum PresetsCmd {
    /// Print every preset name, one per line.
    List,
}

enum Failure {
    Config(String),
    Run {
        scenario: Option<String>,
        seed: Option<u64>,
        message: String,
    },
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Run { .. } | Failure::Io(_) => 3,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Failure::Config(m) => serde_json::json!({"error": "config", "message": m}),
            Failure::Run { scenario, seed, message } => serde_json::json!({
                "error": "run", "scenario": scenario, "seed": seed, "message": message,
            }),
            Failure::Io(m) => serde_json::json!({"error": "io", "message": m}),
        }
    }
}

impl From<SuiteError> for Failure {
    fn from(e: SuiteError) -> Self {
        match e {
            SuiteError::Run { scenario, seed, source } => Failure::Run {
                scenario: Some(scenario),
                seed: Some(seed),
                message: source.to_string(),
            },
            SuiteError::Io(e) => Failure::Io(e.to_string()),
        }
    }
}

fn load_config(arg: &str) -> Result<ScenarioConfig, Failure> {
    if let Some(cfg) = presets::get(arg) {
        return Ok(cfg);
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| Failure::Config(format!("{arg}: not a preset and not readable: {e}")))?;
    ScenarioConfig::from_toml_str(&text).map_err(|e| Failure::Config(format!("{arg}: {e}")))
}

fn summary_line(r: &SimulationReport) -> String {
    format!(
        "{} seed {}: E[T] {:.1}s ± {:.1}s, last {:.1}s, tcp/utp data {:.1}%/{:.1}%, queue {:.0} ms (busy {:.2})",
        r.scenario,
        r.seed,
        r.mean_completion_s,
        r.std_completion_s,
        r.duration_s,
        r.tcp_data_share_pct,
        r.utp_data_share_pct,
        r.pooled_queue.mean_ms,
        r.pooled_queue.p_busy,
    )
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Run { config, seed, out } => {
            let cfg = load_config(&config)?;
            let seed = seed.unwrap_or(cfg.seeds[0]);
            let rpt = match &out {
                Some(dir) => run::run_scenario_to_dir(&cfg, seed, dir).map_err(Failure::from)?,
                None => run::run_scenario(&cfg, seed).map_err(|e| Failure::Run {
                    scenario: Some(cfg.name.clone()),
                    seed: Some(seed),
                    message: e.to_string(),
                })?,
            };
            println!("{}", summary_line(&rpt));
            if let Some(dir) = out {
                println!("results in {}", dir.join(&cfg.name).join(seed.to_string()).display());
            }
            Ok(())
        }
        Cmd::Suite { configs, seeds, out } => {
            let cfgs = configs
                .iter()
                .map(|c| load_config(c))
                .collect::<Result<Vec<_>, _>>()?;
            let res = run::run_suite(&cfgs, seeds.as_deref(), Some(&out))?;
            for s in &res.scenarios {
                println!(
                    "{}: E[T] mean {:.1}s over {} seeds, tcp data {:.1}%, mean queue {:.0} B",
                    s.name,
                    s.mean_completion_s,
                    s.per_seed.len(),
                    s.tcp_data_share_pct,
                    s.mean_queue_bytes,
                );
            }
            match &res.regression {
                Some(fit) => println!(
                    "queue-vs-share regression: slope {:.1} B/pp, r² {:.3}, spearman {:.2}",
                    fit.slope, fit.r_squared, res.spearman
                ),
                None => println!(
                    "queue-vs-share regression: skipped (fewer than 2 scenarios carry TCP traffic)"
                ),
            }
            println!("results in {}", out.display());
            Ok(())
        }
        Cmd::Presets { cmd: PresetsCmd::List } => {
            for name in presets::names() {
                println!("{name}");
            }
            Ok(())
        }
        Cmd::Validate { config } => {
            let cfg = load_config(&config)?;
            println!(
                "ok: {} ({} classes, {} leechers, {} seeds, digest {})",
                cfg.name,
                cfg.classes.len(),
                cfg.leecher_count(),
                cfg.seeds.len(),
                cfg.digest_hex(),
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code())
        }
    }
}
