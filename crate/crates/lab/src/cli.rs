//! Argument parsing and dispatch for the `tsc` binary.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use crate::commands::{self, CompareInputs};
use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "tsc", version, about = "Deep Q-learning traffic signal control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write arrival schedules for the selected scenarios.
    GenTraffic(Common),
    /// Train an agent; writes weights, a manifest and per-episode metrics.
    Train(Common),
    /// Evaluate a controller on fresh traffic.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Also write a per-tick trace of the first episode per scenario.
        #[arg(long)]
        trace: bool,
        /// Run one episode on this schedule CSV instead of generated traffic.
        #[arg(long, value_name = "CSV")]
        schedule: Option<PathBuf>,
    },
    /// Compare an agent against the fixed-time baseline.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Eval CSV of the agent (needs --baseline-csv).
        #[arg(long, value_name = "CSV", requires = "baseline_csv")]
        agent_csv: Option<PathBuf>,
        /// Eval CSV of the baseline (needs --agent-csv).
        #[arg(long, value_name = "CSV", requires = "agent_csv")]
        baseline_csv: Option<PathBuf>,
    },
}

/// Options shared by every subcommand. Flags win over the config file, which
/// wins over the built-in defaults.
#[derive(Debug, Default, Args)]
pub struct Common {
    /// `key = value` config file (a run manifest also works).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// turn, time or fixed.
    #[arg(long)]
    pub agent: Option<String>,
    /// low, high, ew, ns or all.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Episode length in seconds.
    #[arg(long)]
    pub episode_length: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Weights file to write (train) or read (eval, compare).
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[arg(long, env = "TSC_OUT_DIR", value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Any config key, as `key=value`; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

const EPSILON_KEYS: [&str; 3] = ["epsilon_hold", "epsilon_fast", "epsilon_end"];

impl Common {
    /// Defaults, then the config file, then flags. Unless epsilon breakpoints
    /// are given explicitly they are stretched to the episode count.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut text = String::new();
        if let Some(path) = &self.config {
            text = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
            cfg.apply_str(&text, &path.display().to_string())?;
        }
        let flags = [
            ("agent", self.agent.clone()),
            ("scenario", self.scenario.clone()),
            ("episodes", self.episodes.map(|v| v.to_string())),
            ("episode_length", self.episode_length.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("model", self.model.as_ref().map(|p| p.display().to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v, &format!("--{}", key.replace('_', "-")))?;
            }
        }
        let mut explicit_epsilon = EPSILON_KEYS
            .iter()
            .any(|k| text.lines().any(|l| l.split('#').next().unwrap_or("").split('=').next().map(str::trim) == Some(*k)));
        for kv in &self.set {
            let Some((k, v)) = kv.split_once('=') else {
                bail!("--set expects KEY=VALUE, got {kv:?}");
            };
            let k = k.trim();
            explicit_epsilon |= EPSILON_KEYS.contains(&k);
            cfg.set(k, v.trim(), "--set")?;
        }
        if !explicit_epsilon {
            cfg.scale_epsilon();
        }
        cfg.finish()?;
        Ok(cfg)
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenTraffic(common) => {
            let cfg = common.resolve()?;
            for p in commands::gen_traffic(&cfg)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Train(common) => {
            let cfg = common.resolve()?;
            let total = cfg.training.episodes;
            let a = commands::train(&cfg, &mut |e| {
                eprintln!(
                    "episode {}/{total} {:<4} eps {:.3} reward {:.1} loss {:.3e}",
                    e.episode,
                    e.scenario.name(),
                    e.epsilon,
                    e.log.total_reward(),
                    e.last_loss,
                );
            })?;
            println!("wrote {} (sha256 {})", a.weights.display(), a.weights_sha256);
            println!("wrote {}", a.manifest.display());
            println!("wrote {}", a.training_csv.display());
        }
        Command::Eval {
            common,
            trace,
            schedule,
        } => {
            let cfg = common.resolve()?;
            if let Some(path) = schedule {
                let (r, t) = commands::eval_schedule(&cfg, &path, trace)?;
                println!("tnr {:.2} tawt {:.2} ewpv {:.2}", r.tnr, r.tawt, r.ewpv);
                if let Some(t) = t {
                    println!("wrote {}", t.display());
                }
            } else {
                let out = commands::eval(&cfg, trace)?;
                for (s, r) in out.means() {
                    println!("{:<4} tnr {:.2} tawt {:.2} ewpv {:.2}", s.name(), r.tnr, r.tawt, r.ewpv);
                }
                println!("wrote {}", out.csv.display());
                for t in out.traces {
                    println!("wrote {}", t.display());
                }
            }
        }
        Command::Compare {
            common,
            agent_csv,
            baseline_csv,
        } => {
            let cfg = common.resolve()?;
            let inputs = match (&agent_csv, &baseline_csv) {
                (Some(agent), Some(baseline)) => CompareInputs::Files { agent, baseline },
                _ => CompareInputs::Evaluate,
            };
            let out = commands::compare(&cfg, inputs)?;
            for w in &out.report.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", crate::io::comparison_table(&out.report));
            for p in [&out.csv, &out.table, &out.by_scenario, &out.overall] {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}
