//! Subcommand bodies, callable from tests as well as the binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};
use tsc_core::agent::{
    drive, AgentKind, ControllerKind, EpisodeLog, GreedyPolicy, Policy, TrainingEpisode,
    TrainingOutcome,
};
use tsc_core::metrics::{evaluate, evaluation_seeds, ComparisonReport, Controller, MetricsReport};
use tsc_core::nn::Network;
use tsc_core::rng::Xoshiro256;
use tsc_core::traffic::{generate_schedule, ArrivalSchedule, ScenarioName};

use crate::config::RunConfig;
use crate::io::{self, EvalRows, Trace};
use crate::model;

pub const ARTIFACT_VERSION: u32 = 1;

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

/// Writes one schedule CSV per selected scenario, generated from `seed`.
pub fn gen_traffic(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    ensure_dir(&cfg.out)?;
    let mut paths = Vec::new();
    for name in cfg.scenario.scenarios() {
        let schedule = generate_schedule(&cfg.training.scenario(name), cfg.training.seed)?;
        let path = cfg.out.join(format!("schedule_{}.csv", name.name()));
        io::write_schedule(&path, &schedule)?;
        paths.push(path);
    }
    Ok(paths)
}

pub struct TrainArtifacts {
    pub weights: PathBuf,
    pub training_csv: PathBuf,
    pub manifest: PathBuf,
    pub weights_sha256: String,
    pub log_hash: String,
    pub outcome: TrainingOutcome,
}

fn weights_path(cfg: &RunConfig, kind: AgentKind) -> PathBuf {
    cfg.model
        .clone()
        .unwrap_or_else(|| cfg.out.join(format!("{}.weights", kind.name())))
}

/// Hash over every episode log of a run.
pub fn log_hash(episodes: &[TrainingEpisode]) -> String {
    let mut h = Sha256::new();
    for e in episodes {
        h.update(e.log.digest().to_le_bytes());
    }
    hex::encode(h.finalize())
}

pub fn train(cfg: &RunConfig, progress: &mut dyn FnMut(&TrainingEpisode)) -> Result<TrainArtifacts> {
    let Some(kind) = cfg.agent_kind() else {
        bail!("train needs --agent turn or --agent time");
    };
    let mut training = cfg.training.clone();
    training.agent = kind;
    ensure_dir(&cfg.out)?;
    let weights = weights_path(cfg, kind);
    if let Some(parent) = weights.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }

    let outcome = tsc_core::agent::train(&training, progress)?;

    let mut schedules = Sha256::new();
    for e in &outcome.episodes {
        let s = generate_schedule(&training.scenario(e.scenario), e.traffic_seed)?;
        schedules.update(io::schedule_csv(&s)?);
    }
    let weights_sha256 = model::save(&outcome.network, &weights)?;
    let training_csv = cfg.out.join(format!("training_{}.csv", kind.name()));
    io::write_training(&training_csv, &outcome.episodes)?;
    let log_hash = log_hash(&outcome.episodes);

    let mut header = BTreeMap::new();
    header.insert("manifest.version".into(), ARTIFACT_VERSION.to_string());
    header.insert("manifest.command".into(), "train".into());
    header.insert("manifest.weights_sha256".into(), weights_sha256.clone());
    header.insert("manifest.schedule_sha256".into(), hex::encode(schedules.finalize()));
    header.insert("manifest.log_hash".into(), log_hash.clone());
    let mut resolved = cfg.clone();
    resolved.controller = kind.into();
    let manifest = PathBuf::from(format!("{}.manifest", weights.display()));
    io::write_key_values(&manifest, &header, &resolved.to_text())?;

    Ok(TrainArtifacts {
        weights,
        training_csv,
        manifest,
        weights_sha256,
        log_hash,
        outcome,
    })
}

fn load_controller(cfg: &RunConfig) -> Result<Option<(AgentKind, Network)>> {
    let Some(kind) = cfg.agent_kind() else {
        return Ok(None);
    };
    let Some(path) = &cfg.model else {
        bail!("evaluating the {} agent needs --model", kind.name());
    };
    Ok(Some((kind, model::load(path, Some(kind))?)))
}

/// Runs a single episode on a given schedule, feeding every tick to `trace`.
pub fn run_episode(
    cfg: &RunConfig,
    agent: Option<(AgentKind, &Network)>,
    schedule: &ArrivalSchedule,
    seed: u64,
    trace: &mut Trace,
) -> Result<EpisodeLog> {
    let setup = cfg.training.setup();
    let world = cfg.training.world(seed);
    let mut observer = |w: &tsc_core::sim::World| trace.record(w);
    let log = match agent {
        None => drive(ControllerKind::Fixed, world, &mut Fixed, schedule, &setup, &mut observer)?,
        Some((kind, net)) => {
            let mut rng = Xoshiro256::seed_from_u64(seed);
            let mut policy = GreedyPolicy {
                net,
                epsilon: 0.0,
                rng: &mut rng,
                experiences: Vec::new(),
            };
            drive(kind.into(), world, &mut policy, schedule, &setup, &mut observer)?
        }
    };
    Ok(log)
}

struct Fixed;

impl Policy for Fixed {
    fn act(&mut self, _: &[f64]) -> tsc_core::Result<usize> {
        Ok(0)
    }
    fn observe(&mut self, _: tsc_core::agent::Experience) -> tsc_core::Result<()> {
        Ok(())
    }
}

pub struct EvalOutcome {
    pub csv: PathBuf,
    pub traces: Vec<PathBuf>,
    pub reports: Vec<(ScenarioName, Vec<MetricsReport>)>,
}

impl EvalOutcome {
    pub fn means(&self) -> Vec<(ScenarioName, MetricsReport)> {
        self.reports
            .iter()
            .map(|(s, r)| (*s, MetricsReport::mean(r)))
            .collect()
    }
}

fn evaluate_all(
    cfg: &RunConfig,
    agent: Option<(AgentKind, &Network)>,
) -> Result<Vec<(ScenarioName, Vec<u64>, Vec<MetricsReport>)>> {
    let controller = match agent {
        None => Controller::Fixed,
        Some((kind, net)) => Controller::Agent(kind, net),
    };
    let setup = cfg.training.setup();
    let mut out = Vec::new();
    for name in cfg.scenario.scenarios() {
        let seeds = evaluation_seeds(cfg.eval_seed, name, cfg.eval_episodes);
        let reports = evaluate(
            controller,
            &cfg.training.scenario(name),
            &seeds,
            &setup,
            &|s| cfg.training.world(s),
        )?;
        out.push((name, seeds, reports));
    }
    Ok(out)
}

/// Evaluates the configured controller on fresh traffic for each selected
/// scenario; writes per-episode and mean rows, plus a per-tick trace of each
/// scenario's first episode when `trace` is set.
pub fn eval(cfg: &RunConfig, trace: bool) -> Result<EvalOutcome> {
    ensure_dir(&cfg.out)?;
    let loaded = load_controller(cfg)?;
    let agent = loaded.as_ref().map(|(k, n)| (*k, n));
    let results = evaluate_all(cfg, agent)?;
    let label = cfg.controller.name();
    let csv = cfg.out.join(format!("eval_{label}.csv"));
    let groups: Vec<EvalRows<'_>> = results
        .iter()
        .map(|(name, seeds, reports)| EvalRows {
            scenario: name.name(),
            seeds,
            reports,
        })
        .collect();
    io::write_eval(&csv, &groups)?;

    let mut traces = Vec::new();
    if trace {
        for (name, seeds, _) in &results {
            let schedule = generate_schedule(&cfg.training.scenario(*name), seeds[0])?;
            let mut t = Trace::default();
            run_episode(cfg, agent, &schedule, seeds[0], &mut t)?;
            let path = cfg.out.join(format!("trace_{label}_{}.csv", name.name()));
            t.write(&path)?;
            traces.push(path);
        }
    }
    Ok(EvalOutcome {
        csv,
        traces,
        reports: results.into_iter().map(|(n, _, r)| (n, r)).collect(),
    })
}

/// Evaluates on a schedule file instead of generated traffic.
pub fn eval_schedule(cfg: &RunConfig, schedule_path: &Path, trace: bool) -> Result<(MetricsReport, Option<PathBuf>)> {
    ensure_dir(&cfg.out)?;
    let schedule = io::read_schedule(schedule_path)?;
    let loaded = load_controller(cfg)?;
    let agent = loaded.as_ref().map(|(k, n)| (*k, n));
    let mut t = Trace::default();
    let log = run_episode(cfg, agent, &schedule, cfg.eval_seed, &mut t)?;
    let report = MetricsReport::from_log(&log);
    let label = cfg.controller.name();
    let csv = cfg.out.join(format!("eval_{label}.csv"));
    let seeds = [cfg.eval_seed];
    io::write_eval(
        &csv,
        &[EvalRows {
            scenario: "file",
            seeds: &seeds,
            reports: &[report],
        }],
    )?;
    let trace_path = if trace {
        let p = cfg.out.join(format!("trace_{label}_file.csv"));
        t.write(&p)?;
        Some(p)
    } else {
        None
    };
    Ok((report, trace_path))
}

pub struct CompareOutcome {
    pub report: ComparisonReport,
    pub csv: PathBuf,
    pub table: PathBuf,
    pub by_scenario: PathBuf,
    pub overall: PathBuf,
}

/// Where the two sides of a comparison come from.
pub enum CompareInputs<'a> {
    /// Evaluate the configured model and the fixed baseline now.
    Evaluate,
    /// Mean rows of two existing eval CSVs.
    Files { agent: &'a Path, baseline: &'a Path },
}

pub fn compare(cfg: &RunConfig, inputs: CompareInputs<'_>) -> Result<CompareOutcome> {
    ensure_dir(&cfg.out)?;
    let (label, pairs) = match inputs {
        CompareInputs::Files { agent, baseline } => {
            let a = io::read_eval_means(agent)?;
            let b: BTreeMap<String, MetricsReport> = io::read_eval_means(baseline)?.into_iter().collect();
            let mut pairs = Vec::new();
            for (scenario, report) in a {
                let Some(base) = b.get(&scenario) else {
                    bail!("baseline file {} has no mean row for scenario {scenario}", baseline.display());
                };
                pairs.push((scenario, report, *base));
            }
            (cfg.controller.name().to_string(), pairs)
        }
        CompareInputs::Evaluate => {
            let Some((kind, net)) = load_controller(cfg)? else {
                bail!("compare needs a learning agent (--agent turn|time with --model) or two eval CSVs");
            };
            let agent = evaluate_all(cfg, Some((kind, &net)))?;
            let base = evaluate_all(cfg, None)?;
            let pairs = agent
                .into_iter()
                .zip(base)
                .map(|((n, _, a), (_, _, b))| {
                    (n.name().to_string(), MetricsReport::mean(&a), MetricsReport::mean(&b))
                })
                .collect();
            (kind.name().to_string(), pairs)
        }
    };
    let mut report = ComparisonReport::default();
    for (scenario, a, b) in &pairs {
        report.add(scenario, a, b);
    }
    let csv = cfg.out.join(format!("comparison_{label}.csv"));
    let table = cfg.out.join(format!("comparison_{label}.txt"));
    let by_scenario = cfg.out.join(format!("improvement_by_scenario_{label}.csv"));
    let overall = cfg.out.join(format!("improvement_overall_{label}.csv"));
    io::write_comparison(&csv, &report)?;
    std::fs::write(&table, io::comparison_table(&report))
        .with_context(|| format!("cannot write {}", table.display()))?;
    io::write_by_scenario(&by_scenario, &report)?;
    io::write_overall(&overall, &label, &report)?;
    Ok(CompareOutcome {
        report,
        csv,
        table,
        by_scenario,
        overall,
    })
}
