//! Episode metrics and baseline comparisons.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::agent::{drive, AgentKind, ControllerKind, EpisodeLog, EpisodeSetup, GreedyPolicy};
use crate::error::{Error, Result};
use crate::nn::Network;
use crate::rng::Xoshiro256;
use crate::sim::{Direction, World};
use crate::traffic::{generate_schedule, ScenarioConfig, ScenarioName};

/// Sum of the negative rewards.
pub fn tnr(log: &EpisodeLog) -> f64 {
    log.decisions.iter().fold(0.0, |a, d| a + d.reward.min(0.0))
}

/// Sum of accumulated wait over decision steps.
pub fn tawt(log: &EpisodeLog) -> f64 {
    log.decisions.iter().fold(0.0, |a, d| a + d.awt)
}

/// Mean final wait over every scheduled vehicle.
pub fn ewpv(log: &EpisodeLog) -> Result<f64> {
    if log.vehicle_count == 0 {
        return Err(Error::NoVehicles);
    }
    Ok(log.final_total_wait / log.vehicle_count as f64)
}

/// Mean per-tick queue length on `approach`.
pub fn aql(log: &EpisodeLog, approach: Direction) -> f64 {
    if log.queue_samples.is_empty() {
        return 0.0;
    }
    let total: usize = log.queue_samples.iter().map(|q| q[approach.index()]).sum();
    total as f64 / log.queue_samples.len() as f64
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MetricsReport {
    pub tnr: f64,
    pub tawt: f64,
    pub ewpv: f64,
    /// Per approach, N, W, E, S.
    pub aql: [f64; 4],
}

/// The seven reported metrics in table order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Tnr,
    Tawt,
    Ewpv,
    AqlE,
    AqlW,
    AqlN,
    AqlS,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Tnr,
        Metric::Tawt,
        Metric::Ewpv,
        Metric::AqlE,
        Metric::AqlW,
        Metric::AqlN,
        Metric::AqlS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Tnr => "tnr",
            Metric::Tawt => "tawt",
            Metric::Ewpv => "ewpv",
            Metric::AqlE => "aql_E",
            Metric::AqlW => "aql_W",
            Metric::AqlN => "aql_N",
            Metric::AqlS => "aql_S",
        }
    }
}

impl MetricsReport {
    /// An episode without vehicles reports an ewpv of 0.
    pub fn from_log(log: &EpisodeLog) -> Self {
        Self {
            tnr: tnr(log),
            tawt: tawt(log),
            ewpv: ewpv(log).unwrap_or(0.0),
            aql: Direction::ALL.map(|d| aql(log, d)),
        }
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Tnr => self.tnr,
            Metric::Tawt => self.tawt,
            Metric::Ewpv => self.ewpv,
            Metric::AqlE => self.aql[Direction::East.index()],
            Metric::AqlW => self.aql[Direction::West.index()],
            Metric::AqlN => self.aql[Direction::North.index()],
            Metric::AqlS => self.aql[Direction::South.index()],
        }
    }

    pub fn set(&mut self, metric: Metric, value: f64) {
        match metric {
            Metric::Tnr => self.tnr = value,
            Metric::Tawt => self.tawt = value,
            Metric::Ewpv => self.ewpv = value,
            Metric::AqlE => self.aql[Direction::East.index()] = value,
            Metric::AqlW => self.aql[Direction::West.index()] = value,
            Metric::AqlN => self.aql[Direction::North.index()] = value,
            Metric::AqlS => self.aql[Direction::South.index()] = value,
        }
    }

    /// Values in [`Metric::ALL`] order.
    pub fn values(&self) -> [f64; 7] {
        Metric::ALL.map(|m| self.get(m))
    }

    /// Per-metric arithmetic mean. Empty input gives all zeros.
    pub fn mean(reports: &[MetricsReport]) -> Self {
        let mut out = Self::default();
        if reports.is_empty() {
            return out;
        }
        let n = reports.len() as f64;
        for m in Metric::ALL {
            out.set(m, reports.iter().map(|r| r.get(m)).sum::<f64>() / n);
        }
        out
    }
}

/// Percent improvement of `agent` over `base`, positive when better.
/// `None` when the baseline value is zero.
pub fn improvement(metric: Metric, agent: f64, base: f64) -> Option<f64> {
    if base == 0.0 {
        return None;
    }
    Some(match metric {
        Metric::Tnr => 100.0 * (base.abs() - agent.abs()) / base.abs(),
        _ => 100.0 * (base - agent) / base,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImprovementEntry {
    pub metric: Metric,
    pub agent: f64,
    pub baseline: f64,
    pub percent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioComparison {
    pub scenario: String,
    pub entries: [ImprovementEntry; 7],
}

impl ScenarioComparison {
    /// Mean over the defined entries.
    pub fn mean_improvement(&self) -> Option<f64> {
        mean_defined(self.entries.iter().map(|e| e.percent))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComparisonReport {
    pub scenarios: Vec<ScenarioComparison>,
    /// One line per undefined entry.
    pub warnings: Vec<String>,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

impl ComparisonReport {
    pub fn add(&mut self, scenario: &str, agent: &MetricsReport, base: &MetricsReport) {
        let entries = Metric::ALL.map(|m| {
            let (a, b) = (agent.get(m), base.get(m));
            let percent = improvement(m, a, b);
            if percent.is_none() {
                self.warnings.push(format!(
                    "{scenario}: baseline {} is zero, improvement undefined",
                    m.name()
                ));
            }
            ImprovementEntry {
                metric: m,
                agent: a,
                baseline: b,
                percent,
            }
        });
        self.scenarios.push(ScenarioComparison {
            scenario: scenario.into(),
            entries,
        });
    }

    /// Mean improvement of `metric` over scenarios.
    pub fn metric_mean(&self, metric: Metric) -> Option<f64> {
        mean_defined(
            self.scenarios
                .iter()
                .map(|s| s.entries.iter().find(|e| e.metric == metric).and_then(|e| e.percent)),
        )
    }

    /// Mean of the per-scenario mean improvements.
    pub fn aggregate(&self) -> Option<f64> {
        mean_defined(self.scenarios.iter().map(ScenarioComparison::mean_improvement))
    }
}

/// A controller ready for evaluation; learned controllers act greedily.
#[derive(Clone, Copy, Debug)]
pub enum Controller<'a> {
    Fixed,
    Agent(AgentKind, &'a Network),
}

impl Controller<'_> {
    pub fn kind(&self) -> ControllerKind {
        match self {
            Controller::Fixed => ControllerKind::Fixed,
            Controller::Agent(k, _) => (*k).into(),
        }
    }
}

/// Runs one episode per seed on freshly generated traffic and reports each.
/// `make_world` builds the starting world for a seed.
pub fn evaluate(
    controller: Controller<'_>,
    scenario: &ScenarioConfig,
    seeds: &[u64],
    setup: &EpisodeSetup,
    make_world: &dyn Fn(u64) -> World,
) -> Result<Vec<MetricsReport>> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("evaluation needs at least one episode".into()));
    }
    let mut reports = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let schedule = generate_schedule(scenario, seed)?;
        let log = match controller {
            Controller::Fixed => {
                crate::agent::run_fixed_baseline(make_world(seed), &schedule, setup)?
            }
            Controller::Agent(kind, net) => {
                kind.check_network(net)?;
                let mut rng = Xoshiro256::seed_from_u64(seed);
                let mut policy = GreedyPolicy {
                    net,
                    epsilon: 0.0,
                    rng: &mut rng,
                    experiences: Vec::new(),
                };
                drive(kind.into(), make_world(seed), &mut policy, &schedule, setup, &mut ())?
            }
        };
        reports.push(MetricsReport::from_log(&log));
    }
    Ok(reports)
}

/// Evaluation seeds for a scenario, derived from a root seed.
pub fn evaluation_seeds(root: u64, scenario: ScenarioName, episodes: usize) -> Vec<u64> {
    let streams = crate::rng::SeedStreams::new(root);
    (0..episodes as u64)
        .map(|i| streams.seed(SEED_NAMES[scenario as usize], i))
        .collect()
}

const SEED_NAMES: [&str; 4] = [
    "evaluation/low",
    "evaluation/high",
    "evaluation/ew",
    "evaluation/ns",
];
