//! CSV and text artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use tsc_core::agent::TrainingEpisode;
use tsc_core::metrics::{ComparisonReport, Metric, MetricsReport};
use tsc_core::sim::{Direction, Movement, World};
use tsc_core::traffic::{Arrival, ArrivalSchedule};

pub const SCHEDULE_HEADER: [&str; 4] = ["depart_time", "origin", "movement", "destination"];
pub const TRACE_HEADER: [&str; 7] = ["tick", "phase", "ql_n", "ql_w", "ql_e", "ql_s", "awt"];
pub const TRAINING_HEADER: [&str; 10] = [
    "episode",
    "epsilon",
    "total_reward",
    "tnr",
    "tawt",
    "ewpv",
    "aql_E",
    "aql_W",
    "aql_N",
    "aql_S",
];
pub const EVAL_HEADER: [&str; 10] = [
    "scenario", "episode", "tnr", "tawt", "ewpv", "aql_E", "aql_W", "aql_N", "aql_S", "seed",
];
pub const COMPARISON_HEADER: [&str; 5] = ["scenario", "metric", "agent", "baseline", "improvement_pct"];

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}

fn metric_fields(r: &MetricsReport) -> Vec<String> {
    r.values().iter().map(f64::to_string).collect()
}

pub fn schedule_csv(schedule: &ArrivalSchedule) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SCHEDULE_HEADER)?;
    for a in &schedule.entries {
        w.write_record([
            a.depart_time.to_string().as_str(),
            a.origin.name(),
            a.movement.name(),
            a.destination.name(),
        ])?;
    }
    Ok(w.into_inner().map_err(|e| anyhow!("{e}"))?)
}

pub fn write_schedule(path: &Path, schedule: &ArrivalSchedule) -> Result<()> {
    std::fs::write(path, schedule_csv(schedule)?)
        .with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_schedule(path: &Path) -> Result<ArrivalSchedule> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    if r.headers()?.iter().ne(SCHEDULE_HEADER) {
        bail!("{}: expected header {}", path.display(), SCHEDULE_HEADER.join(","));
    }
    let mut entries = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let field = |k: usize| rec.get(k).ok_or_else(|| anyhow!("{}:{row}: missing field", path.display()));
        let depart_time: u32 = field(0)?
            .parse()
            .with_context(|| format!("{}:{row}: bad depart_time", path.display()))?;
        let dir = |s: &str| Direction::parse(s).ok_or_else(|| anyhow!("{}:{row}: bad direction {s:?}", path.display()));
        let origin = dir(field(1)?)?;
        let movement = Movement::parse(field(2)?)
            .ok_or_else(|| anyhow!("{}:{row}: bad movement", path.display()))?;
        let destination = dir(field(3)?)?;
        if origin.exit_for(movement) != destination {
            bail!("{}:{row}: {} {} does not lead to {}", path.display(), origin.name(), movement.name(), destination.name());
        }
        if entries.last().is_some_and(|a: &Arrival| a.depart_time > depart_time) {
            bail!("{}:{row}: departures must be sorted by time", path.display());
        }
        entries.push(Arrival {
            depart_time,
            origin,
            movement,
            destination,
        });
    }
    Ok(ArrivalSchedule { entries })
}

/// Per-tick rows for the trace CSV.
#[derive(Debug, Default)]
pub struct Trace {
    pub rows: Vec<(u64, u8, [usize; 4], f64)>,
}

impl Trace {
    pub fn record(&mut self, world: &World) {
        self.rows.push((
            world.ticks(),
            world.phase().id,
            world.queue_lengths(),
            world.accumulated_wait(),
        ));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = writer(path)?;
        w.write_record(TRACE_HEADER)?;
        for (tick, phase, q, awt) in &self.rows {
            w.write_record([
                tick.to_string(),
                phase.to_string(),
                q[0].to_string(),
                q[1].to_string(),
                q[2].to_string(),
                q[3].to_string(),
                awt.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_training(path: &Path, episodes: &[TrainingEpisode]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRAINING_HEADER)?;
    for e in episodes {
        let r = MetricsReport::from_log(&e.log);
        let mut row = vec![
            e.episode.to_string(),
            e.epsilon.to_string(),
            e.log.total_reward().to_string(),
        ];
        row.extend(metric_fields(&r));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One scenario's per-episode reports with their seeds.
pub struct EvalRows<'a> {
    pub scenario: &'a str,
    pub seeds: &'a [u64],
    pub reports: &'a [MetricsReport],
}

pub fn write_eval(path: &Path, groups: &[EvalRows<'_>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(EVAL_HEADER)?;
    for g in groups {
        for (i, (r, seed)) in g.reports.iter().zip(g.seeds).enumerate() {
            let mut row = vec![g.scenario.to_string(), (i + 1).to_string()];
            row.extend(metric_fields(r));
            row.push(seed.to_string());
            w.write_record(&row)?;
        }
        let mut row = vec![g.scenario.to_string(), "mean".to_string()];
        row.extend(metric_fields(&MetricsReport::mean(g.reports)));
        row.push(String::new());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean rows of an eval CSV, keyed by scenario in file order.
pub fn read_eval_means(path: &Path) -> Result<Vec<(String, MetricsReport)>> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    if r.headers()?.iter().ne(EVAL_HEADER) {
        bail!("{}: not an eval CSV (expected header {})", path.display(), EVAL_HEADER.join(","));
    }
    let mut out: Vec<(String, MetricsReport)> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.get(1) != Some("mean") {
            continue;
        }
        let mut report = MetricsReport::default();
        for (k, m) in Metric::ALL.iter().enumerate() {
            let v: f64 = rec
                .get(2 + k)
                .unwrap_or("")
                .parse()
                .with_context(|| format!("{}:{}: bad {}", path.display(), i + 2, m.name()))?;
            report.set(*m, v);
        }
        out.push((rec[0].to_string(), report));
    }
    if out.is_empty() {
        bail!("{}: no mean rows", path.display());
    }
    Ok(out)
}

fn pct(p: Option<f64>) -> String {
    p.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_comparison(path: &Path, report: &ComparisonReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(COMPARISON_HEADER)?;
    for s in &report.scenarios {
        for e in &s.entries {
            w.write_record([
                s.scenario.clone(),
                e.metric.name().to_string(),
                e.agent.to_string(),
                e.baseline.to_string(),
                pct(e.percent),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Metric rows, one agent / baseline / % column triple per scenario.
pub fn comparison_table(report: &ComparisonReport) -> String {
    let mut header = vec!["metric".to_string()];
    for s in &report.scenarios {
        header.push(format!("{} agent", s.scenario));
        header.push(format!("{} base", s.scenario));
        header.push(format!("{} %", s.scenario));
    }
    let mut rows = vec![header];
    for (k, m) in Metric::ALL.iter().enumerate() {
        let mut row = vec![m.name().to_string()];
        for s in &report.scenarios {
            let e = &s.entries[k];
            row.push(format!("{:.2}", e.agent));
            row.push(format!("{:.2}", e.baseline));
            row.push(e.percent.map_or("n/a".into(), |p| format!("{p:.1}")));
        }
        rows.push(row);
    }
    let mut mean = vec!["mean %".to_string()];
    for s in &report.scenarios {
        mean.extend([String::new(), String::new()]);
        mean.push(s.mean_improvement().map_or("n/a".into(), |p| format!("{p:.1}")));
    }
    rows.push(mean);

    let cols = rows[0].len();
    let width: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in &rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c == 0 {
                    format!("{cell:<w$}", w = width[c])
                } else {
                    format!("{cell:>w$}", w = width[c])
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

/// Mean improvement per scenario.
pub fn write_by_scenario(path: &Path, report: &ComparisonReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["scenario", "mean_improvement_pct"])?;
    for s in &report.scenarios {
        w.write_record([s.scenario.clone(), pct(s.mean_improvement())])?;
    }
    w.flush()?;
    Ok(())
}

/// Aggregate over scenarios.
pub fn write_overall(path: &Path, agent: &str, report: &ComparisonReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["agent", "scenarios", "aggregate_improvement_pct"])?;
    w.write_record([
        agent.to_string(),
        report.scenarios.len().to_string(),
        pct(report.aggregate()),
    ])?;
    w.flush()?;
    Ok(())
}

/// `key = value` lines, in order.
pub fn write_key_values(path: &Path, pairs: &BTreeMap<String, String>, body: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    for (k, v) in pairs {
        writeln!(f, "{k} = {v}")?;
    }
    f.write_all(body.as_bytes())?;
    Ok(())
}
