//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `cargo test -p tsc-lab --test acceptance -- 3 5` runs a subset.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use tsc_core::agent::{
    drive, run_fixed_baseline, run_time_episode, run_turn_episode, train, AgentKind,
    ControllerKind, EpisodeLog, EpisodeSetup, EpsilonSchedule, Experience, Policy, TickObserver,
    TrainingConfig,
};
use tsc_core::encoding::{decode, encode_queue, EncodingWeights, CAPACITY, CELLS};
use tsc_core::metrics::{evaluate, evaluation_seeds, ComparisonReport, Controller, Metric, MetricsReport};
use tsc_core::nn::{check_gradients, AdamConfig, AdamState, Network, NetworkSpec, TrainingBatch, HIDDEN_DIMS};
use tsc_core::rng::Xoshiro256;
use tsc_core::sim::{
    Direction, Geometry, Light, Location, Movement, PhaseProgram, Route, Vehicle, VehicleSpec,
    World, LANES_PER_ROAD,
};
use tsc_core::traffic::{assign_lane, generate_schedule, ScenarioName, ScenarioVolumes};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// 1. Directional reproduction at desk scale.

const DESK_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const DESK_EVAL_ROOT: u64 = 1000;

fn desk_config(agent: AgentKind, seed: u64) -> TrainingConfig {
    let mut c = TrainingConfig::new(agent);
    c.episodes = 80;
    c.episode_length = 1800.0;
    c.volumes = ScenarioVolumes {
        low: 200,
        high: 1000,
        east_west: 500,
        north_south: 500,
    };
    c.epsilon = EpsilonSchedule::scaled_to(80);
    c.gamma = 0.5;
    c.reward_scale = 0.01;
    c.seed = seed;
    c
}

fn desk_comparison(
    c: &TrainingConfig,
    net: &Network,
    baselines: &BTreeMap<ScenarioName, MetricsReport>,
) -> Result<ComparisonReport, String> {
    let setup = c.setup();
    let mut report = ComparisonReport::default();
    for s in ScenarioName::ALL {
        let seeds = evaluation_seeds(DESK_EVAL_ROOT, s, 5);
        let reports = evaluate(
            Controller::Agent(c.agent, net),
            &c.scenario(s),
            &seeds,
            &setup,
            &|x| c.world(x),
        )
        .map_err(fail)?;
        report.add(s.name(), &MetricsReport::mean(&reports), &baselines[&s]);
    }
    Ok(report)
}

fn pct(p: Option<f64>) -> String {
    p.map_or("n/a".into(), |v| format!("{v:.1}%"))
}

fn criterion_1() -> Outcome {
    let reference = desk_config(AgentKind::Time, 0);
    let setup = reference.setup();
    let mut baselines = BTreeMap::new();
    for s in ScenarioName::ALL {
        let seeds = evaluation_seeds(DESK_EVAL_ROOT, s, 5);
        let reports = evaluate(Controller::Fixed, &reference.scenario(s), &seeds, &setup, &|x| {
            reference.world(x)
        })
        .map_err(fail)?;
        baselines.insert(s, MetricsReport::mean(&reports));
    }

    let mut time_ok = 0;
    let mut time_detail = Vec::new();
    for seed in DESK_SEEDS {
        let c = desk_config(AgentKind::Time, seed);
        let net = train(&c, &mut |_| {}).map_err(fail)?.network;
        let r = desk_comparison(&c, &net, &baselines)?;
        let (tawt, ewpv) = (r.metric_mean(Metric::Tawt), r.metric_mean(Metric::Ewpv));
        if tawt.is_some_and(|v| v >= 10.0) && ewpv.is_some_and(|v| v >= 10.0) {
            time_ok += 1;
        }
        time_detail.push(format!("s{seed} tawt {} ewpv {}", pct(tawt), pct(ewpv)));
    }

    let mut turn_ok = 0;
    let mut turn_detail = Vec::new();
    for seed in DESK_SEEDS {
        let c = desk_config(AgentKind::Turn, seed);
        let net = train(&c, &mut |_| {}).map_err(fail)?.network;
        let r = desk_comparison(&c, &net, &baselines)?;
        let low = r.scenarios[0].entries.iter().find(|e| e.metric == Metric::Tawt).and_then(|e| e.percent);
        if low.is_some_and(|v| v >= 15.0) {
            turn_ok += 1;
        }
        turn_detail.push(format!("s{seed} low tawt {}", pct(low)));
    }

    let detail = format!(
        "time agent {time_ok}/5 seeds >= 10% [{}]; turn agent {turn_ok}/5 seeds >= 15% [{}]",
        time_detail.join(", "),
        turn_detail.join(", ")
    );
    if time_ok >= 4 && turn_ok >= 4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 2. Exploration schedule at the default breakpoints.

fn criterion_2() -> Outcome {
    let s = EpsilonSchedule::default();
    for (e, want) in [(1, 1.0), (90, 1.0), (150, 0.6), (210, 0.2), (255, 0.1), (300, 0.0)] {
        let got = s.epsilon(e);
        ensure((got - want).abs() <= 1e-12, || format!("eps({e}) = {got}, want {want}"))?;
    }
    Ok("6 breakpoints within 1e-12".into())
}

// 3. Queue encoding round trip.

fn criterion_3() -> Outcome {
    let w = EncodingWeights::default();
    let mut last_pop = 0;
    for q in 0..=400usize {
        let m = encode_queue(q, &w);
        let back = decode(&m, &w);
        let want = q.min(CAPACITY as usize) as u32;
        ensure(back == want, || format!("decode(encode({q})) = {back}, want {want}"))?;
        let pop = m.popcount();
        ensure(pop >= last_pop, || format!("popcount drops at q = {q}"))?;
        last_pop = pop;
    }
    ensure(encode_queue(0, &w).popcount() == 0, || "encode(0) is not all-zero".into())?;
    ensure(encode_queue(304, &w).popcount() == CELLS, || "encode(304) is not all-one".into())?;
    Ok("q = 0..400 round-trips, popcount monotone".into())
}

// 4. Analytic gradients against central differences.

/// Random states and actions; targets sit near the current prediction, as
/// bootstrapped targets do, which keeps the finite-difference rounding noise
/// (about 1e-16 * loss / h) small next to the gradients.
fn random_batch(net: &Network, n: usize, rng: &mut Xoshiro256, binary: bool) -> TrainingBatch {
    let mut batch = TrainingBatch::default();
    for _ in 0..n {
        let x: Vec<f64> = (0..net.input_dim())
            .map(|_| if binary { f64::from(u8::from(rng.chance(0.3))) } else { rng.uniform(-1.0, 1.0) })
            .collect();
        let a = rng.index(net.output_dim());
        let q = net.forward(&x).expect("input width matches")[a];
        batch.push(&x, a, q + rng.uniform(-0.05, 0.05));
    }
    batch
}

/// A spread of weights and biases from each layer.
fn sampled_coords(net: &Network, per_layer: usize, rng: &mut Xoshiro256) -> Vec<usize> {
    let mut coords = Vec::new();
    for layer in net.layers() {
        let w = layer.weights();
        for _ in 0..per_layer {
            coords.push(w.start + rng.index(w.len()));
        }
        let b = layer.bias();
        for _ in 0..per_layer.min(b.len()) {
            coords.push(b.start + rng.index(b.len()));
        }
    }
    coords
}

fn criterion_4() -> Outcome {
    let mut rng = Xoshiro256::seed_from_u64(0x9c4);
    let mut worst: f64 = 0.0;
    let (mut checked, mut kinks) = (0, 0);
    for k in 0..20 {
        let (spec, full) = match k {
            0 => (NetworkSpec::new(192, &HIDDEN_DIMS, 4).map_err(fail)?, true),
            1 => (NetworkSpec::new(48, &HIDDEN_DIMS, 20).map_err(fail)?, true),
            _ => {
                let input = 1 + rng.index(12);
                let depth = 1 + rng.index(3);
                let hidden: Vec<usize> = (0..depth).map(|_| 1 + rng.index(10)).collect();
                let output = 1 + rng.index(6);
                (NetworkSpec::new(input, &hidden, output).map_err(fail)?, false)
            }
        };
        let net = Network::init(&spec, &mut rng).map_err(fail)?;
        let n = 1 + rng.index(if full { 4 } else { 8 });
        let batch = random_batch(&net, n, &mut rng, full);
        let (_, grads) = net.loss_and_grad(&batch).map_err(fail)?;
        let coords = if full { Some(sampled_coords(&net, 40, &mut rng)) } else { None };
        let r = check_gradients(&net, &batch, &grads, 1e-5, coords.as_deref()).map_err(fail)?;
        ensure(r.checked > 0, || format!("instance {k}: no coordinate checked"))?;
        worst = worst.max(r.max_relative_error);
        checked += r.checked;
        kinks += r.skipped_kinks;
    }
    let detail = format!("20 instances, {checked} coordinates, {kinks} kink-straddling skipped, max rel err {worst:.2e}");
    if worst < 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 5. Rewards telescope.

fn short_config() -> TrainingConfig {
    let mut c = TrainingConfig::new(AgentKind::Turn);
    c.episode_length = 900.0;
    c.volumes = ScenarioVolumes {
        low: 100,
        high: 500,
        east_west: 250,
        north_south: 250,
    };
    c
}

fn small_net(kind: AgentKind, seed: u64) -> Network {
    let spec = NetworkSpec::new(kind.input_dim(), &[16, 8], kind.output_dim()).unwrap();
    Network::init(&spec, &mut Xoshiro256::seed_from_u64(seed)).unwrap()
}

fn criterion_5() -> Outcome {
    let c = short_config();
    let setup = c.setup();
    let mut worst: f64 = 0.0;
    let mut episodes = 0;
    for (i, s) in ScenarioName::ALL.into_iter().enumerate() {
        let seed = 50 + i as u64;
        let schedule = generate_schedule(&c.scenario(s), seed).map_err(fail)?;
        let mut rng = Xoshiro256::seed_from_u64(seed);
        let logs: [EpisodeLog; 3] = [
            run_fixed_baseline(c.world(seed), &schedule, &setup).map_err(fail)?,
            run_turn_episode(c.world(seed), &small_net(AgentKind::Turn, seed), 0.5, &schedule, &setup, &mut rng)
                .map_err(fail)?
                .0,
            run_time_episode(c.world(seed), &small_net(AgentKind::Time, seed), 0.5, &schedule, &setup, &mut rng)
                .map_err(fail)?
                .0,
        ];
        for log in &logs {
            ensure(!log.decisions.is_empty(), || format!("{} on {}: no decisions", log.controller.name(), s.name()))?;
            let sum: f64 = log.decisions.iter().map(|d| d.reward).sum();
            let gap = (sum - (log.initial_awt - log.final_awt())).abs();
            worst = worst.max(gap);
            ensure(gap < 1e-9, || format!("{} on {}: gap {gap:e}", log.controller.name(), s.name()))?;
            episodes += 1;
        }
    }
    Ok(format!("{episodes} episodes (3 controllers x 4 scenarios), max gap {worst:.1e}"))
}

// 6. Streaming metrics against a brute-force rescan of the trace.

#[derive(Default)]
struct Snapshot {
    /// id -> (location, speed, origin)
    vehicles: BTreeMap<u64, (Location, f64, Direction)>,
}

impl Snapshot {
    fn of(world: &World) -> Self {
        Self {
            vehicles: world
                .vehicles()
                .map(|v| (v.vehicle.id, (v.location, v.vehicle.speed, v.vehicle.route.origin)))
                .collect(),
        }
    }
}

/// Raw per-tick record: the state right before and right after each step.
#[derive(Default)]
struct RawTrace {
    ticks: Vec<(Snapshot, Snapshot)>,
    pending_before: Option<Snapshot>,
}

impl TickObserver for RawTrace {
    fn before_tick(&mut self, world: &World) {
        self.pending_before = Some(Snapshot::of(world));
    }

    fn on_tick(&mut self, world: &World) {
        let before = self.pending_before.take().expect("before_tick precedes on_tick");
        self.ticks.push((before, Snapshot::of(world)));
    }
}

struct Brute {
    /// Accumulated wait on the incoming road after each tick.
    awt: Vec<f64>,
    total_wait: f64,
    aql: [f64; 4],
}

fn rescan(trace: &RawTrace) -> Brute {
    let mut road_wait: BTreeMap<u64, u64> = BTreeMap::new();
    let mut entry_wait: BTreeMap<u64, u64> = BTreeMap::new();
    let mut awt = Vec::new();
    let mut queued = [0u64; 4];
    for (before, after) in &trace.ticks {
        for (id, (loc, _, _)) in &before.vehicles {
            match (loc, after.vehicles.get(id)) {
                (Location::Incoming, Some((Location::Incoming, speed, _))) if *speed < 1.0 => {
                    *road_wait.entry(*id).or_default() += 1;
                }
                (Location::Pending, _) => *entry_wait.entry(*id).or_default() += 1,
                _ => {}
            }
        }
        let mut sum = 0u64;
        for (id, (loc, speed, origin)) in &after.vehicles {
            if *loc == Location::Incoming {
                sum += road_wait.get(id).copied().unwrap_or(0);
                if *speed < 1.0 {
                    queued[origin.index()] += 1;
                }
            }
        }
        awt.push(sum as f64);
    }
    let n = trace.ticks.len() as f64;
    Brute {
        awt,
        total_wait: (road_wait.values().sum::<u64>() + entry_wait.values().sum::<u64>()) as f64,
        aql: queued.map(|q| q as f64 / n),
    }
}

/// Acts uniformly at random.
struct RandomPolicy {
    rng: Xoshiro256,
    actions: usize,
}

impl Policy for RandomPolicy {
    fn act(&mut self, _: &[f64]) -> tsc_core::Result<usize> {
        Ok(self.rng.index(self.actions))
    }

    fn observe(&mut self, _: Experience) -> tsc_core::Result<()> {
        Ok(())
    }
}

fn criterion_6() -> Outcome {
    let c = short_config();
    let mut rng = Xoshiro256::seed_from_u64(0x6);
    for k in 0..10 {
        let scenario = ScenarioName::ALL[rng.index(4)];
        let kind = [ControllerKind::Fixed, ControllerKind::Turn, ControllerKind::Time][rng.index(3)];
        let setup = EpisodeSetup {
            episode_length: 300.0 + rng.index(600) as f64,
            ..c.setup()
        };
        let mut sc = c.scenario(scenario);
        sc.episode_length = setup.episode_length;
        let seed = rng.next_u64();
        let schedule = generate_schedule(&sc, seed).map_err(fail)?;
        let actions = match kind {
            ControllerKind::Fixed => 1,
            ControllerKind::Turn => AgentKind::Turn.output_dim(),
            ControllerKind::Time => AgentKind::Time.output_dim(),
        };
        let mut policy = RandomPolicy {
            rng: Xoshiro256::seed_from_u64(seed),
            actions,
        };
        let mut trace = RawTrace::default();
        let log = drive(kind, c.world(seed), &mut policy, &schedule, &setup, &mut trace).map_err(fail)?;
        let brute = rescan(&trace);
        let streamed = MetricsReport::from_log(&log);
        let tag = || format!("episode {k} ({} on {})", kind.name(), scenario.name());

        let tawt: f64 = log
            .decisions
            .iter()
            .map(|d| brute.awt[d.end_tick as usize - 1])
            .sum();
        ensure(tawt == streamed.tawt, || format!("{}: tawt {} vs {}", tag(), streamed.tawt, tawt))?;
        let ewpv = if schedule.is_empty() { 0.0 } else { brute.total_wait / schedule.len() as f64 };
        ensure(ewpv == streamed.ewpv, || format!("{}: ewpv {} vs {}", tag(), streamed.ewpv, ewpv))?;
        for d in Direction::ALL {
            let (s, b) = (streamed.aql[d.index()], brute.aql[d.index()]);
            ensure(s == b, || format!("{}: aql_{} {s} vs {b}", tag(), d.name()))?;
        }
    }
    Ok("10 randomized episodes, tawt/ewpv/aql identical".into())
}

// 7. Determinism from a manifest.

fn tsc(args: &[&str], dir: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tsc"))
        .args(args)
        .current_dir(dir)
        .env_remove("TSC_OUT_DIR")
        .output()
        .map_err(fail)?;
    ensure(out.status.success(), || {
        format!("tsc {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

fn manifest_value(path: &Path, key: &str) -> Result<String, String> {
    let text = std::fs::read_to_string(path).map_err(fail)?;
    text.lines()
        .find_map(|l| l.split_once('=').filter(|(k, _)| k.trim() == key).map(|(_, v)| v.trim().to_string()))
        .ok_or_else(|| format!("{} has no {key}", path.display()))
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().map_err(fail)?;
    let d = dir.path();
    tsc(
        &[
            "train", "--agent", "turn", "--episodes", "3", "--episode-length", "600", "--seed", "11",
            "--out", "a", "--set", "hidden=32,16", "--set", "batch=8", "--set", "volume_low=150",
        ],
        d,
    )?;
    tsc(&["train", "--config", "a/turn.weights.manifest", "--out", "b", "--model", "b/turn.weights"], d)?;
    let wa = std::fs::read(d.join("a/turn.weights")).map_err(fail)?;
    let wb = std::fs::read(d.join("b/turn.weights")).map_err(fail)?;
    ensure(wa == wb, || "weights files differ".into())?;
    let ha = manifest_value(&d.join("a/turn.weights.manifest"), "manifest.log_hash")?;
    let hb = manifest_value(&d.join("b/turn.weights.manifest"), "manifest.log_hash")?;
    ensure(ha == hb, || format!("log hashes differ: {ha} vs {hb}"))?;
    Ok(format!("{} weight bytes identical, log hash {}", wa.len(), &ha[..16]))
}

// 8. Phase timeline.

struct Scripted(Vec<usize>, usize);

impl Policy for Scripted {
    fn act(&mut self, _: &[f64]) -> tsc_core::Result<usize> {
        let a = self.0[self.1 % self.0.len()];
        self.1 += 1;
        Ok(a)
    }

    fn observe(&mut self, _: Experience) -> tsc_core::Result<()> {
        Ok(())
    }
}

fn cycle_check(log: &EpisodeLog) -> Result<(), String> {
    let want = [(1u8, 15u64), (2, 4), (3, 15), (4, 4), (5, 15), (6, 4), (7, 15), (8, 4)];
    let full = log.phases.len() - 1;
    for (i, p) in log.phases[..full].iter().enumerate() {
        ensure((p.phase, p.ticks) == want[i % 8], || {
            format!("{}: phase #{i} is {}x{}s", log.controller.name(), p.phase, p.ticks)
        })?;
        ensure(p.start_tick == 76 * (i as u64 / 8) + want[..i % 8].iter().map(|w| w.1).sum::<u64>(), || {
            format!("{}: phase #{i} starts at {}", log.controller.name(), p.start_tick)
        })?;
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    let c = short_config();
    let setup = c.setup();
    let schedule = generate_schedule(&c.scenario(ScenarioName::High), 8).map_err(fail)?;
    let fixed = run_fixed_baseline(c.world(8), &schedule, &setup).map_err(fail)?;
    cycle_check(&fixed)?;
    let zero_time = drive(
        ControllerKind::Time,
        c.world(8),
        &mut Scripted(vec![0], 0),
        &schedule,
        &setup,
        &mut (),
    )
    .map_err(fail)?;
    cycle_check(&zero_time)?;
    ensure(fixed.phases == zero_time.phases, || "fixed and zero-action time timelines differ".into())?;

    // Episodes start on the North green, so repeating North never yields.
    let repeat = drive(ControllerKind::Turn, c.world(8), &mut Scripted(vec![0], 0), &schedule, &setup, &mut ())
        .map_err(fail)?;
    ensure(repeat.phases.iter().all(|p| p.phase == 1), || "repeated turn action inserted another phase".into())?;
    let total: u64 = repeat.phases.iter().map(|p| p.ticks).sum();
    ensure(total == 900, || format!("repeated turn timeline covers {total} s"))?;
    // From the initial North approach: West, West, East, North.
    let changed = drive(ControllerKind::Turn, c.world(8), &mut Scripted(vec![1, 1, 2, 0], 0), &schedule, &setup, &mut ())
        .map_err(fail)?;
    let head: Vec<(u8, u64)> = changed.phases.iter().take(8).map(|p| (p.phase, p.ticks)).collect();
    let want = vec![(2, 4), (3, 15), (3, 15), (4, 4), (5, 15), (6, 4), (1, 15), (2, 4)];
    ensure(head == want, || format!("changed turn timeline {head:?}, want {want:?}"))?;
    Ok(format!("76 s cycle over {} fixed phases; turn yellow only on change", fixed.phases.len()))
}

// 9. Adam closed form.

fn criterion_9() -> Outcome {
    let cfg = AdamConfig::default();
    let mut worst: f64 = 0.0;
    for (p0, g) in [(0.5, 2.0), (-1.25, -0.3), (3.0, 1e-4), (0.0, 7.5)] {
        let mut p = [p0];
        let mut state = AdamState::new(1);
        state.update(&cfg, &mut p, &[g]).map_err(fail)?;
        let m_hat = (1.0 - cfg.beta1) * g / (1.0 - cfg.beta1);
        let v_hat = (1.0 - cfg.beta2) * g * g / (1.0 - cfg.beta2);
        let want = p0 - cfg.lr * m_hat / (v_hat.sqrt() + cfg.epsilon);
        let err = (p[0] - want).abs();
        worst = worst.max(err);
        ensure(err <= 1e-12, || format!("p0 {p0} g {g}: {} vs {want}", p[0]))?;
    }
    Ok(format!("4 single steps, max error {worst:.1e}"))
}

// 10. Simulator safety under random phases.

fn criterion_10() -> Outcome {
    let spec = VehicleSpec::default();
    let geometry = Geometry::default();
    let mut world = World::new(spec, geometry, PhaseProgram::default(), 10);
    let mut rng = Xoshiro256::seed_from_u64(0x10);
    let mut next_id = 0u64;
    let mut phase_left = 0u64;
    let movements = [Movement::Left, Movement::Through, Movement::Right];
    const TICKS: u64 = 100_000;
    for tick in 0..TICKS {
        if phase_left == 0 {
            let phase = 1 + rng.index(8) as u8;
            phase_left = 1 + rng.index(40) as u64;
            world.set_phase_for(phase, phase_left as f64).map_err(fail)?;
        }
        phase_left -= 1;
        // Bursty demand keeps queues and entry blocking in play.
        let rate = if (tick / 2000) % 2 == 0 { 0.15 } else { 0.9 };
        while rng.chance(rate) {
            let origin = Direction::ALL[rng.index(4)];
            let movement = movements[rng.index(3)];
            let lane = assign_lane(movement, &world.lane_occupancy(origin));
            world
                .spawn(Vehicle::new(next_id, Route::new(origin, movement), lane, world.clock()))
                .map_err(fail)?;
            next_id += 1;
            if rng.chance(0.5) {
                break;
            }
        }
        let before: BTreeMap<u64, Location> = world.vehicles().map(|v| (v.vehicle.id, v.location)).collect();
        let lights = Direction::ALL.map(|d| world.light(d));
        world.step();

        for v in world.vehicles() {
            if v.location == Location::Crossing && before.get(&v.vehicle.id) == Some(&Location::Incoming) {
                let light = lights[v.vehicle.route.origin.index()];
                ensure(light != Light::Red, || format!("tick {tick}: vehicle {} entered on red", v.vehicle.id))?;
            }
        }
        for d in Direction::ALL {
            for l in 0..LANES_PER_ROAD {
                for lane in [world.incoming_lane(d, l), world.outgoing_lane(d, l)] {
                    for pair in lane.windows(2) {
                        let gap = pair[0].position - spec.length - pair[1].position;
                        ensure(gap >= -1e-9, || {
                            format!("tick {tick}: vehicles {} and {} overlap by {}", pair[0].id, pair[1].id, -gap)
                        })?;
                    }
                }
                if lights[d.index()] == Light::Red {
                    for v in world.incoming_lane(d, l) {
                        ensure(v.position <= geometry.road_length + 1e-9, || {
                            format!("tick {tick}: vehicle {} past a red stop line", v.id)
                        })?;
                    }
                }
            }
        }
        let present = world.vehicles().count();
        ensure(present + world.arrived_count() == world.spawned_count(), || {
            format!(
                "tick {tick}: {} spawned but {present} present + {} arrived",
                world.spawned_count(),
                world.arrived_count()
            )
        })?;
        ensure(world.spawned_count() as u64 == next_id, || format!("tick {tick}: spawn count drifted"))?;
    }
    ensure(world.arrived_count() > 0, || "no vehicle completed its trip".into())?;
    Ok(format!("{TICKS} ticks, {next_id} vehicles, {} arrived", world.arrived_count()))
}

const CRITERIA: [(u32, &str, fn() -> Outcome); 10] = [
    (2, "exploration schedule breakpoints", criterion_2),
    (3, "queue encoding round trip", criterion_3),
    (4, "gradient check", criterion_4),
    (5, "reward telescoping", criterion_5),
    (6, "metrics match trace rescan", criterion_6),
    (7, "determinism from manifest", criterion_7),
    (8, "phase timeline arithmetic", criterion_8),
    (9, "Adam closed form", criterion_9),
    (10, "simulator safety fuzzing", criterion_10),
    (1, "desk-scale improvement over fixed timing", criterion_1),
];

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, run) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
