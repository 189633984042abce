use alloc::vec::Vec;

use super::{select_action, AgentKind, ControllerKind, Experience};
use crate::encoding::{compose_turn_state, encode_queue, EncodingWeights, StateMatrix};
use crate::error::{Error, Result};
use crate::nn::Network;
use crate::rng::{fnv1a64, Xoshiro256};
use crate::sim::{Direction, PhaseProgram, Route, Vehicle, World};
use crate::traffic::{assign_lane, plan_route, ArrivalSchedule, RoadGraph};

/// Per-episode settings not carried by the world itself.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeSetup {
    pub episode_length: f64,
    pub weights: EncodingWeights,
}

impl Default for EpisodeSetup {
    fn default() -> Self {
        Self {
            episode_length: crate::traffic::DEFAULT_EPISODE_LENGTH,
            weights: EncodingWeights::default(),
        }
    }
}

/// Something that picks actions and learns from the resulting transitions.
pub trait Policy {
    fn act(&mut self, state: &[f64]) -> Result<usize>;
    fn observe(&mut self, experience: Experience) -> Result<()>;
}

/// Epsilon-greedy over a frozen network; keeps every transition.
pub struct GreedyPolicy<'a> {
    pub net: &'a Network,
    pub epsilon: f64,
    pub rng: &'a mut Xoshiro256,
    pub experiences: Vec<Experience>,
}

impl Policy for GreedyPolicy<'_> {
    fn act(&mut self, state: &[f64]) -> Result<usize> {
        let q = self.net.forward(state)?;
        Ok(select_action(&q, self.epsilon, self.rng))
    }

    fn observe(&mut self, experience: Experience) -> Result<()> {
        self.experiences.push(experience);
        Ok(())
    }
}

/// Always extends by zero seconds.
struct FixedPolicy;

impl Policy for FixedPolicy {
    fn act(&mut self, _: &[f64]) -> Result<usize> {
        Ok(0)
    }

    fn observe(&mut self, _: Experience) -> Result<()> {
        Ok(())
    }
}

/// Per-tick hooks into an episode.
pub trait TickObserver {
    /// Called after the tick's arrivals are spawned, before the step.
    fn before_tick(&mut self, _world: &World) {}
    /// Called after every step.
    fn on_tick(&mut self, world: &World);
}

impl TickObserver for () {
    fn on_tick(&mut self, _: &World) {}
}

impl<F: FnMut(&World)> TickObserver for F {
    fn on_tick(&mut self, world: &World) {
        self(world)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecisionRecord {
    /// 0-based decision index.
    pub ts: usize,
    /// Simulation tick at which the action was chosen.
    pub start_tick: u64,
    /// Tick at which the outcome (awt, reward) was measured.
    pub end_tick: u64,
    pub action: usize,
    pub reward: f64,
    /// Accumulated wait at `end_tick`.
    pub awt: f64,
    /// Queue lengths observed at decision time, N, W, E, S.
    pub queues: [usize; 4],
    /// Green seconds actually run (shorter if the episode ended).
    pub green: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhaseInterval {
    pub phase: u8,
    pub start_tick: u64,
    pub ticks: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeLog {
    pub controller: ControllerKind,
    pub initial_awt: f64,
    pub decisions: Vec<DecisionRecord>,
    pub phases: Vec<PhaseInterval>,
    /// Queue lengths after every tick, N, W, E, S.
    pub queue_samples: Vec<[usize; 4]>,
    /// Vehicles in the schedule.
    pub vehicle_count: usize,
    /// Sum of every vehicle's wait, entry delay included, at episode end.
    pub final_total_wait: f64,
}

impl EpisodeLog {
    pub fn total_reward(&self) -> f64 {
        self.decisions.iter().fold(0.0, |a, d| a + d.reward)
    }

    pub fn final_awt(&self) -> f64 {
        self.decisions.last().map_or(self.initial_awt, |d| d.awt)
    }

    pub fn digest(&self) -> u64 {
        let mut buf = Vec::new();
        buf.push(self.controller as u8);
        buf.extend_from_slice(&self.initial_awt.to_bits().to_le_bytes());
        for d in &self.decisions {
            for x in [d.ts as u64, d.start_tick, d.end_tick, d.action as u64, d.green] {
                buf.extend_from_slice(&x.to_le_bytes());
            }
            buf.extend_from_slice(&d.reward.to_bits().to_le_bytes());
            buf.extend_from_slice(&d.awt.to_bits().to_le_bytes());
            for q in d.queues {
                buf.extend_from_slice(&(q as u64).to_le_bytes());
            }
        }
        for p in &self.phases {
            buf.push(p.phase);
            buf.extend_from_slice(&p.start_tick.to_le_bytes());
            buf.extend_from_slice(&p.ticks.to_le_bytes());
        }
        for s in &self.queue_samples {
            for q in s {
                buf.extend_from_slice(&(*q as u64).to_le_bytes());
            }
        }
        buf.extend_from_slice(&(self.vehicle_count as u64).to_le_bytes());
        buf.extend_from_slice(&self.final_total_wait.to_bits().to_le_bytes());
        fnv1a64(&buf)
    }
}

struct Runner<'a, O> {
    world: World,
    schedule: &'a ArrivalSchedule,
    next: usize,
    end_tick: u64,
    observer: &'a mut O,
    log: EpisodeLog,
}

impl<'a, O: TickObserver> Runner<'a, O> {
    fn new(
        controller: ControllerKind,
        world: World,
        schedule: &'a ArrivalSchedule,
        setup: &EpisodeSetup,
        observer: &'a mut O,
    ) -> Result<Self> {
        if setup.episode_length < 0.0 || !setup.episode_length.is_finite() {
            return Err(Error::InvalidConfig("episode length must be finite and >= 0".into()));
        }
        let graph = RoadGraph::four_way(world.geometry());
        for a in &schedule.entries {
            plan_route(&graph, a.origin, a.destination)?;
            if a.origin.exit_for(a.movement) != a.destination {
                return Err(Error::InvalidScenario(alloc::format!(
                    "{} {} does not lead to {}",
                    a.origin.name(),
                    a.movement.name(),
                    a.destination.name()
                )));
            }
        }
        let log = EpisodeLog {
            controller,
            initial_awt: world.accumulated_wait(),
            decisions: Vec::new(),
            phases: Vec::new(),
            queue_samples: Vec::new(),
            vehicle_count: schedule.len(),
            final_total_wait: 0.0,
        };
        let end_tick = libm::ceil(setup.episode_length) as u64;
        Ok(Self {
            world,
            schedule,
            next: 0,
            end_tick,
            observer,
            log,
        })
    }

    fn finished(&self) -> bool {
        self.world.ticks() >= self.end_tick
    }

    fn release_arrivals(&mut self) -> Result<()> {
        let now = self.world.clock();
        while let Some(a) = self.schedule.entries.get(self.next) {
            if f64::from(a.depart_time) > now {
                break;
            }
            let lane = assign_lane(a.movement, &self.world.lane_occupancy(a.origin));
            let route = Route {
                origin: a.origin,
                movement: a.movement,
                destination: a.destination,
            };
            let vehicle = Vehicle::new(self.next as u64, route, lane, f64::from(a.depart_time));
            self.world.spawn(vehicle)?;
            self.next += 1;
        }
        Ok(())
    }

    /// Runs `phase` for up to `ticks`, stopping at the episode end. Returns
    /// the ticks actually simulated.
    fn run_phase(&mut self, phase: u8, ticks: u64) -> Result<u64> {
        let start = self.world.ticks();
        let ticks = ticks.min(self.end_tick.saturating_sub(start));
        if ticks == 0 {
            return Ok(0);
        }
        self.world.set_phase_for(phase, ticks as f64)?;
        for _ in 0..ticks {
            self.release_arrivals()?;
            self.observer.before_tick(&self.world);
            self.world.step();
            self.log.queue_samples.push(self.world.queue_lengths());
            self.observer.on_tick(&self.world);
        }
        self.log.phases.push(PhaseInterval {
            phase,
            start_tick: start,
            ticks,
        });
        Ok(ticks)
    }

    fn record(&mut self, start_tick: u64, action: usize, queues: [usize; 4], green: u64) -> f64 {
        let awt = self.world.accumulated_wait();
        let reward = self.log.final_awt() - awt;
        self.log.decisions.push(DecisionRecord {
            ts: self.log.decisions.len(),
            start_tick,
            end_tick: self.world.ticks(),
            action,
            reward,
            awt,
            queues,
            green,
        });
        reward
    }

    fn finish(mut self) -> EpisodeLog {
        self.log.final_total_wait = self.world.total_wait_all();
        self.log
    }
}

fn whole_seconds(x: f64) -> u64 {
    libm::round(x) as u64
}

fn turn_state(world: &World, weights: &EncodingWeights) -> Result<Vec<f64>> {
    let m: [StateMatrix; 4] = world.queue_lengths().map(|q| encode_queue(q, weights));
    Ok(compose_turn_state(&m)?.0)
}

fn approach_state(world: &World, approach: Direction, weights: &EncodingWeights) -> Vec<f64> {
    encode_queue(world.queue_length(approach), weights).flatten().collect()
}

fn turn_episode<O: TickObserver>(
    mut run: Runner<'_, O>,
    policy: &mut dyn Policy,
    setup: &EpisodeSetup,
) -> Result<EpisodeLog> {
    let green = whole_seconds(run.world.program().green);
    let yellow = whole_seconds(run.world.program().yellow);
    let mut previous = Direction::North;
    let mut state = turn_state(&run.world, &setup.weights)?;
    while !run.finished() {
        let start = run.world.ticks();
        let queues = run.world.queue_lengths();
        let action = policy.act(&state)?;
        let chosen = Direction::from_index(action).ok_or(Error::AgentMismatch {
            agent: "turn",
            input: state.len(),
            output: action + 1,
        })?;
        if chosen != previous {
            run.run_phase(PhaseProgram::yellow_phase(previous), yellow)?;
        }
        let ran = run.run_phase(PhaseProgram::green_phase(chosen), green)?;
        let reward = run.record(start, action, queues, ran);
        let next_state = turn_state(&run.world, &setup.weights)?;
        policy.observe(Experience {
            state: core::mem::replace(&mut state, next_state.clone()),
            action,
            reward,
            next_state,
            terminal: run.finished(),
        })?;
        previous = chosen;
    }
    Ok(run.finish())
}

fn time_episode<O: TickObserver>(
    mut run: Runner<'_, O>,
    policy: &mut dyn Policy,
    setup: &EpisodeSetup,
) -> Result<EpisodeLog> {
    let base = whole_seconds(run.world.program().green);
    let yellow = whole_seconds(run.world.program().yellow);
    let mut approach = Direction::North;
    let mut state = approach_state(&run.world, approach, &setup.weights);
    while !run.finished() {
        let start = run.world.ticks();
        let queues = run.world.queue_lengths();
        let action = policy.act(&state)?;
        if action >= super::TIME_ACTIONS {
            return Err(Error::AgentMismatch {
                agent: "time",
                input: state.len(),
                output: action + 1,
            });
        }
        let ran = run.run_phase(PhaseProgram::green_phase(approach), base + action as u64)?;
        run.run_phase(PhaseProgram::yellow_phase(approach), yellow)?;
        let reward = run.record(start, action, queues, ran);
        approach = Direction::from_index((approach.index() + 1) % 4).expect("index < 4");
        let next_state = approach_state(&run.world, approach, &setup.weights);
        policy.observe(Experience {
            state: core::mem::replace(&mut state, next_state.clone()),
            action,
            reward,
            next_state,
            terminal: run.finished(),
        })?;
    }
    Ok(run.finish())
}

/// Runs one episode for any controller, feeding decisions through `policy`
/// (ignored for the fixed baseline) and every tick through `observer`.
pub fn drive<O: TickObserver>(
    controller: ControllerKind,
    world: World,
    policy: &mut dyn Policy,
    schedule: &ArrivalSchedule,
    setup: &EpisodeSetup,
    observer: &mut O,
) -> Result<EpisodeLog> {
    let run = Runner::new(controller, world, schedule, setup, observer)?;
    match controller {
        ControllerKind::Turn => turn_episode(run, policy, setup),
        ControllerKind::Time => time_episode(run, policy, setup),
        ControllerKind::Fixed => time_episode(run, &mut FixedPolicy, setup),
    }
}

fn run_agent(
    kind: AgentKind,
    world: World,
    net: &Network,
    epsilon: f64,
    schedule: &ArrivalSchedule,
    setup: &EpisodeSetup,
    rng: &mut Xoshiro256,
) -> Result<(EpisodeLog, Vec<Experience>)> {
    kind.check_network(net)?;
    let mut policy = GreedyPolicy {
        net,
        epsilon,
        rng,
        experiences: Vec::new(),
    };
    let log = drive(kind.into(), world, &mut policy, schedule, setup, &mut ())?;
    Ok((log, policy.experiences))
}

/// Turn-based control: each decision picks the approach that gets the next
/// green; changing approach inserts the previous approach's yellow first.
pub fn run_turn_episode(
    world: World,
    net: &Network,
    epsilon: f64,
    schedule: &ArrivalSchedule,
    setup: &EpisodeSetup,
    rng: &mut Xoshiro256,
) -> Result<(EpisodeLog, Vec<Experience>)> {
    run_agent(AgentKind::Turn, world, net, epsilon, schedule, setup, rng)
}

/// Time-based control: the phase order is fixed and each decision extends
/// the next green by 0 to 19 seconds.
pub fn run_time_episode(
    world: World,
    net: &Network,
    epsilon: f64,
    schedule: &ArrivalSchedule,
    setup: &EpisodeSetup,
    rng: &mut Xoshiro256,
) -> Result<(EpisodeLog, Vec<Experience>)> {
    run_agent(AgentKind::Time, world, net, epsilon, schedule, setup, rng)
}

/// Conventional fixed-time control cycling all eight phases.
pub fn run_fixed_baseline(
    world: World,
    schedule: &ArrivalSchedule,
    setup: &EpisodeSetup,
) -> Result<EpisodeLog> {
    drive(ControllerKind::Fixed, world, &mut FixedPolicy, schedule, setup, &mut ())
}
