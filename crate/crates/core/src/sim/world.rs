use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;

use super::{Direction, Geometry, Light, PhaseProgram, Route, VehicleSpec, LANES_PER_ROAD};
use crate::error::{Error, Result};
use crate::rng::fnv1a64;

/// Simulation step length, seconds.
pub const DT: f64 = 1.0;

/// Speed below which a vehicle counts as stationary, m/s.
pub const STATIONARY_SPEED: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Vehicle {
    pub id: u64,
    pub route: Route,
    pub lane: usize,
    /// Front bumper, metres from the start of the current road.
    pub position: f64,
    pub speed: f64,
    /// Seconds spent below [`STATIONARY_SPEED`] on the incoming road.
    pub accumulated_wait: f64,
    /// Seconds spent waiting for entry space before being inserted.
    pub entry_delay: f64,
    pub spawn_time: f64,
    pub crossed: bool,
}

impl Vehicle {
    pub fn new(id: u64, route: Route, lane: usize, spawn_time: f64) -> Self {
        Self {
            id,
            route,
            lane,
            position: 0.0,
            speed: 0.0,
            accumulated_wait: 0.0,
            entry_delay: 0.0,
            spawn_time,
            crossed: false,
        }
    }

    /// Everything this vehicle has waited so far, entry delay included.
    pub fn total_wait(&self) -> f64 {
        self.accumulated_wait + self.entry_delay
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Location {
    /// Spawned, waiting for space at the start of its lane.
    Pending,
    Incoming,
    /// Traversing the intersection box.
    Crossing,
    Outgoing,
}

#[derive(Clone, Copy, Debug)]
pub struct VehicleView<'a> {
    pub vehicle: &'a Vehicle,
    pub location: Location,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActivePhase {
    pub id: u8,
    pub remaining: f64,
}

#[derive(Clone, Debug, PartialEq)]
struct InBox {
    vehicle: Vehicle,
    ticks_left: u32,
}

type Lanes = [[Vec<Vehicle>; LANES_PER_ROAD]; 4];

/// Complete simulation state.
#[derive(Clone, Debug, PartialEq)]
pub struct World {
    clock: u64,
    spec: VehicleSpec,
    geometry: Geometry,
    program: PhaseProgram,
    phase: ActivePhase,
    seed: u64,
    /// `[approach][lane]`, front-most vehicle first.
    incoming: Lanes,
    pending: [[VecDeque<Vehicle>; LANES_PER_ROAD]; 4],
    in_box: Vec<InBox>,
    /// `[exit][lane]`, front-most vehicle first.
    outgoing: Lanes,
    ids: BTreeSet<u64>,
    arrived: usize,
    arrived_wait: f64,
}

impl World {
    pub fn new(spec: VehicleSpec, geometry: Geometry, program: PhaseProgram, seed: u64) -> Self {
        Self {
            clock: 0,
            spec,
            geometry,
            program,
            phase: ActivePhase {
                id: 1,
                remaining: program.green,
            },
            seed,
            incoming: Default::default(),
            pending: Default::default(),
            in_box: Vec::new(),
            outgoing: Default::default(),
            ids: BTreeSet::new(),
            arrived: 0,
            arrived_wait: 0.0,
        }
    }

    pub fn clock(&self) -> f64 {
        self.clock as f64 * DT
    }

    pub fn ticks(&self) -> u64 {
        self.clock
    }

    pub fn spec(&self) -> &VehicleSpec {
        &self.spec
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn program(&self) -> &PhaseProgram {
        &self.program
    }

    pub fn phase(&self) -> ActivePhase {
        self.phase
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spawned_count(&self) -> usize {
        self.ids.len()
    }

    pub fn arrived_count(&self) -> usize {
        self.arrived
    }

    pub fn pending_count(&self) -> usize {
        self.pending.iter().flatten().map(VecDeque::len).sum()
    }

    /// Vehicles on roads or inside the box.
    pub fn active_count(&self) -> usize {
        let on_roads: usize = self
            .incoming
            .iter()
            .chain(self.outgoing.iter())
            .flatten()
            .map(Vec::len)
            .sum();
        on_roads + self.in_box.len()
    }

    /// Activates `phase` for its programmed duration.
    pub fn set_phase(&mut self, phase: u8) -> Result<()> {
        let duration = self.program.duration(phase)?;
        self.set_phase_for(phase, duration)
    }

    /// Activates `phase` with an explicit duration (time-based control).
    pub fn set_phase_for(&mut self, phase: u8, duration: f64) -> Result<()> {
        PhaseProgram::check(phase)?;
        self.phase = ActivePhase {
            id: phase,
            remaining: duration,
        };
        Ok(())
    }

    pub fn light(&self, approach: Direction) -> Light {
        PhaseProgram::light(self.phase.id, approach).expect("active phase is always valid")
    }

    /// Vehicles on the incoming lanes of `approach`, front-most first per lane.
    pub fn incoming_lane(&self, approach: Direction, lane: usize) -> &[Vehicle] {
        &self.incoming[approach.index()][lane]
    }

    pub fn outgoing_lane(&self, exit: Direction, lane: usize) -> &[Vehicle] {
        &self.outgoing[exit.index()][lane]
    }

    /// Vehicles on or waiting for each incoming lane of `approach`.
    pub fn lane_occupancy(&self, approach: Direction) -> [usize; LANES_PER_ROAD] {
        let a = approach.index();
        core::array::from_fn(|l| self.incoming[a][l].len() + self.pending[a][l].len())
    }

    /// Stationary vehicles (speed < 1 m/s) on the incoming lanes of `approach`.
    pub fn queue_length(&self, approach: Direction) -> usize {
        self.incoming[approach.index()]
            .iter()
            .flatten()
            .filter(|v| v.speed < STATIONARY_SPEED)
            .count()
    }

    pub fn queue_lengths(&self) -> [usize; 4] {
        Direction::ALL.map(|d| self.queue_length(d))
    }

    /// Sum of accumulated wait over vehicles currently on incoming roads.
    pub fn accumulated_wait(&self) -> f64 {
        self.incoming
            .iter()
            .flatten()
            .flatten()
            .map(|v| v.accumulated_wait)
            .fold(0.0, |a, w| a + w)
    }

    /// Sum of [`Vehicle::total_wait`] over every vehicle ever spawned.
    pub fn total_wait_all(&self) -> f64 {
        self.vehicles().fold(self.arrived_wait, |a, v| a + v.vehicle.total_wait())
    }

    /// Every vehicle still in the system, with where it is.
    pub fn vehicles(&self) -> impl Iterator<Item = VehicleView<'_>> {
        let pending = self.pending.iter().flatten().flatten().map(|v| VehicleView {
            vehicle: v,
            location: Location::Pending,
        });
        let incoming = self.incoming.iter().flatten().flatten().map(|v| VehicleView {
            vehicle: v,
            location: Location::Incoming,
        });
        let crossing = self.in_box.iter().map(|b| VehicleView {
            vehicle: &b.vehicle,
            location: Location::Crossing,
        });
        let outgoing = self.outgoing.iter().flatten().flatten().map(|v| VehicleView {
            vehicle: v,
            location: Location::Outgoing,
        });
        pending.chain(incoming).chain(crossing).chain(outgoing)
    }

    /// Adds a vehicle at the start of its lane, or queues it for entry.
    pub fn spawn(&mut self, mut vehicle: Vehicle) -> Result<()> {
        if self.ids.contains(&vehicle.id) {
            return Err(Error::DuplicateVehicle(vehicle.id));
        }
        if vehicle.spawn_time > self.clock() {
            return Err(Error::SpawnInFuture {
                id: vehicle.id,
                spawn_time: vehicle.spawn_time,
                clock: self.clock(),
            });
        }
        assert!(vehicle.lane < LANES_PER_ROAD, "lane index out of range");
        self.ids.insert(vehicle.id);
        vehicle.position = 0.0;
        vehicle.crossed = false;
        let (a, l) = (vehicle.route.origin.index(), vehicle.lane);
        if self.pending[a][l].is_empty() {
            if let Some(speed) = self.entry_speed(&self.incoming[a][l]) {
                vehicle.speed = speed;
                self.incoming[a][l].push(vehicle);
                return Ok(());
            }
        }
        self.pending[a][l].push_back(vehicle);
        Ok(())
    }

    /// Insertion speed at position 0 behind the last vehicle in `lane`, or
    /// `None` when the entry is blocked.
    fn entry_speed(&self, lane: &[Vehicle]) -> Option<f64> {
        match lane.last() {
            None => Some(self.spec.max_speed),
            Some(last) if last.position >= self.spec.length + self.spec.min_gap => {
                let free = last.position - self.spec.length - self.spec.min_gap;
                Some(self.spec.max_speed.min(self.spec.safe_speed(free, DT)))
            }
            Some(_) => None,
        }
    }

    /// Advances the world by one tick.
    pub fn step(&mut self) {
        self.advance_outgoing();
        self.release_box();
        self.advance_incoming();
        self.accrue_waits();
        self.insert_pending();
        self.clock += 1;
        self.phase.remaining = (self.phase.remaining - DT).max(0.0);
    }

    /// Car-following update of one lane. Every vehicle reacts to its leader's
    /// position at the start of the tick, so a standing queue starts moving
    /// one vehicle per tick. `stop_line` reports, per vehicle, whether it must
    /// treat the end of the road as a hard stop.
    fn follow(
        spec: &VehicleSpec,
        lane: &mut [Vehicle],
        road_length: f64,
        mut stop_line: impl FnMut(&Vehicle) -> bool,
    ) {
        let mut leader_rear = f64::INFINITY;
        for v in lane.iter_mut() {
            let mut free = (leader_rear - spec.min_gap - v.position).max(0.0);
            if stop_line(v) {
                free = free.min((road_length - v.position).max(0.0));
            }
            let speed = (v.speed + spec.max_accel * DT)
                .min(spec.max_speed)
                .min(spec.safe_speed(free, DT))
                .max(0.0);
            leader_rear = v.position - spec.length;
            v.speed = speed;
            v.position += speed * DT;
        }
    }

    fn advance_incoming(&mut self) {
        let spec = self.spec;
        let road = self.geometry.road_length;
        for approach in Direction::ALL {
            let light = self.light(approach);
            for lane in self.incoming[approach.index()].iter_mut() {
                Self::follow(&spec, lane, road, |v| match light {
                    Light::Green => false,
                    Light::Red => true,
                    // Dilemma zone: go only when a stop before the line is impossible.
                    // The tolerance absorbs rounding in the safe-speed approach.
                    Light::Yellow => spec.braking_distance(v.speed) <= road - v.position + 1e-6,
                });
                let crossed = lane.iter().take_while(|v| v.position > road).count();
                for mut v in lane.drain(..crossed) {
                    v.crossed = true;
                    let ticks = libm::ceil(self.geometry.box_width / v.speed) as u32;
                    self.in_box.push(InBox {
                        vehicle: v,
                        ticks_left: ticks.max(1),
                    });
                }
            }
        }
    }

    fn release_box(&mut self) {
        let mut still = Vec::with_capacity(self.in_box.len());
        for mut entry in core::mem::take(&mut self.in_box) {
            entry.ticks_left = entry.ticks_left.saturating_sub(1);
            if entry.ticks_left == 0 {
                let (e, l) = (entry.vehicle.route.destination.index(), entry.vehicle.lane);
                if let Some(limit) = self.entry_speed(&self.outgoing[e][l]) {
                    let mut v = entry.vehicle;
                    v.position = 0.0;
                    v.speed = v.speed.min(limit);
                    self.outgoing[e][l].push(v);
                    continue;
                }
            }
            still.push(entry);
        }
        self.in_box = still;
    }

    fn advance_outgoing(&mut self) {
        let spec = self.spec;
        let road = self.geometry.road_length;
        for lane in self.outgoing.iter_mut().flatten() {
            Self::follow(&spec, lane, road, |_| false);
            let done = lane.iter().take_while(|v| v.position >= road).count();
            for v in lane.drain(..done) {
                self.arrived += 1;
                self.arrived_wait += v.total_wait();
            }
        }
    }

    fn accrue_waits(&mut self) {
        for v in self.incoming.iter_mut().flatten().flatten() {
            if v.speed < STATIONARY_SPEED {
                v.accumulated_wait += DT;
            }
        }
        for v in self.pending.iter_mut().flatten().flatten() {
            v.entry_delay += DT;
        }
    }

    fn insert_pending(&mut self) {
        for a in 0..4 {
            for l in 0..LANES_PER_ROAD {
                while let Some(front) = self.pending[a][l].front() {
                    debug_assert_eq!(front.lane, l);
                    match self.entry_speed(&self.incoming[a][l]) {
                        Some(speed) => {
                            let mut v = self.pending[a][l].pop_front().expect("front exists");
                            v.speed = speed;
                            self.incoming[a][l].push(v);
                        }
                        None => break,
                    }
                }
            }
        }
    }

    /// 64-bit digest of the full state, for determinism checks.
    pub fn digest(&self) -> u64 {
        let mut buf: Vec<u8> = Vec::with_capacity(64 + 64 * self.ids.len());
        buf.extend_from_slice(&self.clock.to_le_bytes());
        buf.push(self.phase.id);
        buf.extend_from_slice(&self.phase.remaining.to_bits().to_le_bytes());
        buf.extend_from_slice(&(self.arrived as u64).to_le_bytes());
        buf.extend_from_slice(&self.arrived_wait.to_bits().to_le_bytes());
        for view in self.vehicles() {
            let v = view.vehicle;
            buf.push(view.location as u8);
            buf.extend_from_slice(&v.id.to_le_bytes());
            buf.push(v.lane as u8);
            for x in [v.position, v.speed, v.accumulated_wait, v.entry_delay] {
                buf.extend_from_slice(&x.to_bits().to_le_bytes());
            }
        }
        fnv1a64(&buf)
    }
}
