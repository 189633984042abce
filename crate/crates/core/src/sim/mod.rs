//! Fixed-step microscopic simulation of one signalized four-way intersection.
//!
//! Each approach has four incoming and four outgoing lanes of equal length.
//! Lane 0 carries left turns, lanes 1-2 through traffic, lane 3 right turns.
//! Vehicles keep their lane from entry to exit.

mod phase;
mod world;

pub use phase::{Light, PhaseProgram, PHASE_COUNT};
pub use world::{ActivePhase, Location, Vehicle, VehicleView, World};

use crate::error::{Error, Result};

pub const LANES_PER_ROAD: usize = 4;

/// Approach order used throughout: North, West, East, South.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    North,
    West,
    East,
    South,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::West,
        Direction::East,
        Direction::South,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::North => Direction::South,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
            Direction::East => Direction::West,
        }
    }

    /// Exit reached by a vehicle entering from `self` and performing `movement`.
    pub fn exit_for(self, movement: Movement) -> Self {
        use Direction::*;
        match (self, movement) {
            (o, Movement::Through) => o.opposite(),
            // Southbound (from North): left is East, right is West.
            (North, Movement::Left) => East,
            (North, Movement::Right) => West,
            // Eastbound (from West): left is North, right is South.
            (West, Movement::Left) => North,
            (West, Movement::Right) => South,
            // Westbound (from East): left is South, right is North.
            (East, Movement::Left) => South,
            (East, Movement::Right) => North,
            // Northbound (from South): left is West, right is East.
            (South, Movement::Left) => West,
            (South, Movement::Right) => East,
        }
    }

    /// Movement that takes a vehicle from `self` to `exit`, if one exists.
    pub fn movement_to(self, exit: Direction) -> Option<Movement> {
        [Movement::Left, Movement::Through, Movement::Right]
            .into_iter()
            .find(|&m| self.exit_for(m) == exit)
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::North => "N",
            Direction::West => "W",
            Direction::East => "E",
            Direction::South => "S",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "n" | "north" => Some(Direction::North),
            "w" | "west" => Some(Direction::West),
            "e" | "east" => Some(Direction::East),
            "s" | "south" => Some(Direction::South),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Movement {
    Left,
    Through,
    Right,
}

impl Movement {
    pub fn name(self) -> &'static str {
        match self {
            Movement::Left => "left",
            Movement::Through => "through",
            Movement::Right => "right",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" => Some(Movement::Left),
            "through" | "t" | "straight" => Some(Movement::Through),
            "right" | "r" => Some(Movement::Right),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Route {
    pub origin: Direction,
    pub movement: Movement,
    pub destination: Direction,
}

impl Route {
    pub fn new(origin: Direction, movement: Movement) -> Self {
        Self {
            origin,
            movement,
            destination: origin.exit_for(movement),
        }
    }
}

/// Physical vehicle attributes shared by every vehicle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleSpec {
    pub length: f64,
    pub width: f64,
    pub min_gap: f64,
    pub max_speed: f64,
    pub max_accel: f64,
    pub max_decel: f64,
}

impl Default for VehicleSpec {
    fn default() -> Self {
        Self {
            length: 5.0,
            width: 1.8,
            min_gap: 2.5,
            max_speed: 25.0,
            max_accel: 1.0,
            max_decel: 4.5,
        }
    }
}

impl VehicleSpec {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [
            self.length,
            self.width,
            self.min_gap,
            self.max_speed,
            self.max_accel,
            self.max_decel,
        ]
        .iter()
        .all(|&v| v > 0.0 && v.is_finite());
        if !all_positive {
            return Err(Error::InvalidScenario(
                "vehicle attributes must be positive".into(),
            ));
        }
        if self.max_decel < self.max_accel {
            return Err(Error::InvalidScenario(
                "max deceleration must be at least max acceleration".into(),
            ));
        }
        Ok(())
    }

    /// Largest speed `v` with `v * dt + v^2 / (2 b) <= free`, i.e. the vehicle
    /// covers at most `free` metres this tick and can still stop in the rest.
    pub fn safe_speed(&self, free: f64, dt: f64) -> f64 {
        if free <= 0.0 {
            return 0.0;
        }
        let b = self.max_decel;
        let v = b * (-dt + libm::sqrt(dt * dt + 2.0 * free / b));
        // Rounding may push v * dt a hair past `free`.
        v.min(free / dt).max(0.0)
    }

    /// Distance needed to stop from `speed` at maximum deceleration.
    pub fn braking_distance(&self, speed: f64) -> f64 {
        speed * speed / (2.0 * self.max_decel)
    }
}

/// Road geometry of the intersection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry {
    /// Length of each incoming and outgoing road, metres.
    pub road_length: f64,
    /// Distance travelled inside the intersection box, metres.
    pub box_width: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            road_length: 750.0,
            box_width: 30.0,
        }
    }
}
