use alloc::string::String;

use crate::sim::Direction;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("phase id {0} is outside 1..=8")]
    InvalidPhase(u8),
    #[error("vehicle id {0} already exists")]
    DuplicateVehicle(u64),
    #[error("vehicle {id} departs at {spawn_time} s, after the clock ({clock} s)")]
    SpawnInFuture { id: u64, spawn_time: f64, clock: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("no route from {from:?} entry to {to:?} exit")]
    Unreachable { from: Direction, to: Direction },
    #[error("expected 4 approach matrices, got {0}")]
    WrongMatrixCount(usize),
    #[error("invalid encoding weights: {0}")]
    InvalidWeights(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("ewpv is undefined for an episode with no vehicles")]
    NoVehicles,
    #[error("network geometry {input}->{output} does not fit the {agent} agent")]
    AgentMismatch {
        agent: &'static str,
        input: usize,
        output: usize,
    },
}
