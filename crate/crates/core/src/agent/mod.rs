//! DQN control: experience replay, exploration, episode drivers and training.

mod episode;
mod explore;
mod replay;
mod train;

use alloc::vec::Vec;

pub use episode::{
    drive, run_fixed_baseline, run_time_episode, run_turn_episode, DecisionRecord, EpisodeLog,
    EpisodeSetup, GreedyPolicy, PhaseInterval, Policy, TickObserver,
};
pub use explore::{argmax, select_action, EpsilonSchedule};
pub use replay::{ReplayBuffer, DEFAULT_CAPACITY};
pub use train::{bellman_targets, train, Learner, TrainingConfig, TrainingEpisode, TrainingOutcome};

use crate::encoding::CELLS;
use crate::error::{Error, Result};

/// Extra green seconds the time-based agent can choose, 0 through 19.
pub const TIME_ACTIONS: usize = 20;

/// Learning agents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AgentKind {
    /// Chooses which approach gets the next green.
    Turn,
    /// Chooses how long the next green in the fixed cycle lasts.
    Time,
}

impl AgentKind {
    pub fn input_dim(self) -> usize {
        match self {
            AgentKind::Turn => 4 * CELLS,
            AgentKind::Time => CELLS,
        }
    }

    pub fn output_dim(self) -> usize {
        match self {
            AgentKind::Turn => 4,
            AgentKind::Time => TIME_ACTIONS,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Turn => "turn",
            AgentKind::Time => "time",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "turn" => Some(AgentKind::Turn),
            "time" => Some(AgentKind::Time),
            _ => None,
        }
    }

    /// Checks that a network has this agent's input and output sizes.
    pub fn check_network(self, net: &crate::nn::Network) -> Result<()> {
        if net.input_dim() != self.input_dim() || net.output_dim() != self.output_dim() {
            return Err(Error::AgentMismatch {
                agent: self.name(),
                input: net.input_dim(),
                output: net.output_dim(),
            });
        }
        Ok(())
    }
}

/// Any signal controller, learned or not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    Fixed,
    Turn,
    Time,
}

impl ControllerKind {
    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Fixed => "fixed",
            ControllerKind::Turn => "turn",
            ControllerKind::Time => "time",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fixed" => Some(ControllerKind::Fixed),
            "turn" => Some(ControllerKind::Turn),
            "time" => Some(ControllerKind::Time),
            _ => None,
        }
    }
}

impl From<AgentKind> for ControllerKind {
    fn from(kind: AgentKind) -> Self {
        match kind {
            AgentKind::Turn => ControllerKind::Turn,
            AgentKind::Time => ControllerKind::Time,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Experience {
    pub state: Vec<f64>,
    pub action: usize,
    /// Drop in accumulated wait over the step, seconds.
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}
