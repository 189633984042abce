use alloc::format;
use alloc::vec::Vec;

use super::{
    drive, select_action, AgentKind, EpisodeLog, EpisodeSetup, EpsilonSchedule, Experience, Policy,
    ReplayBuffer, DEFAULT_CAPACITY,
};
use crate::encoding::EncodingWeights;
use crate::error::{Error, Result};
use crate::nn::{AdamConfig, AdamState, Network, NetworkSpec, TrainingBatch, HIDDEN_DIMS};
use crate::rng::{SeedStreams, Xoshiro256};
use crate::sim::{Geometry, PhaseProgram, VehicleSpec, World};
use crate::traffic::{
    generate_schedule, ScenarioConfig, ScenarioName, ScenarioVolumes, DEFAULT_EPISODE_LENGTH,
    DEFAULT_FAVORED_SHARE, DEFAULT_STRAIGHT_FRACTION, DEFAULT_WEIBULL_SHAPE,
};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingConfig {
    pub agent: AgentKind,
    pub episodes: usize,
    pub episode_length: f64,
    pub gamma: f64,
    /// Multiplier applied to rewards before they enter the replay buffer.
    pub reward_scale: f64,
    pub adam: AdamConfig,
    pub batch: usize,
    pub buffer_capacity: usize,
    pub program: PhaseProgram,
    pub epsilon: EpsilonSchedule,
    pub seed: u64,
    pub hidden: Vec<usize>,
    pub volumes: ScenarioVolumes,
    pub favored_share: f64,
    pub straight_fraction: f64,
    pub weibull_shape: f64,
    pub weights: EncodingWeights,
    pub vehicle: VehicleSpec,
    pub geometry: Geometry,
}

impl TrainingConfig {
    pub fn new(agent: AgentKind) -> Self {
        Self {
            agent,
            episodes: 300,
            episode_length: DEFAULT_EPISODE_LENGTH,
            gamma: 0.95,
            reward_scale: 1.0,
            adam: AdamConfig::default(),
            batch: 64,
            buffer_capacity: DEFAULT_CAPACITY,
            program: PhaseProgram::default(),
            epsilon: EpsilonSchedule::default(),
            seed: 0,
            hidden: HIDDEN_DIMS.to_vec(),
            volumes: ScenarioVolumes::default(),
            favored_share: DEFAULT_FAVORED_SHARE,
            straight_fraction: DEFAULT_STRAIGHT_FRACTION,
            weibull_shape: DEFAULT_WEIBULL_SHAPE,
            weights: EncodingWeights::default(),
            vehicle: VehicleSpec::default(),
            geometry: Geometry::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma {} outside [0, 1]", self.gamma));
        }
        if self.batch == 0 || self.batch > self.buffer_capacity {
            return bad(format!(
                "batch {} must be in 1..={} (buffer capacity)",
                self.batch, self.buffer_capacity
            ));
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad(format!("reward scale {} must be positive", self.reward_scale));
        }
        if !(self.adam.lr > 0.0) {
            return bad(format!("learning rate {} must be positive", self.adam.lr));
        }
        if !(self.episode_length > 0.0) {
            return bad(format!("episode length {} must be positive", self.episode_length));
        }
        self.epsilon.validate()?;
        self.vehicle.validate()?;
        self.network_spec().validate()?;
        for name in ScenarioName::ALL {
            self.scenario(name).validate()?;
        }
        Ok(())
    }

    pub fn network_spec(&self) -> NetworkSpec {
        NetworkSpec {
            input_dim: self.agent.input_dim(),
            hidden_dims: self.hidden.clone(),
            output_dim: self.agent.output_dim(),
        }
    }

    pub fn scenario(&self, name: ScenarioName) -> ScenarioConfig {
        let mut s = ScenarioConfig::with(name, &self.volumes, self.favored_share, self.episode_length);
        s.straight_fraction = self.straight_fraction;
        s.weibull_shape = self.weibull_shape;
        s
    }

    pub fn setup(&self) -> EpisodeSetup {
        EpisodeSetup {
            episode_length: self.episode_length,
            weights: self.weights,
        }
    }

    pub fn world(&self, seed: u64) -> World {
        World::new(self.vehicle, self.geometry, self.program, seed)
    }

    /// Scenario used for 0-based training episode `index`.
    pub fn rotation(index: usize) -> ScenarioName {
        ScenarioName::ALL[index % ScenarioName::ALL.len()]
    }
}

/// Targets `r + gamma * max_a Q(s', a)`, or just `r` for terminal steps.
pub fn bellman_targets(batch: &[&Experience], net: &Network, gamma: f64) -> Result<Vec<f64>> {
    let open: Vec<&&Experience> = batch.iter().filter(|e| !e.terminal).collect();
    let mut inputs = Vec::with_capacity(open.len() * net.input_dim());
    for e in &open {
        inputs.extend_from_slice(&e.next_state);
    }
    let q = if open.is_empty() {
        Vec::new()
    } else {
        net.forward_batch(&inputs, open.len())?
    };
    let mut rows = q.chunks(net.output_dim());
    Ok(batch
        .iter()
        .map(|e| {
            if e.terminal {
                e.reward
            } else {
                let row = rows.next().expect("one row per open transition");
                let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                e.reward + gamma * best
            }
        })
        .collect())
}

/// Online DQN learner: epsilon-greedy acting plus one replay update per
/// observed transition once the buffer holds a full batch.
pub struct Learner {
    pub net: Network,
    pub adam: AdamState,
    pub buffer: ReplayBuffer,
    pub epsilon: f64,
    pub updates: u64,
    pub last_loss: f64,
    adam_config: AdamConfig,
    gamma: f64,
    reward_scale: f64,
    batch: usize,
    explore: Xoshiro256,
    sample: Xoshiro256,
}

impl Learner {
    pub fn new(net: Network, config: &TrainingConfig, streams: &SeedStreams) -> Self {
        let n = net.params().len();
        Self {
            net,
            adam: AdamState::new(n),
            buffer: ReplayBuffer::new(config.buffer_capacity),
            epsilon: 1.0,
            updates: 0,
            last_loss: 0.0,
            adam_config: config.adam,
            gamma: config.gamma,
            reward_scale: config.reward_scale,
            batch: config.batch,
            explore: streams.rng(SeedStreams::EXPLORATION, 0),
            sample: streams.rng(SeedStreams::SAMPLING, 0),
        }
    }

    fn update(&mut self) -> Result<()> {
        let picked = self.buffer.sample(self.batch, &mut self.sample);
        let targets = bellman_targets(&picked, &self.net, self.gamma)?;
        let mut batch = TrainingBatch::default();
        for (e, y) in picked.iter().zip(targets) {
            batch.push(&e.state, e.action, y);
        }
        let (loss, grads) = self.net.loss_and_grad(&batch)?;
        self.adam
            .update(&self.adam_config, self.net.params_mut(), &grads)?;
        self.last_loss = loss;
        self.updates += 1;
        Ok(())
    }
}

impl Policy for Learner {
    fn act(&mut self, state: &[f64]) -> Result<usize> {
        let q = self.net.forward(state)?;
        Ok(select_action(&q, self.epsilon, &mut self.explore))
    }

    fn observe(&mut self, mut experience: Experience) -> Result<()> {
        experience.reward *= self.reward_scale;
        self.buffer.push(experience);
        if self.buffer.len() >= self.batch {
            self.update()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingEpisode {
    /// 1-based.
    pub episode: usize,
    pub scenario: ScenarioName,
    pub epsilon: f64,
    pub traffic_seed: u64,
    pub log: EpisodeLog,
    /// Parameter updates so far, across all episodes.
    pub updates: u64,
    pub buffer_len: usize,
    pub last_loss: f64,
}

#[derive(Clone, Debug)]
pub struct TrainingOutcome {
    pub network: Network,
    pub episodes: Vec<TrainingEpisode>,
}

/// Trains from freshly initialised weights. `progress` sees each finished
/// episode.
pub fn train(
    config: &TrainingConfig,
    progress: &mut dyn FnMut(&TrainingEpisode),
) -> Result<TrainingOutcome> {
    config.validate()?;
    let streams = SeedStreams::new(config.seed);
    let net = Network::init(&config.network_spec(), &mut streams.rng(SeedStreams::INIT, 0))?;
    config.agent.check_network(&net)?;
    let mut learner = Learner::new(net, config, &streams);
    let setup = config.setup();
    let mut episodes = Vec::with_capacity(config.episodes);
    for index in 0..config.episodes {
        let scenario = TrainingConfig::rotation(index);
        let traffic_seed = streams.seed(SeedStreams::TRAFFIC, index as u64);
        let schedule = generate_schedule(&config.scenario(scenario), traffic_seed)?;
        learner.epsilon = config.epsilon.epsilon(index + 1);
        let log = drive(
            config.agent.into(),
            config.world(traffic_seed),
            &mut learner,
            &schedule,
            &setup,
            &mut (),
        )?;
        let record = TrainingEpisode {
            episode: index + 1,
            scenario,
            epsilon: learner.epsilon,
            traffic_seed,
            log,
            updates: learner.updates,
            buffer_len: learner.buffer.len(),
            last_loss: learner.last_loss,
        };
        progress(&record);
        episodes.push(record);
    }
    Ok(TrainingOutcome {
        network: learner.net,
        episodes,
    })
}
