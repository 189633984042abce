use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::Xoshiro256;
use crate::sim::{Direction, Movement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScenarioName {
    Low,
    High,
    EastWest,
    NorthSouth,
}

impl ScenarioName {
    /// Also the order in which training rotates through scenarios.
    pub const ALL: [ScenarioName; 4] = [
        ScenarioName::Low,
        ScenarioName::High,
        ScenarioName::EastWest,
        ScenarioName::NorthSouth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioName::Low => "low",
            ScenarioName::High => "high",
            ScenarioName::EastWest => "ew",
            ScenarioName::NorthSouth => "ns",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Some(ScenarioName::Low),
            "high" => Some(ScenarioName::High),
            "ew" | "east-west" | "eastwest" => Some(ScenarioName::EastWest),
            "ns" | "north-south" | "northsouth" => Some(ScenarioName::NorthSouth),
            _ => None,
        }
    }
}

/// Vehicles generated per scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScenarioVolumes {
    pub low: usize,
    pub high: usize,
    pub east_west: usize,
    pub north_south: usize,
}

impl Default for ScenarioVolumes {
    fn default() -> Self {
        Self {
            low: 600,
            high: 3000,
            east_west: 1500,
            north_south: 1500,
        }
    }
}

impl ScenarioVolumes {
    pub fn get(&self, name: ScenarioName) -> usize {
        match name {
            ScenarioName::Low => self.low,
            ScenarioName::High => self.high,
            ScenarioName::EastWest => self.east_west,
            ScenarioName::NorthSouth => self.north_south,
        }
    }
}

/// Shape parameter of the departure-time distribution.
pub const DEFAULT_WEIBULL_SHAPE: f64 = 2.0;
/// Share of traffic on the favored pair of approaches in the EW and NS scenarios.
pub const DEFAULT_FAVORED_SHARE: f64 = 0.75;
pub const DEFAULT_STRAIGHT_FRACTION: f64 = 0.6;
pub const DEFAULT_EPISODE_LENGTH: f64 = 5400.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: ScenarioName,
    pub total_vehicles: usize,
    /// Origin shares in N, W, E, S order.
    pub directional_weights: [f64; 4],
    pub straight_fraction: f64,
    pub episode_length: f64,
    pub weibull_shape: f64,
}

impl ScenarioConfig {
    pub fn preset(name: ScenarioName) -> Self {
        Self::with(
            name,
            &ScenarioVolumes::default(),
            DEFAULT_FAVORED_SHARE,
            DEFAULT_EPISODE_LENGTH,
        )
    }

    pub fn with(
        name: ScenarioName,
        volumes: &ScenarioVolumes,
        favored_share: f64,
        episode_length: f64,
    ) -> Self {
        let f = favored_share / 2.0;
        let u = (1.0 - favored_share) / 2.0;
        let directional_weights = match name {
            ScenarioName::Low | ScenarioName::High => [0.25; 4],
            ScenarioName::EastWest => [u, f, f, u],
            ScenarioName::NorthSouth => [f, u, u, f],
        };
        Self {
            name,
            total_vehicles: volumes.get(name),
            directional_weights,
            straight_fraction: DEFAULT_STRAIGHT_FRACTION,
            episode_length,
            weibull_shape: DEFAULT_WEIBULL_SHAPE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.directional_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.directional_weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidScenario(format!(
                "directional weights must be non-negative and sum to 1 (sum {sum})"
            )));
        }
        if !(0.0..=1.0).contains(&self.straight_fraction) {
            return Err(Error::InvalidScenario(format!(
                "straight fraction {} outside [0, 1]",
                self.straight_fraction
            )));
        }
        if !(self.episode_length >= 1.0) {
            return Err(Error::InvalidScenario("episode length must be >= 1 s".into()));
        }
        if !(self.weibull_shape > 0.0) {
            return Err(Error::InvalidScenario("Weibull shape must be positive".into()));
        }
        Ok(())
    }

    /// Weibull scale that puts the 99th percentile at the episode end.
    pub fn weibull_scale(&self) -> f64 {
        self.episode_length / libm::pow(libm::log(100.0), 1.0 / self.weibull_shape)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Arrival {
    /// Whole seconds after episode start.
    pub depart_time: u32,
    pub origin: Direction,
    pub movement: Movement,
    pub destination: Direction,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ArrivalSchedule {
    pub entries: Vec<Arrival>,
}

impl ArrivalSchedule {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Inverse-CDF Weibull draw.
pub fn sample_weibull(rng: &mut Xoshiro256, shape: f64, scale: f64) -> f64 {
    let u = rng.next_f64();
    scale * libm::pow(-libm::log1p(-u), 1.0 / shape)
}

/// Splits `total` into integer counts proportional to `weights`
/// (largest remainder, ties to the lower index).
pub fn apportion(total: usize, weights: &[f64; 4]) -> [usize; 4] {
    let exact: [f64; 4] = weights.map(|w| w * total as f64);
    let mut counts: [usize; 4] = exact.map(|x| libm::floor(x + 1e-9) as usize);
    let mut assigned: usize = counts.iter().sum();
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - counts[a] as f64;
        let rb = exact[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut k = 0;
    while assigned < total {
        counts[order[k % 4]] += 1;
        assigned += 1;
        k += 1;
    }
    counts
}

/// Draws a departure schedule. Deterministic in `(config, seed)`.
///
/// Departure times are Weibull draws (redrawn when past the episode end),
/// truncated to whole seconds. Origins are apportioned exactly to the
/// directional weights and shuffled; each vehicle goes straight with
/// probability `straight_fraction`, otherwise turns left or right with equal
/// probability.
pub fn generate_schedule(config: &ScenarioConfig, seed: u64) -> Result<ArrivalSchedule> {
    config.validate()?;
    let mut rng = Xoshiro256::seed_from_u64(seed);
    let n = config.total_vehicles;
    let scale = config.weibull_scale();
    let end = config.episode_length;

    let mut times = Vec::with_capacity(n);
    for _ in 0..n {
        let t = loop {
            let x = sample_weibull(&mut rng, config.weibull_shape, scale);
            if x < end {
                break x;
            }
        };
        times.push(libm::floor(t) as u32);
    }

    let counts = apportion(n, &config.directional_weights);
    let mut origins: Vec<Direction> = Vec::with_capacity(n);
    for (d, &c) in Direction::ALL.iter().zip(&counts) {
        origins.extend(core::iter::repeat(*d).take(c));
    }
    rng.shuffle(&mut origins);

    let mut entries: Vec<Arrival> = times
        .into_iter()
        .zip(origins)
        .map(|(depart_time, origin)| {
            let movement = if rng.chance(config.straight_fraction) {
                Movement::Through
            } else if rng.chance(0.5) {
                Movement::Left
            } else {
                Movement::Right
            };
            Arrival {
                depart_time,
                origin,
                movement,
                destination: origin.exit_for(movement),
            }
        })
        .collect();
    entries.sort_by_key(|a| a.depart_time);
    Ok(ArrivalSchedule { entries })
}
